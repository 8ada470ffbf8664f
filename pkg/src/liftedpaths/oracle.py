"""Brute-force reference solver built on exhaustive path enumeration.

Every feasible point of an instance is a family of pairwise node-disjoint
source-to-sink paths together with the lifted labels that family realizes.
This module enumerates exactly those points, in a deterministic order, and
`brute_force_optimum` picks the best one.  It is deliberately independent of
the cutting-plane machinery — no shared search code — so agreement between
the two is meaningful evidence of correctness.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import SINK, FlowSolution, Instance, solution_from_paths

__all__ = [
    "OracleLimitError",
    "EnumerationResult",
    "all_st_paths",
    "enumerate_feasible",
    "brute_force_optimum",
]


class OracleLimitError(RuntimeError):
    """The requested enumeration exceeded its solution budget."""


@dataclass(frozen=True)
class EnumerationResult:
    solutions: list[FlowSolution]
    truncated: bool


def all_st_paths(instance: Instance) -> list[tuple[int, ...]]:
    """All source-to-sink paths as tuples of inner nodes, in lexicographic
    order (a path sorts before its own extensions)."""
    succs: dict[int, list[int]] = {}
    to_sink: dict[int, bool] = {}
    for v, edges in instance.out_edges.items():
        inner = sorted(w for _, w in edges if w != SINK)
        succs[v] = inner
        to_sink[v] = any(w == SINK for _, w in edges)

    paths: list[tuple[int, ...]] = []

    def walk(v: int, acc: list[int]) -> None:
        if to_sink.get(v) and acc:
            paths.append(tuple(acc))
        for w in succs.get(v, ()):
            acc.append(w)
            walk(w, acc)
            acc.pop()

    walk(0, [])
    return paths


def enumerate_feasible(
    instance: Instance, limit: int | None = None
) -> EnumerationResult:
    """Every family of pairwise node-disjoint paths, as full solutions.

    Families appear in a fixed order: paths are considered lexicographically
    and each is excluded before it is included, so the empty family (the
    all-zero solution) always comes first.  With `limit`, enumeration stops
    after that many solutions and the result is flagged truncated.
    """
    paths = all_st_paths(instance)
    masks = [sum(1 << v for v in p) for p in paths]
    solutions: list[FlowSolution] = []
    truncated = False
    # Stack frames are (next path index, occupied-node mask, chosen paths);
    # the include branch is pushed first so the exclude branch pops first.
    stack: list[tuple[int, int, tuple[tuple[int, ...], ...]]] = [(0, 0, ())]
    while stack:
        i, used, chosen = stack.pop()
        if i == len(paths):
            if limit is not None and len(solutions) >= limit:
                truncated = True
                break
            solutions.append(solution_from_paths(instance, list(chosen)))
            continue
        if not used & masks[i]:
            stack.append((i + 1, used | masks[i], chosen + (paths[i],)))
        stack.append((i + 1, used, chosen))
    return EnumerationResult(solutions=solutions, truncated=truncated)


def brute_force_optimum(
    instance: Instance, limit: int | None = None
) -> FlowSolution:
    """The minimum-cost feasible solution; among equal objectives the one
    whose sorted active-node tuple is lexicographically smallest wins."""
    result = enumerate_feasible(instance, limit)
    if result.truncated:
        raise OracleLimitError(
            f"more than {limit} feasible solutions; raise the limit"
        )
    best_objective = min(s.objective for s in result.solutions)
    candidates = [
        s for s in result.solutions if s.objective <= best_objective + 1e-12
    ]
    return min(candidates, key=lambda s: s.active_nodes())
