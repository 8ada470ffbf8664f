"""Exact separation of lifted-label inconsistencies at integral flows.

Given an integral flow plus a candidate lifted labeling, two routines find
violated inequalities whenever the labeling disagrees with the connectivity
the flow actually realizes:

  * `separate_lifted_path`   — labels that are 0 but should be 1: the two
    endpoints lie on one active path in order.  Emits one lifted path
    inequality per offending edge, violated by exactly 1.
  * `separate_lifted_cut`    — labels that are 1 but should be 0.  Emits one
    (possibly strengthened, possibly mirrored) path-induced cut per
    offending edge, violated by exactly 1.

Both run in one scan over the active paths plus one scan over the lifted
edges; witness construction only reuses the indexes built during those scans,
so the per-call work inspected is exactly (active base edges) + (lifted
edges).  Together the routines are complete: both return nothing if and only
if the labeling equals `lifted_labels_from_flow`.
"""

from __future__ import annotations

from bisect import bisect_left, insort
from dataclasses import dataclass, field

from .constraints import (
    SolutionValues,
    PathWitness,
    build_lifted_path_induced_cut,
    build_lifted_path_inequality,
    build_single_node_cut,
    build_symmetric_cut,
    check_violation,
)
from .instance import FlowSolution, Instance, active_st_paths
from .milp import LinearConstraint

__all__ = ["SeparationReport", "separate_lifted_path", "separate_lifted_cut", "extract_path"]


@dataclass
class SeparationReport:
    """Constraints found by one separation call, plus scan accounting."""

    constraints: list[LinearConstraint] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)
    paths_scanned: int = 0
    path_edges_scanned: int = 0
    lifted_edges_inspected: int = 0

    @property
    def items_inspected(self) -> int:
        return self.path_edges_scanned + self.lifted_edges_inspected

    def _add(self, constraint: LinearConstraint) -> None:
        self.constraints.append(constraint)
        self.counts[constraint.tag] = self.counts.get(constraint.tag, 0) + 1


class _PathIndex:
    """Shared per-call indexes: node positions and active lifted shortcuts."""

    def __init__(self, instance: Instance, solution: FlowSolution):
        self.instance = instance
        self.solution = solution
        self.paths = active_st_paths(instance, solution)
        self.where: dict[int, tuple[int, int]] = {}
        for pid, path in enumerate(self.paths):
            for pos, v in enumerate(path):
                self.where[v] = (pid, pos)
        # Active same-path lifted edges, bucketed by (path, head) and kept
        # sorted by tail position — the raw material for shortcut jumps.
        self.shortcuts: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
        # Inactive lifted edges grouped by head / by tail, for the
        # strengthened-cut searches.
        self.zeros_in: dict[int, list[tuple[int, int]]] = {}
        self.zeros_out: dict[int, list[tuple[int, int]]] = {}

    def note_shortcut(self, pid: int, head: int, pos_tail: int, tail: int, li: int) -> None:
        insort(self.shortcuts.setdefault((pid, head), []), (pos_tail, tail, li))

    def edge_count(self) -> int:
        # Every active path contributes len(path)+1 active base edges.
        return sum(len(p) + 1 for p in self.paths)


def _classify(index: _PathIndex, report: SeparationReport):
    """One pass over the lifted edges; fills the index and the candidates."""
    inst = index.instance
    labels = index.solution.y_lifted
    where = index.where
    ones: list[tuple[int, int, int]] = []  # (li, u, v) labeled 1
    zeros_same_path: list[tuple[int, int, int]] = []  # candidates for the path side
    for li, (u, v, _) in enumerate(inst.lifted_edges):
        report.lifted_edges_inspected += 1
        label = labels[li]
        lu = where.get(u)
        lv = where.get(v)
        connected = lu is not None and lv is not None and lu[0] == lv[0] and lu[1] < lv[1]
        if label:
            if connected:
                index.note_shortcut(lu[0], v, lu[1], u, li)
            else:
                ones.append((li, u, v))
        else:
            if connected:
                zeros_same_path.append((li, u, v))
            index.zeros_in.setdefault(v, []).append((u, li))
            index.zeros_out.setdefault(u, []).append((v, li))
    return ones, zeros_same_path


def _extract(
    index: _PathIndex, pid: int, v: int, w: int
) -> PathWitness:
    """Walk the v..w stretch of path `pid` backward, jumping along active
    lifted shortcuts whenever one lands at or after v (earliest tail wins,
    i.e. the longest valid jump)."""
    inst = index.instance
    path = index.paths[pid]
    pos_v = index.where[v][1]
    rev_nodes = [w]
    base_steps: list[int] = []
    lift_steps: list[int] = []
    j = w
    pos_j = index.where[w][1]
    while j != v:
        bucket = index.shortcuts.get((pid, j))
        jumped = False
        if bucket:
            k = bisect_left(bucket, (pos_v, -1, -1))
            if k < len(bucket):
                pos_t, tail, li = bucket[k]
                lift_steps.append(li)
                rev_nodes.append(tail)
                j, pos_j = tail, pos_t
                jumped = True
        if not jumped:
            prev = path[pos_j - 1]
            base_steps.append(inst.base_index[(prev, j)])
            rev_nodes.append(prev)
            j, pos_j = prev, pos_j - 1
    return PathWitness(
        tuple(reversed(rev_nodes)),
        tuple(reversed(base_steps)),
        tuple(reversed(lift_steps)),
    )


def extract_path(
    instance: Instance, solution: FlowSolution, v: int, w: int
) -> PathWitness:
    """Public witness extraction for endpoints on one active path."""
    index = _PathIndex(instance, solution)
    dummy = SeparationReport()
    _classify(index, dummy)
    lv, lw = index.where.get(v), index.where.get(w)
    if lv is None or lw is None or lv[0] != lw[0] or lv[1] >= lw[1]:
        raise ValueError(f"{v} and {w} are not in order on one active path")
    return _extract(index, lv[0], v, w)


def separate_lifted_path(
    instance: Instance, solution: FlowSolution
) -> SeparationReport:
    """Violated lifted path inequalities: labels stuck at 0 across a path."""
    report = SeparationReport()
    index = _PathIndex(instance, solution)
    report.paths_scanned = len(index.paths)
    report.path_edges_scanned = index.edge_count()
    _, zeros_same_path = _classify(index, report)
    values = SolutionValues(instance, solution)
    for li, u, v in zeros_same_path:
        pid = index.where[u][0]
        witness = _extract(index, pid, u, v)
        con = build_lifted_path_inequality(instance, li, witness)
        violation = check_violation(con, values)
        assert violation > 0, f"unviolated separation output: {con.format()}"
        report._add(con)
    return report


def separate_lifted_cut(
    instance: Instance,
    solution: FlowSolution,
    include_symmetric: bool = True,
) -> SeparationReport:
    """Violated cuts: labels stuck at 1 that the flow does not realize.

    For each offending lifted edge (v, w) with v on an active path, one cut is
    emitted along that path (strengthened to reuse a 0-labeled lifted edge
    (u, w) when one exists — the latest such u wins).  With
    `include_symmetric`, a mirrored cut along w's path is emitted as well
    (earliest 0-labeled (v, u); mirror-image fallback otherwise).
    """
    report = SeparationReport()
    index = _PathIndex(instance, solution)
    report.paths_scanned = len(index.paths)
    report.path_edges_scanned = index.edge_count()
    ones, _ = _classify(index, report)
    values = SolutionValues(instance, solution)
    reach = instance.reachability

    for li, v, w in ones:
        lv = index.where.get(v)
        lw = index.where.get(w)
        if lv is not None:
            pid, pos_v = lv
            path = index.paths[pid]
            # strengthened: latest u after v on this path with (u,w) labeled 0
            best: tuple[int, int] | None = None
            for u, _lj in index.zeros_in.get(w, ()):
                lu = index.where.get(u)
                if lu is not None and lu[0] == pid and lu[1] > pos_v:
                    if best is None or lu[1] > best[0]:
                        best = (lu[1], u)
            if best is not None:
                witness = _extract(index, pid, v, best[1])
                con = build_lifted_path_induced_cut(
                    instance, reach, li, witness, strengthened=True
                )
            else:
                # plain: last path vertex that still reaches w (v qualifies)
                u = next(
                    path[i] for i in range(len(path) - 1, -1, -1)
                    if reach.reaches(path[i], w)
                )
                witness = _extract(index, pid, v, u)
                con = build_lifted_path_induced_cut(
                    instance, reach, li, witness, strengthened=False
                )
            violation = check_violation(con, values)
            assert violation > 0, f"unviolated separation output: {con.format()}"
            report._add(con)
        else:
            # v carries no flow at all: the plain out-cut is already violated.
            con = build_single_node_cut(instance, reach, li, "out_of_v")
            assert check_violation(con, values) > 0
            report._add(con)

        if not include_symmetric:
            continue
        if lw is not None:
            qid, pos_w = lw
            path = index.paths[qid]
            best = None
            for u, _lj in index.zeros_out.get(v, ()):
                lu = index.where.get(u)
                if lu is not None and lu[0] == qid and lu[1] < pos_w:
                    if best is None or lu[1] < best[0]:
                        best = (lu[1], u)
            if best is not None:
                witness = _extract(index, qid, best[1], w)
                con = build_symmetric_cut(
                    instance, reach, li, witness, variant="strengthened"
                )
            else:
                # first path vertex reachable from v (w qualifies)
                u = next(p for p in path if reach.reaches(v, p))
                witness = _extract(index, qid, u, w)
                con = build_symmetric_cut(instance, reach, li, witness, variant="lifted")
            violation = check_violation(con, values)
            assert violation > 0, f"unviolated separation output: {con.format()}"
            report._add(con)
        elif lv is not None:
            # w carries no flow: mirror single-node cut.
            con = build_single_node_cut(instance, reach, li, "into_w")
            assert check_violation(con, values) > 0
            report._add(con)
    return report
