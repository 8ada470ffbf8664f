"""Tracking: cost tables, gap bands, objectives, metrics, refinement."""

from __future__ import annotations

import random

import pytest

from generators import interior_punisher_table, planted_sequence
from liftedpaths.tracking import (
    CostTable,
    TrackingConfig,
    detection_objective,
    evaluate_tracking,
    format_tracks,
    parse_costs,
    parse_tracks,
    run_tracking,
    split_track,
)

SCENE = """\
gt 0 0 1
gt 0 1 2
gt 1 0 1
gt 1 1 2
gt 2 0 1
gt 2 1 2
base 0 0 1 0 -1.0
base 1 0 2 0 -1.0
base 0 1 1 1 -1.0
base 1 1 2 1 -1.0
lift 0 0 2 0 -1.0
lift 0 1 2 1 -1.0
base 0 0 1 1 0.5
"""


def test_gap_bands_widen_in_steps():
    cfg = TrackingConfig(fps=5.0)
    assert cfg.max_gap_frames is None
    assert cfg.gap_limit() == 10
    allowed = [g for g in range(1, 15) if cfg.gap_allowed(g)]
    assert allowed == [1, 2, 3, 5, 6, 9]
    narrow = TrackingConfig(fps=5.0, max_gap_frames=6)
    assert [g for g in range(1, 15) if narrow.gap_allowed(g)] == [1, 2, 3, 5, 6]
    wide = TrackingConfig(fps=5.0, max_gap_frames=10)
    assert [g for g in range(1, 15) if wide.gap_allowed(g)] == [1, 2, 3, 5, 6, 9]
    for skipped in (4, 7, 8, 10):
        assert not wide.gap_allowed(skipped)


def test_parse_costs_reads_tables_and_labels():
    table = parse_costs(SCENE)
    assert table.detections == ((0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1))
    assert table.labels[(0, 0)] == 1
    assert table.labels[(2, 1)] == 2
    assert table.base[((0, 0), (1, 0))] == -1.0
    assert table.base[((0, 0), (1, 1))] == 0.5
    assert table.lift[((0, 0), (2, 0))] == -1.0


def test_track_text_round_trip():
    tracks = [((0, 0), (1, 0), (2, 0)), ((0, 1), (2, 1))]
    text = format_tracks(tracks)
    assert text == "track 1: 0:0 1:0 2:0\ntrack 2: 0:1 2:1\n"
    assert parse_tracks(text) == tracks


def test_detection_objective_prices_only_within_tracks():
    table = parse_costs(SCENE)
    both = [((0, 0), (1, 0), (2, 0)), ((0, 1), (1, 1), (2, 1))]
    # four base hops and two lifted pairs, all rewarded; the cross-track
    # base cost of 0.5 must not be charged
    assert detection_objective(table, both, 6) == pytest.approx(-6.0)
    assert detection_objective(table, both[:1], 6) == pytest.approx(-3.0)
    assert detection_objective(table, [], 6) == 0.0


def test_detection_objective_rejects_malformed_tracks():
    table = parse_costs(SCENE)
    with pytest.raises(ValueError, match="appears in two tracks"):
        detection_objective(table, [((0, 0),), ((0, 0), (1, 0))], 6)
    with pytest.raises(ValueError, match="strictly increase"):
        detection_objective(table, [((1, 0), (0, 0))], 6)


def test_metrics_reward_purity_and_count_mistakes():
    table = parse_costs(SCENE)
    both = [((0, 0), (1, 0), (2, 0)), ((0, 1), (1, 1), (2, 1))]
    perfect = evaluate_tracking(table, both)
    assert perfect.idf1 == 1.0
    assert perfect.idp == perfect.idr == 1.0
    assert perfect.mota == 1.0
    assert perfect.false_positives == perfect.misses == 0
    assert perfect.identity_switches == 0

    half = evaluate_tracking(table, both[:1])
    assert half.misses == 3
    assert half.idr == pytest.approx(0.5)

    # tracked clutter counts against precision
    noisy = CostTable(base={}, lift={}, labels={(0, 0): 1, (1, 0): 0})
    swallowed = evaluate_tracking(noisy, [((0, 0), (1, 0))])
    assert swallowed.false_positives == 1
    assert swallowed.idp == pytest.approx(0.5)

    # one object split across two tracks costs an identity switch
    split = CostTable(base={}, lift={}, labels={(0, 0): 1, (1, 0): 1, (2, 0): 1})
    torn = evaluate_tracking(split, [((0, 0), (1, 0)), ((2, 0),)])
    assert torn.identity_switches == 1
    assert torn.idf1 == pytest.approx(0.8)


def test_split_finds_the_interior_cut():
    table, detections = interior_punisher_table()
    pieces = split_track(table, tuple(detections), 6)
    assert pieces == [tuple(detections[:13]), tuple(detections[13:])]


def test_refinement_beats_the_single_track():
    table, detections = interior_punisher_table()
    config = TrackingConfig(fps=5.0, max_gap_frames=6, interval_length=15)
    result = run_tracking(table, config)
    assert result.iterations == 2
    assert result.objective_trace == [pytest.approx(-143.0)] * 2
    assert sorted(result.tracks) == [
        tuple(detections[:13]),
        tuple(detections[13:]),
    ]
    one_track = detection_objective(table, [tuple(detections)], 6)
    assert one_track == pytest.approx(-140.5)
    assert result.objective < one_track
    for before, after in zip(result.objective_trace, result.objective_trace[1:]):
        assert after <= before + 1e-9


def test_short_planted_scene_is_recovered_exactly():
    rng = random.Random(3)
    table = planted_sequence(rng, frames=40)
    config = TrackingConfig(fps=5.0, max_gap_frames=10, interval_length=20)
    result = run_tracking(table, config)
    metrics = evaluate_tracking(table, result.tracks)
    assert metrics.idf1 == 1.0
    assert metrics.misses == 0
    assert metrics.false_positives == 0
    assert result.iterations == 1
    assert len(result.tracks) == 3
    assert result.objective == pytest.approx(-1042.0)
