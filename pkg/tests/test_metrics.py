"""Metric oracles: every value here is hand-computed from the definitions."""

import math

import numpy as np
import pytest

from v2xloop.metrics import (EpisodeMetrics, MetricParams, aggregate,
                             brake_energy, clear_mot, command_variance,
                             gate_rates, heading_stats, lateral_rmse,
                             objective_vector, v2x_reaction_ms)

P = MetricParams()


# ---------------------------------------------------------------------------
# scalar reductions


def test_lateral_rmse_oracle():
    # sqrt((9 + 16 + 0) / 3) = sqrt(25/3)
    assert lateral_rmse([3.0, -4.0, 0.0]) == pytest.approx(math.sqrt(25.0 / 3.0))
    assert lateral_rmse([]) == 0.0


def test_heading_stats_oracle():
    errs = [math.radians(3.0), math.radians(-4.0)]
    rmse, mean_abs = heading_stats(errs)
    assert rmse == pytest.approx(math.sqrt((9.0 + 16.0) / 2.0))
    assert mean_abs == pytest.approx(3.5)
    assert heading_stats([]) == (0.0, 0.0)


def test_command_variance_oracle():
    # population variance of [0, 1]: mean 0.5, var 0.25
    assert command_variance([0.0, 1.0]) == pytest.approx(0.25)
    assert command_variance([0.7] * 10) == 0.0
    assert command_variance([]) == 0.0


def test_brake_energy_oracle():
    # sum(b * v) * dt = (0.5*10 + 1.0*8 + 0*6) * 0.05 = 13 * 0.05
    assert brake_energy([0.5, 1.0, 0.0], [10.0, 8.0, 6.0], 0.05) == \
        pytest.approx(0.65)
    assert brake_energy([], [], 0.05) == 0.0


# ---------------------------------------------------------------------------
# reaction timing


def _rows(specs):
    # (t, steering, throttle, brake)
    return [(t, s, th, b) for t, s, th, b in specs]


def test_reaction_first_brake_after_event():
    rows = _rows([(0.9, 0.0, 0.5, 0.0),
                  (1.0, 0.0, 0.5, 0.0),
                  (1.05, 0.0, 0.5, 0.05),   # below brake threshold
                  (1.15, 0.0, 0.0, 0.4)])
    assert v2x_reaction_ms(1.0, rows, P) == pytest.approx(150.0)


def test_reaction_steer_jump_counts():
    rows = _rows([(1.0, 0.00, 0.5, 0.0),
                  (1.05, 0.02, 0.5, 0.0),   # jump 0.02 < threshold 0.05
                  (1.10, 0.10, 0.5, 0.0)])  # jump 0.08 > threshold
    assert v2x_reaction_ms(1.0, rows, P) == pytest.approx(100.0)


def test_reaction_rows_at_event_time_excluded():
    # braking at exactly the generation time is not a reaction to it
    rows = _rows([(1.0, 0.0, 0.0, 0.9), (1.05, 0.0, 0.0, 0.9)])
    assert v2x_reaction_ms(1.0, rows, P) == pytest.approx(50.0)


def test_reaction_none_without_response():
    rows = _rows([(1.05, 0.0, 0.5, 0.0), (1.10, 0.0, 0.5, 0.0)])
    assert v2x_reaction_ms(1.0, rows, P) is None


# ---------------------------------------------------------------------------
# multi-object tracking score


def _gt_static(ticks, objs):
    return {k: [(oid, x, y) for oid, x, y in objs] for k in ticks}


def test_mot_perfect_tracking():
    ticks = range(10)
    gt = _gt_static(ticks, [("a", 10.0, 0.0)])
    tr = _gt_static(ticks, [("T1", 10.0, 0.0)])
    mota, motp, idsw = clear_mot(gt, tr, match_radius=2.0)
    assert mota == 1.0
    assert motp == 1.0
    assert idsw == 0


def test_mot_hand_computed_mixed_log():
    """10 ticks, one object: 1 miss + 1 false positive + 1 id switch.

    MOTA = 1 - (1 + 1 + 1) / 10 = 0.7; matched distance is 0.5 on all 9
    matched ticks, so MOTP = 1 - 0.5 / 2.0 = 0.75.
    """
    gt = _gt_static(range(10), [("a", 10.0, 0.0)])
    tr = {}
    for k in range(10):
        if k == 3:
            tr[k] = []                               # miss
        elif k < 6:
            tr[k] = [("T1", 10.5, 0.0)]
        else:
            tr[k] = [("T2", 10.5, 0.0)]              # switch at k=6
    tr[8] = tr[8] + [("T9", 50.0, 0.0)]              # false positive
    mota, motp, idsw = clear_mot(gt, tr, match_radius=2.0)
    assert idsw == 1
    assert mota == pytest.approx(0.7)
    assert motp == pytest.approx(0.75)


def test_mot_persistence_preferred_over_distance():
    # T1 matched at tick 0; at tick 1 a closer stranger appears, but the
    # persistent pair survives and the stranger books a false positive
    gt = {0: [("a", 10.0, 0.0)], 1: [("a", 10.0, 0.0)]}
    tr = {0: [("T1", 10.5, 0.0)],
          1: [("T1", 11.0, 0.0), ("T2", 10.1, 0.0)]}
    mota, _, idsw = clear_mot(gt, tr, match_radius=2.0)
    assert idsw == 0
    assert mota == pytest.approx(1.0 - 1.0 / 2.0)    # the lone FP


def test_mot_no_ground_truth():
    assert clear_mot({}, {0: [("T1", 0.0, 0.0)]}, 2.0) == (None, None, 0)


def test_mot_unmatched_out_of_radius():
    gt = _gt_static(range(4), [("a", 10.0, 0.0)])
    tr = _gt_static(range(4), [("T1", 20.0, 0.0)])
    mota, motp, _ = clear_mot(gt, tr, 2.0)
    # every tick: one miss and one false positive
    assert mota == pytest.approx(1.0 - 8.0 / 4.0)
    assert motp is None


# ---------------------------------------------------------------------------
# gate rates


def test_gate_rates_mixed():
    rows = [("E1", True, True), ("E2", False, False), ("E3", False, True)]
    fpr, fnr = gate_rates(rows)
    assert fpr == pytest.approx(0.5)
    assert fnr == 0.0


def test_gate_rates_missed_true_event():
    fpr, fnr = gate_rates([("E1", True, False)])
    assert fpr is None
    assert fnr == 1.0


def test_gate_rates_empty_classes():
    assert gate_rates([]) == (None, None)
    fpr, fnr = gate_rates([("E1", False, False)])
    assert fpr == 0.0
    assert fnr is None


# ---------------------------------------------------------------------------
# objective vector


def _metrics(**kw):
    base = dict(lateral_rmse=0.2, heading_rmse_deg=1.0, heading_mean_abs_deg=0.8,
                completion=True, progress_fraction=1.0, ttc_min=1.3,
                collisions=0, v2x_reaction_ms=150.0, update_activation_s=0.9,
                trigger_latency_ms=300.0, steer_variance=0.01,
                throttle_variance=0.02, brake_energy=4.0, mota=0.9, motp=0.8,
                id_switches=0, false_positive_rate=0.0, false_negative_rate=0.0,
                termination="goal", sim_time=30.0)
    base.update(kw)
    return EpisodeMetrics(**base)


def test_objective_vector_oracle():
    j = objective_vector(_metrics(), P)
    assert j[0] == pytest.approx(0.2)
    assert j[1] == pytest.approx(2.0 - 1.3)          # tau_safety - ttc
    assert j[2] == pytest.approx(0.15 + 0.9)         # alpha*react + beta*act
    assert j[3] == pytest.approx(0.01 + 0.02)
    assert j[4] == pytest.approx(4.0)


def test_objective_vector_censored_ttc_and_missing_responses():
    j = objective_vector(_metrics(ttc_min=math.inf, v2x_reaction_ms=None,
                                  update_activation_s=None), P)
    assert j[1] == 0.0                               # no observed risk
    assert j[2] == 0.0                               # nothing to respond to
    ttc_above = objective_vector(_metrics(ttc_min=5.0), P)
    assert ttc_above[1] == 0.0                       # clamped at tau_safety


# ---------------------------------------------------------------------------
# aggregation


def test_aggregate_means_and_censoring():
    ms = [_metrics(lateral_rmse=0.1, ttc_min=1.0),
          _metrics(lateral_rmse=0.3, ttc_min=math.inf)]
    out = aggregate(ms)
    assert out["episodes"] == 2
    assert out["lateral_rmse"]["mean"] == pytest.approx(0.2)
    assert out["lateral_rmse"]["sd"] == pytest.approx(np.std([0.1, 0.3], ddof=1))
    assert out["ttc_min"]["mean"] == pytest.approx(1.0)   # censored excluded
    assert out["ttc_min"]["censored"] == 1


def test_aggregate_empty():
    assert aggregate([]) == {"episodes": 0}
