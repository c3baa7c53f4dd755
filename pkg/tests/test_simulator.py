"""Monte Carlo engine: determinism, conservation, protocol variants."""

import dataclasses
import math

import numpy as np
import pytest

from osabond import (
    ScenarioConfig,
    UndefinedMetricError,
    analyze,
    fairness_index,
    run,
    run_schedule,
)
from osabond.config import (
    BondingPolicy,
    Disruption,
    PriorityScheme,
    PuTraffic,
)
from osabond.presets import small_scenario


def test_fairness_examples():
    assert fairness_index([5, 5, 5, 5]) == 1.0
    assert fairness_index([7, 0, 0, 0]) == pytest.approx(1 / 4)
    assert fairness_index([1, 2, 3]) == pytest.approx(36 / 42)
    with pytest.raises(UndefinedMetricError):
        fairness_index([0, 0, 0])


def test_seed_determinism_bit_exact():
    cfg = small_scenario(pu_activity=0.1)
    a = run(cfg, 30_000, seed=123)
    b = run(cfg, 30_000, seed=123)
    assert dataclasses.astuple(a) == dataclasses.astuple(b)
    c = run(cfg, 30_000, seed=124)
    assert c.throughput_bps != a.throughput_bps


def test_trace_replay_identical():
    cfg = small_scenario(pu_activity=0.2, max_bond=2)
    a = run(cfg, 5_000, seed=9, trace_slots=5_000)
    b = run(cfg, 5_000, seed=9, trace_slots=5_000)
    for field in ("pu_bits", "observed_bits", "preemptions", "completions",
                  "admission_codes"):
        assert np.array_equal(getattr(a.trace, field), getattr(b.trace, field))


def test_trace_write(tmp_path):
    cfg = small_scenario()
    rep = run(cfg, 2_000, seed=1, trace_slots=100)
    path = tmp_path / "trace.csv"
    rep.trace.write(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("slot,")
    assert len(lines) == 101


def test_invariants_hold_under_stress():
    # switching + priorities + imbalance + least-used, checked every slot
    cfg = small_scenario(
        pu_activity=0.3, max_bond=2,
        disruption=Disruption("switch", 100e-6),
        selection="least_used",
        priority=PriorityScheme(high_prob=0.5, buffer_size=3),
        pu_traffic=PuTraffic("iid", imbalance=1.0),
    )
    run(cfg, 50_000, seed=3, check_invariants=True)   # raises on violation


def test_always_preempted_means_zero_throughput():
    cfg = small_scenario(pu_activity=1.0, detect_prob=1.0)
    rep = run(cfg, 20_000, seed=2)
    assert rep.throughput_bps == 0.0
    assert rep.fairness is None


def test_perfect_detection_never_collides():
    cfg = small_scenario(pu_activity=0.4, detect_prob=1.0, false_alarm_prob=0.0)
    rep = run(cfg, 100_000, seed=4)
    assert rep.collision_prob == 0.0
    assert rep.throughput_bps > 0.0


def test_matches_analysis():
    cfg = small_scenario(pu_activity=0.1, max_bond=2)
    expected = analyze(cfg).throughput_bps
    rep = run(cfg, 300_000, seed=6)
    assert abs(rep.throughput_bps - expected) / expected < 0.03


def test_throughput_bounded():
    cfg = small_scenario(pu_activity=0.0)
    rep = run(cfg, 50_000, seed=8)
    assert rep.throughput_bps <= 200e3 * 4 * 0.9
    assert 0.0 <= rep.utilization <= 0.9


def test_k_only_blocks_partial_bonds():
    # K-only with K = M: a bond exists only when everything is free, so the
    # occupancy code never shows partial states
    cfg = small_scenario(max_bond=4, bonding=BondingPolicy("k_only"),
                         pu_activity=0.1)
    rep = run(cfg, 100_000, seed=5, visit_stride=7)
    for state in rep.state_visits:
        assert state[:3] == (0, 0, 0)


def test_priority_endpoints_match_unbuffered():
    base = small_scenario(pu_activity=0.05, max_bond=1)
    plain = run(base, 300_000, seed=10)
    for p_h in (0.0, 1.0):
        cfg = base.with_overrides(priority=PriorityScheme(p_h, buffer_size=4))
        rep = run(cfg, 300_000, seed=10)
        assert rep.buffered_fraction == 0.0
        assert rep.mean_wait_slots is None
        margin = 3 * math.hypot(rep.throughput_ci, plain.throughput_ci)
        assert abs(rep.throughput_bps - plain.throughput_bps) <= margin


def test_priority_midpoint_buffers():
    cfg = small_scenario(pu_activity=0.05, max_bond=1,
                         priority=PriorityScheme(0.5, buffer_size=4))
    rep = run(cfg, 300_000, seed=11)
    assert rep.buffered_fraction > 0.0
    assert rep.mean_wait_slots is not None and rep.mean_wait_slots > 1.0


def test_least_used_matches_random_under_uniform_activity():
    base = small_scenario(pu_activity=0.15, max_bond=2)
    random_rep = run(base, 400_000, seed=12)
    least = run(base.with_overrides(selection="least_used"), 400_000, seed=13)
    margin = 3 * math.hypot(random_rep.throughput_ci, least.throughput_ci)
    assert abs(random_rep.throughput_bps - least.throughput_bps) <= margin


def test_least_used_prefers_quiet_channels():
    cfg = small_scenario(pu_activity=0.3, max_bond=1, selection="least_used",
                         pu_traffic=PuTraffic("iid", imbalance=2.0))
    rep = run(cfg, 200_000, seed=14)
    usage = rep.channel_usage
    assert usage[0] > usage[-1]          # channel 1 is the quietest
    uniform = run(cfg.with_overrides(selection="random"), 200_000, seed=14)
    assert rep.throughput_bps > uniform.throughput_bps
    assert rep.fairness < uniform.fairness


def test_run_mode_memoryless_duty_cycle():
    # geometric on/off runs with the duty-cycle calibration reproduce q_p
    cfg = small_scenario(pu_activity=0.2, pu_traffic=PuTraffic("runs"))
    rep = run(cfg, 200_000, seed=15, trace_slots=200_000)
    busy = sum(bin(b).count("1") for b in rep.trace.pu_bits)
    fraction = busy / (200_000 * 4)
    assert abs(fraction - 0.2) < 0.01 * 2


def test_heavy_tailed_runs_hold_duty_cycle():
    cfg = small_scenario(
        pu_activity=0.1,
        pu_traffic=PuTraffic("runs", off_dist="lognormal", on_dist="lognormal"),
    )
    rep = run(cfg, 400_000, seed=16, trace_slots=400_000)
    busy = sum(bin(b).count("1") for b in rep.trace.pu_bits)
    fraction = busy / (400_000 * 4)
    # short busy runs are clamped at one slot, biasing the duty cycle up a bit
    assert abs(fraction - 0.1) < 0.015


def test_switch_outperforms_drop():
    base = small_scenario(pu_activity=0.3, max_bond=1, frame_bits=160_000)
    drop = run(base, 200_000, seed=17)
    switch = run(base.with_overrides(disruption=Disruption("switch", 100e-6)),
                 200_000, seed=17)
    assert switch.throughput_bps > 2 * drop.throughput_bps
    assert switch.collision_prob > 2 * drop.collision_prob


def test_switch_with_scarce_channels_drops():
    # K = M: relocation can never find a fresh full-width bond
    cfg = small_scenario(num_data_channels=2, max_bond=2, pu_activity=0.4,
                         disruption=Disruption("switch", 100e-6))
    rep = run(cfg, 100_000, seed=18, check_invariants=True)
    assert rep.throughput_bps > 0.0


def test_lifetimes_geometric_mean():
    # drop strategy, no occupancy, no false alarms: pure geometric frames
    cfg = small_scenario(num_data_channels=1, max_bond=1, num_users=4,
                         access_prob=math.exp(-1) / 4,
                         pu_activity=0.0, false_alarm_prob=0.0,
                         frame_bits=1_800)  # q(1) = 0.1
    rep = run(cfg, 400_000, seed=19, max_lifetimes=20_000)
    lifetimes = rep.lifetimes
    assert len(lifetimes) > 5_000
    assert abs(lifetimes.mean() - 10.0) / 10.0 < 0.05


def test_adaptive_schedule_merges_segments():
    levels = (0.0, 0.05, 0.1)
    cfg = small_scenario(
        max_bond=3,
        bonding=BondingPolicy("adaptive", tuple((qp, 1) for qp in levels)),
    )
    merged = run(cfg, 90_000, seed=20)
    assert merged.slots == 90_000
    # an all-ones schedule averages the plain K=1 protocol over the levels
    parts = [run(small_scenario(max_bond=1, pu_activity=qp), 30_000, seed=21 + i)
             for i, qp in enumerate(levels)]
    expected = sum(p.throughput_bps for p in parts) / len(parts)
    margin = 4 * math.sqrt(sum(p.throughput_ci**2 for p in parts)) / len(parts)
    assert abs(merged.throughput_bps - expected) <= margin + 4 * merged.throughput_ci


def test_run_schedule_reports_segments():
    cfg = small_scenario(max_bond=3)
    merged, parts = run_schedule(cfg, ((0.0, 3), (0.1, 1)), 40_000, seed=22)
    assert len(parts) == 2
    assert merged.throughput_bps == pytest.approx(
        (parts[0].throughput_bps + parts[1].throughput_bps) / 2
    )


def test_rejects_short_runs():
    from osabond.errors import ConfigError
    with pytest.raises(ConfigError):
        run(small_scenario(), 500, seed=1)


def test_state_visits_match_stationary_distribution():
    # thinned state samples against the analytical distribution, chi-square
    # at 1% significance (stride 400 sits well past the frame correlation)
    from scipy import stats

    cfg = small_scenario(pu_activity=0.1, max_bond=2)
    res = analyze(cfg)
    rep = run(cfg, 2_000_000, seed=81, visit_stride=400)
    n = sum(rep.state_visits.values())
    observed = np.array([rep.state_visits.get(s, 0) for s in res.space.states],
                        dtype=float)
    expected = n * res.pi
    keep = expected >= 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    chi2 = float(((obs - exp) ** 2 / exp).sum())
    dof = len(exp) - 1
    assert chi2 < stats.chi2.ppf(0.99, dof)
