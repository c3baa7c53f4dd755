"""Adaptive bond-order selection.

For a sequence of stationary activity intervals, picks per interval the
bond order whose analytical throughput is largest, subject to a cap on the
order and to network-wide detector requirements.  The feasible set is a
handful of small integers, so the search is exhaustive; ties break toward
the smaller order, which keeps admission capacity.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chain import analyze
from .config import BondingPolicy, ScenarioConfig
from .errors import ConstraintError


@dataclass(frozen=True)
class BondSchedule:
    """Chosen bond order per activity interval, with the binding constraints."""

    segments: tuple[tuple[float, int], ...]   # (pu_activity, bond order)
    max_bond: int
    required_detect_prob: float
    required_false_alarm: float

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(order for _, order in self.segments)

    def as_policy(self, base_mode: str = "flexible") -> BondingPolicy:
        """Bonding policy the simulator can play directly."""
        return BondingPolicy("adaptive", self.segments, base_mode)


def optimize_schedule(base_cfg: ScenarioConfig, activity_levels,
                      max_bond: int | None = None,
                      required_detect_prob: float = 0.9,
                      required_false_alarm: float = 0.1) -> BondSchedule:
    """Throughput-maximizing bond order for each activity level.

    Evaluates the analytical throughput for every order 1..max_bond at every
    level and keeps the argmax (smallest order on ties).  The scenario's
    detector must already meet the network-wide requirements
    p_d >= required_detect_prob and p_f <= required_false_alarm.
    """
    k_max = base_cfg.max_bond if max_bond is None else max_bond
    if not 1 <= k_max <= base_cfg.num_data_channels:
        raise ConstraintError("bond-order cap must satisfy 1 <= K_max <= M")
    if base_cfg.detect_prob < required_detect_prob:
        raise ConstraintError(
            f"detector p_d={base_cfg.detect_prob} below required "
            f"{required_detect_prob}"
        )
    if base_cfg.false_alarm_prob > required_false_alarm:
        raise ConstraintError(
            f"detector p_f={base_cfg.false_alarm_prob} above allowed "
            f"{required_false_alarm}"
        )
    segments = []
    for level in activity_levels:
        best_order, best_rate = 0, -1.0
        for order in range(1, k_max + 1):
            cfg = base_cfg.with_overrides(
                pu_activity=level,
                max_bond=order,
                bonding=BondingPolicy("flexible"),
            )
            rate = analyze(cfg).throughput_bps
            if rate > best_rate + 1e-9 * max(abs(best_rate), 1.0):
                best_order, best_rate = order, rate
        segments.append((float(level), best_order))
    return BondSchedule(
        segments=tuple(segments),
        max_bond=k_max,
        required_detect_prob=required_detect_prob,
        required_false_alarm=required_false_alarm,
    )
