"""Canonical scenarios and the preset experiment sweeps.

The two reference networks: a small one (4 data channels, 12 nodes, 5 kB
frames) and a large one (12 channels, 40 nodes, 20 kB frames); both use a
1 ms slot with 0.1 ms sensing, 200 kb/s channels, access probability
e^-1/N, and a detector operating at p_d = 0.9, p_f = 0.02.  Presets fig1 -
fig8 reproduce the standard experiment grids over these networks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import (
    BondingPolicy,
    DetectorMeta,
    Disruption,
    Penalty,
    PriorityScheme,
    PuTraffic,
    ScenarioConfig,
)

_DETECTOR = DetectorMeta(bandwidth_hz=200e3, snr_db=0.0, threshold_db=17.8)


def small_scenario(**overrides) -> ScenarioConfig:
    """4 channels, 12 nodes, 5 kB frames."""
    base = ScenarioConfig(
        num_users=12,
        num_data_channels=4,
        max_bond=2,
        access_prob=math.exp(-1) / 12,
        slot_seconds=1e-3,
        sensing_seconds=1e-4,
        channel_rate_bps=200e3,
        frame_bits=40_000,
        pu_activity=0.1,
        detect_prob=0.9,
        false_alarm_prob=0.02,
        detector_meta=_DETECTOR,
    )
    return base.with_overrides(**overrides) if overrides else base


def large_scenario(**overrides) -> ScenarioConfig:
    """12 channels, 40 nodes, 20 kB frames."""
    base = ScenarioConfig(
        num_users=40,
        num_data_channels=12,
        max_bond=2,
        access_prob=math.exp(-1) / 40,
        slot_seconds=1e-3,
        sensing_seconds=1e-4,
        channel_rate_bps=200e3,
        frame_bits=160_000,
        pu_activity=0.1,
        detect_prob=0.9,
        false_alarm_prob=0.02,
        detector_meta=_DETECTOR,
    )
    return base.with_overrides(**overrides) if overrides else base


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: a parameter grid crossed with labeled variants."""

    base: ScenarioConfig
    param: str                      # ScenarioConfig field, dotted for subfields
    values: tuple
    variants: tuple = (("", {}, ("analysis",)),)   # (label, overrides, engines)
    slots: int = 200_000
    seed: int = 1
    reps: int = 1
    preset: str = ""
    coupled: object = None          # optional callable value -> extra overrides

    def points(self):
        for label, overrides, engines in self.variants:
            for value in self.values:
                yield label, overrides, engines, value


def _grid(start: float, stop: float, step: float) -> tuple:
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


def _fig1(base: ScenarioConfig, name: str) -> SweepSpec:
    variants = []
    for k in (1, 2, 3):
        variants.append((f"analysis K={k}", {"max_bond": k}, ("analysis",)))
        variants.append((f"flexible K={k}", {"max_bond": k}, ("sim",)))
    for k in (2, 3):
        variants.append((
            f"k_only K={k}",
            {"max_bond": k, "bonding": BondingPolicy("k_only")},
            ("sim",),
        ))
    return SweepSpec(base=base, param="pu_activity", values=_grid(0.0, 0.9, 0.05),
                     variants=tuple(variants), preset=name)


def _fig2() -> SweepSpec:
    base = small_scenario(frame_bits=8_000, slot_seconds=2e-3, sensing_seconds=1e-4)
    variants = []
    for m, qp in ((4, 0.1), (8, 0.05)):
        for slot in (2e-3, 5e-3):
            for k in (1, 2, 3):
                variants.append((
                    f"M={m} T={slot * 1e3:g}ms K={k}",
                    {"num_data_channels": m, "pu_activity": qp,
                     "slot_seconds": slot, "max_bond": k},
                    ("analysis", "sim"),
                ))
    return SweepSpec(
        base=base, param="num_users",
        values=tuple(range(4, 41, 4)),
        variants=tuple(variants), preset="fig2",
        coupled=lambda n: {"access_prob": math.exp(-1) / n},
    )


def _fig3_frames(base: ScenarioConfig, name: str) -> SweepSpec:
    values = tuple(int(kb * 8000) for kb in (1, 2, 4, 6, 8, 12, 16, 20, 30, 40))
    variants = [("K=1 a=0", {"max_bond": 1}, ("analysis", "sim"))]
    for k in (2, 3):
        for a in (0.0, 0.1, 0.5):
            variants.append((
                f"K={k} a={a:g}",
                {"max_bond": k, "penalty": Penalty.power_law(a)},
                ("analysis", "sim"),
            ))
    return SweepSpec(base=base.with_overrides(pu_activity=0.1),
                     param="frame_bits", values=values,
                     variants=tuple(variants), preset=name)


def _fig3_penalty() -> SweepSpec:
    base = small_scenario(frame_bits=8_000, slot_seconds=2e-3,
                          penalty=Penalty.power_law(0.0))
    variants = []
    for m, n in ((4, 12), (8, 24)):
        for qp in (0.05, 0.1):
            for k in (1, 2, 3):
                variants.append((
                    f"M={m} qp={qp:g} K={k}",
                    {"num_data_channels": m, "num_users": n,
                     "access_prob": math.exp(-1) / n,
                     "pu_activity": qp, "max_bond": k},
                    ("analysis",),
                ))
    return SweepSpec(base=base, param="penalty.exponent",
                     values=_grid(0.0, 0.1, 0.01),
                     variants=tuple(variants), preset="fig3cd")


def _fig4() -> SweepSpec:
    base = small_scenario()
    variants = []
    for strategy in ("drop", "switch"):
        disruption = (Disruption("drop") if strategy == "drop"
                      else Disruption("switch", 100e-6))
        for qp, d_kb in ((0.1, 5), (0.3, 20)):
            for k in (1, 2, 3):
                variants.append((
                    f"{strategy} qp={qp:g} d={d_kb}kB K={k}",
                    {"disruption": disruption, "pu_activity": qp,
                     "frame_bits": d_kb * 8000, "max_bond": k},
                    ("sim",),
                ))
    return SweepSpec(
        base=base, param="num_data_channels",
        values=(2, 4, 6, 8, 10, 12),
        variants=tuple(variants), preset="fig4",
        coupled=lambda m: {"num_users": 2 * m,
                           "access_prob": math.exp(-1) / (2 * m)},
    )


def _fig5() -> SweepSpec:
    variants = []
    for name, base_fn in (("small", small_scenario), ("large", large_scenario)):
        for selection in ("random", "least_used"):
            for k in (1, 2, 3):
                variants.append((
                    f"{name} {selection} K={k}",
                    {"num_users": base_fn().num_users,
                     "num_data_channels": base_fn().num_data_channels,
                     "frame_bits": base_fn().frame_bits,
                     "access_prob": base_fn().access_prob,
                     "selection": selection, "max_bond": k},
                    ("sim",),
                ))
    return SweepSpec(base=small_scenario(pu_activity=0.2),
                     param="pu_traffic.imbalance",
                     values=_grid(0.0, 3.0, 0.5),
                     variants=tuple(variants), preset="fig5")


def _fig6() -> SweepSpec:
    base = small_scenario(pu_activity=0.05,
                          priority=PriorityScheme(high_prob=0.0, buffer_size=2))
    variants = []
    for buffer in (2, 4):
        for k in (1, 2, 4):
            variants.append((
                f"B={buffer} K={k}",
                {"max_bond": k,
                 "priority": PriorityScheme(high_prob=0.0, buffer_size=buffer)},
                ("sim",),
            ))
    return SweepSpec(base=base, param="priority.high_prob",
                     values=_grid(0.0, 1.0, 0.1),
                     variants=tuple(variants), preset="fig6", slots=400_000)


def _fig7() -> SweepSpec:
    schedules = {
        "{3,2,1}": ((0.0, 3), (0.05, 2), (0.1, 1)),
        "{3,3,3}": ((0.0, 3), (0.05, 3), (0.1, 3)),
        "{1,1,1}": ((0.0, 1), (0.05, 1), (0.1, 1)),
    }
    variants = []
    for name, base_fn in (("small", small_scenario), ("large", large_scenario)):
        ref = base_fn()
        for sched_name, segments in schedules.items():
            for mode in ("flexible", "k_only"):
                variants.append((
                    f"{name} {sched_name} {mode}",
                    {"num_users": ref.num_users,
                     "num_data_channels": ref.num_data_channels,
                     "access_prob": ref.access_prob,
                     "max_bond": 3,
                     "bonding": BondingPolicy("adaptive", segments, mode)},
                    ("sim",),
                ))
    values = tuple(int(kb * 8000) for kb in (1, 2, 5, 10, 20, 40))
    return SweepSpec(base=small_scenario(), param="frame_bits", values=values,
                     variants=tuple(variants), preset="fig7")


def _fig8() -> SweepSpec:
    combos = {"EE": ("geometric", "geometric"), "EL": ("geometric", "lognormal"),
              "LE": ("lognormal", "geometric"), "LL": ("lognormal", "lognormal")}
    variants = []
    for name, base_fn in (("small", small_scenario), ("large", large_scenario)):
        ref = base_fn()
        for combo, (off, on) in combos.items():
            for k in (2, 3):
                variants.append((
                    f"{name} {combo} K={k}",
                    {"num_users": ref.num_users,
                     "num_data_channels": ref.num_data_channels,
                     "frame_bits": ref.frame_bits,
                     "access_prob": ref.access_prob,
                     "max_bond": k,
                     "pu_traffic": PuTraffic("runs", off_dist=off, on_dist=on)},
                    ("sim",),
                ))
    return SweepSpec(base=small_scenario(), param="pu_activity",
                     values=(0.1, 0.2, 0.3), variants=tuple(variants),
                     preset="fig8", slots=400_000)


def build_preset(name: str) -> SweepSpec:
    """Instantiate a preset sweep by name (see PRESETS)."""
    builders = {
        "fig1a": lambda: _fig1(small_scenario(), "fig1a"),
        "fig1b": lambda: _fig1(large_scenario(), "fig1b"),
        "fig2": _fig2,
        "fig3a": lambda: _fig3_frames(small_scenario(), "fig3a"),
        "fig3b": lambda: _fig3_frames(large_scenario(), "fig3b"),
        "fig3cd": _fig3_penalty,
        "fig4": _fig4,
        "fig5": _fig5,
        "fig6": _fig6,
        "fig7": _fig7,
        "fig8": _fig8,
    }
    if name not in builders:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(builders)}")
    return builders[name]()


PRESETS = ("fig1a", "fig1b", "fig2", "fig3a", "fig3b", "fig3cd", "fig4",
           "fig5", "fig6", "fig7", "fig8")
