"""How primary-user activity erodes the bonding gain.

Sweeps the per-channel activity level for bond orders 1..3 on both
reference networks.  In the small network the non-bonded MAC wins
throughout; the large network rewards bonding only while the channels are
mostly quiet.  Writes activity_sweep.png next to this script.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from osabond import analyze, large_scenario, run, small_scenario

ACTIVITY = np.arange(0.0, 0.91, 0.05)


def curves(base, slots):
    analytical = {}
    simulated = {}
    for k in (1, 2, 3):
        analytical[k] = [
            analyze(base.with_overrides(pu_activity=qp, max_bond=k)).throughput_bps
            for qp in ACTIVITY
        ]
        simulated[k] = [
            run(base.with_overrides(pu_activity=qp, max_bond=k),
                slots, seed=100 + k).throughput_bps
            for qp in ACTIVITY[::3]
        ]
    return analytical, simulated


def main():
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    for ax, (name, base) in zip(
        axes, (("small network", small_scenario()),
               ("large network", large_scenario())),
    ):
        analytical, simulated = curves(base, slots=100_000)
        for k, style in ((1, "-"), (2, "--"), (3, ":")):
            ax.plot(ACTIVITY, np.array(analytical[k]) / 1e3, style,
                    label=f"K={k} (chain)")
            ax.plot(ACTIVITY[::3], np.array(simulated[k]) / 1e3, "o",
                    markersize=3)
        ax.set_title(name)
        ax.set_xlabel("per-channel activity $q_p$")
        ax.set_ylabel("throughput (kb/s)")
        ax.legend()
    fig.tight_layout()
    out = pathlib.Path(__file__).with_name("activity_sweep.png")
    fig.savefig(out, dpi=120)
    print(f"wrote {out}")
    for name, base in (("small", small_scenario()), ("large", large_scenario())):
        r1, r2 = (analyze(base.with_overrides(pu_activity=0.02,
                                              max_bond=k)).throughput_bps
                  for k in (1, 2))
        gain = (r2 / r1 - 1) * 100
        print(f"{name}: pair bonding at q_p=0.02 changes throughput by "
              f"{gain:+.1f}%")


if __name__ == "__main__":
    main()
