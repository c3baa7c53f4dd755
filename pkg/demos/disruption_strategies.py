"""Dropping versus switching a disrupted bond.

When a sensed occupancy hits a bond, the baseline strategy tears the frame
down; the switching strategy relocates it to fresh observed-idle channels,
paying the switch delay through a shorter effective frame.  Switching buys
back an order of magnitude in throughput at high activity, at the price of
a visible collision level with the licensed users.
"""

from math import exp

from osabond import run, small_scenario
from osabond.config import Disruption


def main():
    print(f"{'M':>3} {'N':>4} | {'drop R kb/s':>12} {'I':>8} | "
          f"{'switch R kb/s':>13} {'I':>8}")
    for m in (2, 4, 6, 8, 10, 12):
        base = small_scenario(
            num_data_channels=m, num_users=2 * m,
            access_prob=exp(-1) / (2 * m),
            pu_activity=0.3, frame_bits=160_000, max_bond=1,
        )
        drop = run(base, 300_000, seed=40 + m)
        switch = run(
            base.with_overrides(disruption=Disruption("switch", 100e-6)),
            300_000, seed=40 + m,
        )
        print(f"{m:>3} {2 * m:>4} | {drop.throughput_bps / 1e3:>12.1f} "
              f"{drop.collision_prob:>8.4f} | "
              f"{switch.throughput_bps / 1e3:>13.1f} "
              f"{switch.collision_prob:>8.4f}")


if __name__ == "__main__":
    main()
