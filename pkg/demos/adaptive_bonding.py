"""Per-interval bond-order optimization.

For a staircase of activity levels the optimizer picks, per interval, the
bond order whose analytical throughput is largest, and the simulator plays
the resulting schedule against fixed all-high and all-low schedules.
"""

from osabond import large_scenario, optimize_schedule, run_schedule, small_scenario


def main():
    levels = (0.0, 0.05, 0.1)
    for name, base in (("small", small_scenario(max_bond=3)),
                       ("large", large_scenario(max_bond=3))):
        schedule = optimize_schedule(base, levels, max_bond=3)
        print(f"{name} network: optimizer picks orders {schedule.orders} "
              f"for levels {levels}")

    base = large_scenario(max_bond=3)
    candidates = {
        "optimized": tuple(zip(levels, optimize_schedule(base, levels,
                                                         max_bond=3).orders)),
        "always 3": tuple((qp, 3) for qp in levels),
        "always 1": tuple((qp, 1) for qp in levels),
    }
    print("\nlarge network, simulated over the activity staircase:")
    for name, segments in candidates.items():
        merged, _ = run_schedule(base, segments, 200_000, seed=30)
        print(f"  {name:>10}: R = {merged.throughput_bps / 1e3:7.1f} "
              f"± {merged.throughput_ci / 1e3:.1f} kb/s")


if __name__ == "__main__":
    main()
