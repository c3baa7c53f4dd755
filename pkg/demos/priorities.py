"""Two-class traffic: high-priority takeovers and the halt buffer.

A high-priority frame arriving to a fully occupied system displaces a
random regular connection, which waits in a buffer and resumes when
capacity frees up.  Throughput peaks around an even traffic mix and
returns to the bufferless level at both extremes, where displacement is
impossible or pointless.
"""

from osabond import run, small_scenario
from osabond.config import PriorityScheme


def main():
    base = small_scenario(pu_activity=0.05, max_bond=1)
    plain = run(base, 400_000, seed=60)
    print(f"no priorities: R = {plain.throughput_bps / 1e3:.1f} kb/s\n")
    print(f"{'p_h':>4} | {'R kb/s':>7} {'buffered':>9} {'mean wait':>10}")
    for p_h in (0.0, 0.25, 0.5, 0.75, 1.0):
        cfg = base.with_overrides(priority=PriorityScheme(p_h, buffer_size=4))
        rep = run(cfg, 400_000, seed=60)
        wait = "-" if rep.mean_wait_slots is None else f"{rep.mean_wait_slots:.2f}"
        print(f"{p_h:>4.2f} | {rep.throughput_bps / 1e3:>7.1f} "
              f"{rep.buffered_fraction:>9.4f} {wait:>10}")


if __name__ == "__main__":
    main()
