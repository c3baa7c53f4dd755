"""Three engines, one scenario: exact chain, brute force, Monte Carlo.

The analytical engine builds the slot-transition matrix and solves its
stationary distribution; the oracle re-derives the same matrix by walking
every joint slot event; the simulator plays the protocol slot by slot.
All three have to land on the same throughput.
"""

import numpy as np

from osabond import (
    analyze,
    oracle_transition_matrix,
    run,
    small_scenario,
    solve_steady_state,
    throughput,
)


def main():
    cfg = small_scenario(pu_activity=0.1, max_bond=2)
    print(f"scenario: M={cfg.num_data_channels}, N={cfg.num_users}, "
          f"K={cfg.max_bond}, q_p={cfg.pu_activity}")

    res = analyze(cfg)
    print(f"\nanalysis:  {len(res.space)} states, "
          f"R = {res.throughput_bps / 1e3:.2f} kb/s, U = {res.utilization:.4f}")

    reference = oracle_transition_matrix(cfg, res.space)
    diff = np.abs(res.matrix - reference).max()
    oracle_r = throughput(solve_steady_state(reference), res.space, cfg)
    print(f"oracle:    max matrix deviation {diff:.2e}, "
          f"R = {oracle_r / 1e3:.2f} kb/s")

    rep = run(cfg, slots=500_000, seed=7)
    rel = abs(rep.throughput_bps - res.throughput_bps) / res.throughput_bps
    print(f"simulator: R = {rep.throughput_bps / 1e3:.2f} "
          f"± {rep.throughput_ci / 1e3:.2f} kb/s  "
          f"({rel * 100:.2f}% from analysis)")
    print(f"           utilization {rep.utilization:.4f}, "
          f"fairness {rep.fairness:.4f}")


if __name__ == "__main__":
    main()
