"""Exact Markov-chain engine for the bonded multichannel MAC.

A state is the occupancy vector x = (x_1, ..., x_K) where x_i counts the
active connections holding i physical channels.  A slot transition applies,
in order:

* frame completions  — each k-bonded connection ends with probability q(k)
  at the end of the slot, freeing its channels;
* detected occupancy — each channel is observed busy with probability q_c at
  the next sensing; a surviving connection with any observed-busy channel is
  torn down (the whole bond dies);
* admission          — when exactly one idle node sent an RTS during the
  slot (and an idle receiver exists), the new connection bonds
  min(available, K) channels — K exactly under k_only bonding — where the
  available pool is every channel not held by a connection during the slot
  plus the channels of the frames that completed at its end.  Channels of
  bonds torn down at this sensing re-enter the pool one slot later.  The
  chosen channels were claimed before the sensing: if any of them now
  observes busy, the entrant is preempted before transmitting anything.

The builder enumerates, per state pair, every split of the lost connections
into completions and preemptions (the Theta combinations) and every
admission fate.  The brute-force event enumeration in :mod:`osabond.oracle`
validates the result entrywise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .config import ScenarioConfig, frame_end_prob, observed_busy_prob
from .errors import CapacityError, ConfigError, ConvergenceError, SingularError

DEFAULT_STATE_CAP = 200_000

# Tolerances for the built artifacts; these are float round-off allowances on
# exact products of probabilities, not modeling slack.
ROW_SUM_TOL = 1e-10
STATIONARY_TOL = 1e-9
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class StateSpace:
    """Ordered enumeration of all reachable occupancy vectors."""

    states: tuple[tuple[int, ...], ...]
    num_channels: int
    max_bond: int
    max_connections: int

    def __post_init__(self):
        object.__setattr__(
            self, "index", {s: i for i, s in enumerate(self.states)}
        )

    def __len__(self) -> int:
        return len(self.states)


def enumerate_states(cfg: ScenarioConfig, cap: int = DEFAULT_STATE_CAP) -> StateSpace:
    """All x with sum(i*x_i) <= M and sum(x_i) <= floor(N/2).

    Ordering: x_1 varies fastest (i.e. lexicographic in (x_K, ..., x_1)),
    which puts the empty state first.
    """
    m, k = cfg.num_data_channels, cfg.max_bond
    max_pairs = cfg.num_users // 2
    states: list[tuple[int, ...]] = []

    # Recurse with x_K as the outermost digit so x_1 varies fastest.
    def descend(order: int, used: int, pairs: int, suffix: tuple[int, ...]):
        if order == 0:
            states.append(suffix)
            if len(states) > cap:
                raise CapacityError(
                    f"state space exceeds cap of {cap} states (M={m}, K={k})"
                )
            return
        limit = min((m - used) // order, max_pairs - pairs)
        for count in range(limit + 1):
            descend(order - 1, used + count * order, pairs + count,
                    (count,) + suffix)

    descend(k, 0, 0, ())
    return StateSpace(tuple(states), m, k, max_pairs)


# ---------------------------------------------------------------------------
# Probability primitives

def arrangement_prob(cfg: ScenarioConfig, active_pairs: int, admitted: int) -> float:
    """Probability that `admitted` new connections clear the control channel.

    With m pairs engaged, the N - 2m idle nodes contend; exactly one RTS
    succeeds:  S_m^(1) = (N - 2m)*p*(1 - p)**(N - 2m - 1), and any other
    outcome is S_m^(0) = 1 - S_m^(1).  At most one admission per slot.
    """
    n_idle = cfg.num_users - 2 * active_pairs
    if n_idle < 0:
        raise ConfigError("more engaged pairs than users")
    p = cfg.access_prob
    if n_idle == 0:
        s1 = 0.0
    else:
        s1 = n_idle * p * (1.0 - p) ** (n_idle - 1)
    return s1 if admitted == 1 else 1.0 - s1


def termination_prob(cfg: ScenarioConfig, connections: int, completions: int,
                     bond_order: int) -> float:
    """Probability that `completions` of `connections` k-bonded frames end.

    Binomial in the per-slot completion probability q(k); zero completions
    is the (1 - q(k))**m term, impossible counts return 0.
    """
    if completions < 0 or completions > connections:
        return 0.0
    q = frame_end_prob(cfg, bond_order)
    return comb(connections, completions) * q**completions * (1.0 - q) ** (
        connections - completions
    )


def _block_hit_poly(order: int) -> list[int]:
    """Coefficients of (1+u)**order - 1: busy-count patterns of a hit block."""
    return [0] + [comb(order, t) for t in range(1, order + 1)]


def _preemption_profile(layout, free_channels: int, hits, q_c: float) -> np.ndarray:
    """Joint probability of the hit pattern, resolved by busy count.

    Entry z of the returned vector is the probability that exactly
    ``hits[j-1]`` of the j-channel blocks in ``layout`` contain an
    observed-busy channel, every other block is clean, and exactly z
    channels observe busy across the whole layout-plus-free universe.
    Counting: hit blocks contribute ((1+u)**j - 1) busy patterns, free
    channels (1+u)**f, weighted q_c**z * (1-q_c)**(total-z).
    """
    layout = tuple(layout)
    hits = tuple(hits)
    total = sum((j + 1) * n for j, n in enumerate(layout)) + free_channels
    profile = np.zeros(total + 1)
    ways = 1
    poly = np.ones(1, dtype=np.int64)
    for j_minus_1, (blocks, hit) in enumerate(zip(layout, hits)):
        order = j_minus_1 + 1
        if hit < 0 or hit > blocks:
            return profile
        ways *= comb(blocks, hit)
        if hit:
            block = np.array(_block_hit_poly(order), dtype=np.int64)
            for _ in range(hit):
                poly = np.convolve(poly, block)
    if free_channels:
        poly = np.convolve(
            poly,
            np.array([comb(free_channels, t) for t in range(free_channels + 1)],
                     dtype=np.int64),
        )
    for z in range(len(poly)):
        profile[z] = ways * int(poly[z]) * q_c**z * (1.0 - q_c) ** (total - z)
    return profile


def preemption_prob(layout, free_channels: int, hits, busy_count: int,
                    q_c: float) -> float:
    """Probability of a specific detected-occupancy outcome.

    ``layout[j-1]`` blocks of j channels each sit next to ``free_channels``
    loose channels; every channel is observed busy independently with
    probability q_c.  Returns the probability that exactly ``hits[j-1]`` of
    the j-channel blocks contain at least one busy channel (the preempted
    connections), no other block is touched, and the total busy count across
    all channels is exactly ``busy_count``.  Infeasible combinations return 0.
    """
    total = sum((j + 1) * n for j, n in enumerate(layout)) + free_channels
    if busy_count < 0 or busy_count > total:
        return 0.0
    return float(_preemption_profile(layout, free_channels, hits, q_c)[busy_count])


def preemption_marginal(layout, hits, q_c: float) -> float:
    """Preemption probability summed over every feasible busy count.

    Closed form: each j-channel block is hit with probability
    1 - (1 - q_c)**j independently, loose channels marginalize out.
    """
    prob = 1.0
    for j_minus_1, (blocks, hit) in enumerate(zip(layout, hits)):
        order = j_minus_1 + 1
        if hit < 0 or hit > blocks:
            return 0.0
        idle = (1.0 - q_c) ** order
        prob *= comb(blocks, hit) * (1.0 - idle) ** hit * idle ** (blocks - hit)
    return prob


def termination_combinations(losses, current):
    """Theta rows: every completion split theta with theta_j <= losses_j.

    Lexicographic in (theta_1, ..., theta_K); the preemption counts for a row
    are losses - theta.  `current` bounds are implied by losses <= current.
    """
    ranges = [range(min(l, c) + 1) for l, c in zip(losses, current)]
    return itertools.product(*ranges)


# ---------------------------------------------------------------------------
# Transition matrix

@dataclass(frozen=True)
class TransitionContext:
    """Static facts about a single (from, to) state pair."""

    current: tuple[int, ...]
    target: tuple[int, ...]
    free_channels: int        # channels free of connections in `current`
    active_pairs: int
    delta: tuple[int, ...]    # target - current


def make_context(cfg: ScenarioConfig, current, target) -> TransitionContext:
    used = sum((j + 1) * n for j, n in enumerate(current))
    return TransitionContext(
        current=tuple(current),
        target=tuple(target),
        free_channels=cfg.num_data_channels - used,
        active_pairs=sum(current),
        delta=tuple(b - a for a, b in zip(current, target)),
    )


def transition_case(ctx: TransitionContext) -> int:
    """Structural classification of a state pair.

    1: exactly one order gains a connection and none shrinks;
    2: occupancy unchanged;
    3: at least one order shrinks (with or without a simultaneous admission;
    the busy/no-busy split of those events is folded into the summation over
    busy counts inside transition_prob);
    0: unreachable on structural grounds (a gain of more than one connection
    or gains at two different orders — at most one admission per slot).
    """
    gains = [(i + 1, d) for i, d in enumerate(ctx.delta) if d > 0]
    if not gains:
        return 2 if all(d == 0 for d in ctx.delta) else 3
    if len(gains) > 1 or gains[0][1] > 1:
        return 0
    return 3 if any(d < 0 for d in ctx.delta) else 1


class _ChainParams:
    """Per-config constants shared across all matrix entries."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.k = cfg.max_bond
        self.k_only = cfg.bonding.mode == "k_only"
        self.q_c = observed_busy_prob(cfg)
        # idle[j]: probability a j-channel block observes no busy channel
        self.idle = [(1.0 - self.q_c) ** j for j in range(self.k + 1)]

    def success_prob(self, active_pairs: int) -> float:
        """Arrangement success, gated on an idle receiver being available."""
        if self.cfg.num_users - 2 * active_pairs < 2:
            return 0.0
        return arrangement_prob(self.cfg, active_pairs, 1)

    def admit_order(self, pool: int) -> int:
        """Bond order a new connection takes from `pool` available channels."""
        if self.k_only:
            return self.k if pool >= self.k else 0
        return pool if pool < self.k else self.k


def _theta_events(params: _ChainParams, current, losses):
    """Yield (completion probability, survivors, hits, freed channels)."""
    cfg = params.cfg
    for theta in termination_combinations(losses, current):
        term = 1.0
        for j, (c, t) in enumerate(zip(current, theta), start=1):
            term *= termination_prob(cfg, c, t, j)
            if term == 0.0:
                break
        else:
            survivors = tuple(c - t for c, t in zip(current, theta))
            hits = tuple(l - t for l, t in zip(losses, theta))
            freed = sum((j + 1) * t for j, t in enumerate(theta))
            yield term, survivors, hits, freed


def transition_prob(cfg: ScenarioConfig, frm, to,
                    params: _ChainParams | None = None) -> float:
    """One-slot probability of moving from occupancy `frm` to `to`.

    Sums, over every admission fate compatible with the pair, the Theta
    combinations of completions versus preemptions.  Admission fates per
    Theta row (pool = free channels plus channels freed by the completions,
    alpha = the order an entrant takes from that pool):

    * no admission         — failed contention, or success with an empty
      pool (the blocked pair contends again later);
    * admission preempted  — the entrant's alpha claimed channels include
      one observed busy; it dies before transmitting (weight
      1 - (1-q_c)**alpha);
    * admission survives   — all alpha claimed channels observe idle; the
      target gains one connection at order alpha.

    Admission fates are independent of where the busy channels fall on the
    rest of the system, so every term uses the busy-count-marginalized
    preemption probability.
    """
    if params is None:
        params = _ChainParams(cfg)
    ctx = make_context(cfg, frm, to)
    if transition_case(ctx) == 0:
        return 0.0
    a, b = ctx.current, ctx.target
    s1 = params.success_prob(ctx.active_pairs)
    free_now = ctx.free_channels
    base_losses = tuple(x - y for x, y in zip(a, b))
    prob = 0.0

    # Fates without a new connection in the target: failed contention,
    # blocked admission, or an entrant preempted on arrival.
    if all(0 <= l <= c for l, c in zip(base_losses, a)):
        for term, survivors, hits, freed in _theta_events(params, a, base_losses):
            alpha = params.admit_order(free_now + freed)
            weight = 1.0 - s1
            if alpha == 0:
                weight += s1
            else:
                weight += s1 * (1.0 - params.idle[alpha])
            prob += weight * term * preemption_marginal(survivors, hits, params.q_c)

    # Fates where the entrant materializes at order `gain` alongside losses.
    if s1 > 0.0:
        for gain in range(1, params.k + 1):
            losses = tuple(
                l + (1 if j == gain else 0)
                for j, l in enumerate(base_losses, start=1)
            )
            if any(l < 0 or l > c for l, c in zip(losses, a)):
                continue
            for term, survivors, hits, freed in _theta_events(params, a, losses):
                if params.admit_order(free_now + freed) != gain:
                    continue
                prob += s1 * params.idle[gain] * term * preemption_marginal(
                    survivors, hits, params.q_c
                )
    return prob


def _check_analysis_scope(cfg: ScenarioConfig):
    if cfg.disruption.strategy != "drop":
        raise ConfigError("analysis engine models the drop strategy only")
    if cfg.priority is not None:
        raise ConfigError("analysis engine does not model priorities")
    if cfg.pu_traffic.imbalance != 0.0:
        raise ConfigError("analysis engine needs uniform channel activity")
    if cfg.pu_traffic.model == "runs" and (
        cfg.pu_traffic.off_dist != "geometric" or cfg.pu_traffic.on_dist != "geometric"
    ):
        raise ConfigError("analysis engine needs memoryless channel occupancy")
    if cfg.bonding.mode == "adaptive":
        raise ConfigError("analysis engine takes one bonding order at a time")


def build_transition_matrix(cfg: ScenarioConfig, space: StateSpace | None = None,
                            cap: int = DEFAULT_STATE_CAP) -> np.ndarray:
    """Dense row-stochastic transition matrix over the enumerated states."""
    _check_analysis_scope(cfg)
    if space is None:
        space = enumerate_states(cfg, cap)
    params = _ChainParams(cfg)
    size = len(space)
    matrix = np.zeros((size, size))
    for i, frm in enumerate(space.states):
        for j, to in enumerate(space.states):
            matrix[i, j] = transition_prob(cfg, frm, to, params)
        row_sum = matrix[i].sum()
        if abs(row_sum - 1.0) > ROW_SUM_TOL:
            raise AssertionError(
                f"row {frm} sums to {row_sum!r}; transition logic is broken"
            )
    return matrix


def dump_matrix_csv(matrix: np.ndarray, path) -> None:
    """Debug dump: one `row,col,probability` line per nonzero entry."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("row,col,probability\n")
        for i, j in zip(*np.nonzero(matrix)):
            fh.write(f"{i},{j},{matrix[i, j]:.17g}\n")


# ---------------------------------------------------------------------------
# Steady state and metrics

def solve_steady_state(matrix: np.ndarray, direct_limit: int = 2000,
                       power_tol: float = 1e-12,
                       max_iterations: int = 1_000_000) -> np.ndarray:
    """Stationary distribution pi with pi @ P = pi and sum(pi) = 1.

    Small systems are solved directly from the null space of (P^T - I) via
    SVD (raising SingularError when the null space is not one-dimensional);
    larger systems fall back to power iteration.
    """
    size = matrix.shape[0]
    if matrix.shape != (size, size):
        raise ValueError("transition matrix must be square")
    if size <= direct_limit:
        shifted = matrix.T - np.eye(size)
        singular_values = np.linalg.svd(shifted, compute_uv=False)
        scale = singular_values[0] if singular_values[0] > 0 else 1.0
        tol = scale * size * np.finfo(float).eps * 100
        nullity = int(np.sum(singular_values <= tol))
        if nullity != 1:
            raise SingularError(
                f"stationary vector is not unique (null space dimension {nullity})"
            )
        _, _, vt = np.linalg.svd(shifted)
        pi = vt[-1]
        pi = pi / pi.sum()
    else:
        pi = np.full(size, 1.0 / size)
        for _ in range(max_iterations):
            nxt = pi @ matrix
            nxt /= nxt.sum()
            if np.max(np.abs(nxt - pi)) < power_tol:
                pi = nxt
                break
            pi = nxt
        else:
            raise ConvergenceError(
                f"power iteration did not converge in {max_iterations} steps"
            )
    if pi.min() < -NORMALIZATION_TOL * 10:
        raise SingularError("stationary vector has negative mass")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = np.max(np.abs(pi @ matrix - pi))
    if residual > STATIONARY_TOL:
        raise SingularError(f"stationary residual {residual:.3e} above tolerance")
    return pi


def throughput(pi: np.ndarray, space: StateSpace, cfg: ScenarioConfig) -> float:
    """Mean MAC throughput in bits/second.

    R = C*(T - T_s)/T * sum_states pi(x) * sum_j j*x_j*beta(j); the leading
    factor charges the sensing overhead.
    """
    duty = (cfg.slot_seconds - cfg.sensing_seconds) / cfg.slot_seconds
    weights = np.array([
        sum((j + 1) * n * cfg.penalty.factor(j + 1) for j, n in enumerate(state))
        for state in space.states
    ])
    return cfg.channel_rate_bps * duty * float(pi @ weights)


def utilization(pi: np.ndarray, space: StateSpace, cfg: ScenarioConfig) -> float:
    """Mean fraction of channel resources carrying SU transmissions.

    U = (T - T_s)/T * E[occupied channels]/M; the bonding penalty does not
    enter (raw occupancy, not delivered bits).
    """
    duty = (cfg.slot_seconds - cfg.sensing_seconds) / cfg.slot_seconds
    occupancy = np.array([
        sum((j + 1) * n for j, n in enumerate(state)) for state in space.states
    ])
    return duty * float(pi @ occupancy) / cfg.num_data_channels


@dataclass(frozen=True)
class AnalysisResult:
    """Bundled output of one analytical solve."""

    space: StateSpace
    matrix: np.ndarray
    pi: np.ndarray
    throughput_bps: float
    utilization: float


def analyze(cfg: ScenarioConfig, cap: int = DEFAULT_STATE_CAP) -> AnalysisResult:
    """Enumerate, build, solve, and score one scenario."""
    space = enumerate_states(cfg, cap)
    matrix = build_transition_matrix(cfg, space, cap)
    pi = solve_steady_state(matrix)
    return AnalysisResult(
        space=space,
        matrix=matrix,
        pi=pi,
        throughput_bps=throughput(pi, space, cfg),
        utilization=utilization(pi, space, cfg),
    )
