"""Ground-truth transition matrix by exhaustive event enumeration.

No case logic and no combinatorics: for every starting state this module
walks the full joint event space — every subset of completing frames, every
detected-occupancy bitmap over the channels, both contention outcomes —
applies the protocol step function to each, and accumulates probability
mass on the resulting states.  The step function is the slot pipeline:
completions free their channels, surviving connections with an
observed-busy channel are torn down, and a successful contention bonds
min(available, K) channels — exactly K under k_only bonding — claimed from
the free-plus-completed pool before the sensing outcome is known; the
entrant dies on the spot when any claimed channel observes busy.  Feasible
only for small instances; exists to referee :mod:`osabond.chain` entrywise.
"""

from __future__ import annotations

import numpy as np

from .chain import StateSpace, arrangement_prob, enumerate_states
from .config import ScenarioConfig, frame_end_prob, observed_busy_prob
from .errors import CapacityError, ConfigError

MAX_ORACLE_CHANNELS = 8
MAX_ORACLE_CONNECTIONS = 8
MAX_TABLE_CHANNELS = 20


def _check_oracle_scope(cfg: ScenarioConfig):
    if cfg.disruption.strategy != "drop":
        raise ConfigError("oracle models the drop strategy only")
    if cfg.priority is not None:
        raise ConfigError("oracle does not model priorities")
    if cfg.pu_traffic.imbalance != 0.0:
        raise ConfigError("oracle needs uniform channel activity")
    if cfg.bonding.mode == "adaptive":
        raise ConfigError("oracle takes one bonding order at a time")
    if cfg.num_data_channels > MAX_ORACLE_CHANNELS:
        raise CapacityError(
            f"oracle enumerates 2^M patterns; M={cfg.num_data_channels} > "
            f"{MAX_ORACLE_CHANNELS}"
        )


def _assign_channels(state, num_channels: int, channel_order=None):
    """Deterministic channel masks for a state's connections.

    Connections are packed onto consecutive channels, lowest order first.
    `channel_order` relabels the physical channels (identity by default);
    with uniform activity the resulting matrix must not depend on it.
    """
    order_of = channel_order if channel_order is not None else range(num_channels)
    order_of = list(order_of)
    cursor = 0
    orders, masks = [], []
    for j, count in enumerate(state, start=1):
        for _ in range(count):
            mask = 0
            for c in range(cursor, cursor + j):
                mask |= 1 << order_of[c]
            orders.append(j)
            masks.append(mask)
            cursor += j
    free_mask = 0
    for c in range(cursor, num_channels):
        free_mask |= 1 << order_of[c]
    return orders, masks, free_mask


def _lowest_bits(mask: int, count: int) -> int:
    out = 0
    for _ in range(count):
        bit = mask & -mask
        out |= bit
        mask ^= bit
    return out


def oracle_transition_matrix(cfg: ScenarioConfig, space: StateSpace | None = None,
                             channel_order=None) -> np.ndarray:
    """Exact transition matrix by brute force over all slot events."""
    _check_oracle_scope(cfg)
    if space is None:
        space = enumerate_states(cfg)
    m = cfg.num_data_channels
    k_max = cfg.max_bond
    k_only = cfg.bonding.mode == "k_only"
    if max(sum(s) for s in space.states) > MAX_ORACLE_CONNECTIONS:
        raise CapacityError("oracle enumerates completion subsets; too many connections")
    q_c = observed_busy_prob(cfg)
    q_of = [frame_end_prob(cfg, k) for k in range(1, k_max + 1)]
    pattern_weight = [
        q_c**bin(p).count("1") * (1.0 - q_c) ** (m - bin(p).count("1"))
        for p in range(1 << m)
    ]

    size = len(space)
    matrix = np.zeros((size, size))
    for i, state in enumerate(space.states):
        orders, masks, _ = _assign_channels(state, m, channel_order)
        n_conn = len(orders)
        pairs = sum(state)
        s1 = arrangement_prob(cfg, pairs, 1) if cfg.num_users - 2 * pairs >= 2 else 0.0
        contention = [(0, 1.0 - s1)]
        if s1 > 0.0:
            contention.append((1, s1))

        all_mask = (1 << m) - 1
        for done_bits in range(1 << n_conn):
            done_prob = 1.0
            keep_mask = 0   # channels staying with non-completed connections
            for c in range(n_conn):
                q = q_of[orders[c] - 1]
                if done_bits >> c & 1:
                    done_prob *= q
                else:
                    done_prob *= 1.0 - q
                    keep_mask |= masks[c]
            if done_prob == 0.0:
                continue
            # pool claimed before sensing: free channels plus completed bonds
            pool_mask = all_mask & ~keep_mask
            pool = m - bin(keep_mask).count("1")
            if k_only:
                alpha = k_max if pool >= k_max else 0
            else:
                alpha = pool if pool < k_max else k_max
            arrival_mask = _lowest_bits(pool_mask, alpha)
            for pattern in range(1 << m):
                weight = done_prob * pattern_weight[pattern]
                if weight == 0.0:
                    continue
                nxt = [0] * k_max
                for c in range(n_conn):
                    if not done_bits >> c & 1 and not masks[c] & pattern:
                        nxt[orders[c] - 1] += 1
                base = tuple(nxt)
                for success, s_prob in contention:
                    target = base
                    if success and alpha and not arrival_mask & pattern:
                        grown = list(base)
                        grown[alpha - 1] += 1
                        target = tuple(grown)
                    matrix[i, space.index[target]] += weight * s_prob
    return matrix


def oracle_preemption_table(layout, free_channels: int, q_c: float) -> dict:
    """Exact joint law of (preemption vector, busy count) for one layout.

    Enumerates every busy/idle bitmap over the layout's channels; the key is
    (hits per order, total busy channels).  Values sum to 1.
    """
    layout = tuple(layout)
    total = sum((j + 1) * n for j, n in enumerate(layout)) + free_channels
    if total > MAX_TABLE_CHANNELS:
        raise CapacityError(f"{total} channels exceed the enumeration bound")
    orders, masks, _ = _assign_channels(layout, total)
    table: dict = {}
    k_len = len(layout)
    for pattern in range(1 << total):
        z = bin(pattern).count("1")
        hits = [0] * k_len
        for order, mask in zip(orders, masks):
            if mask & pattern:
                hits[order - 1] += 1
        key = (tuple(hits), z)
        table[key] = table.get(key, 0.0) + q_c**z * (1.0 - q_c) ** (total - z)
    return table


def dump_matrix_csv(matrix: np.ndarray, path) -> None:
    """Debug dump with the same schema as the analysis engine's dump."""
    from .chain import dump_matrix_csv as _dump

    _dump(matrix, path)
