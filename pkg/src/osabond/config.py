"""Scenario configuration and the derived per-slot model quantities.

Everything downstream (chain, oracle, simulator, optimizer) consumes an
immutable :class:`ScenarioConfig`.  The slotted model it describes: each
slot is ``T`` seconds, the first ``T_s`` seconds are spectrum sensing, a
k-bonded connection ends its frame after any slot with probability
``q(k) = C*(T - T_s)/d * k * beta(k)`` (so frame lengths are geometric),
and the network observes a channel busy with probability
``q_c = q_p*p_d + (1 - q_p)*p_f``.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError

# Unit suffixes accepted by the scenario-file loader; everything is
# normalized to bits (kb = kilobit, kB = kilobyte).
_BITS_PER_SUFFIX = {"": 1.0, "b": 1.0, "kb": 1e3, "Mb": 1e6, "kB": 8e3, "MB": 8e6}


@dataclass(frozen=True)
class Penalty:
    """Throughput reduction factor beta(k) of a k-bonded virtual channel.

    ``perfect`` keeps beta(k) = 1 for all k; ``power_law`` uses
    beta(k) = 1/k**exponent; ``table`` supplies explicit per-order values
    (beta(1) must be 1, every value in [0, 1]).
    """

    kind: str = "perfect"          # "perfect" | "power_law" | "table"
    exponent: float = 0.0          # power_law only, >= 0
    values: tuple[float, ...] = () # table only, values[k-1] = beta(k)

    def __post_init__(self):
        if self.kind not in ("perfect", "power_law", "table"):
            raise ConfigError(f"unknown penalty kind {self.kind!r}")
        if self.kind == "power_law" and self.exponent < 0:
            raise ConfigError("power-law penalty exponent must be >= 0")
        if self.kind == "table":
            if not self.values or abs(self.values[0] - 1.0) > 1e-12:
                raise ConfigError("penalty table must start with beta(1) = 1")
            if any(not 0.0 <= v <= 1.0 for v in self.values):
                raise ConfigError("penalty table values must lie in [0, 1]")

    def factor(self, k: int) -> float:
        """beta(k) for bond order k >= 1."""
        if self.kind == "perfect":
            return 1.0
        if self.kind == "power_law":
            return float(k) ** (-self.exponent)
        if k > len(self.values):
            raise ConfigError(f"penalty table has no entry for bond order {k}")
        return self.values[k - 1]

    @staticmethod
    def perfect() -> "Penalty":
        return Penalty("perfect")

    @staticmethod
    def power_law(exponent: float) -> "Penalty":
        return Penalty("power_law", exponent=exponent)

    @staticmethod
    def table(values) -> "Penalty":
        return Penalty("table", values=tuple(float(v) for v in values))


@dataclass(frozen=True)
class PuTraffic:
    """Per-channel primary-user occupancy process.

    ``iid`` draws each channel busy independently every slot (geometric
    sojourns).  ``runs`` alternates explicit off/on runs whose lengths come
    from a geometric or discretized log-normal distribution, calibrated so
    the long-run busy fraction stays q_p (on mean 1/(1-q_p) slots, off mean
    1/q_p slots).  ``imbalance`` skews activity across channels while
    preserving the mean (0 = uniform).
    """

    model: str = "iid"             # "iid" | "runs"
    off_dist: str = "geometric"    # runs only: "geometric" | "lognormal"
    on_dist: str = "geometric"
    imbalance: float = 0.0         # A_q >= 0

    def __post_init__(self):
        if self.model not in ("iid", "runs"):
            raise ConfigError(f"unknown PU traffic model {self.model!r}")
        for d in (self.off_dist, self.on_dist):
            if d not in ("geometric", "lognormal"):
                raise ConfigError(f"unknown run-length distribution {d!r}")
        if self.imbalance < 0:
            raise ConfigError("activity imbalance must be >= 0")


@dataclass(frozen=True)
class Disruption:
    """What happens to a connection when a bonded channel senses busy."""

    strategy: str = "drop"         # "drop" | "switch"
    switch_seconds: float = 0.0    # T_p, switch only

    def __post_init__(self):
        if self.strategy not in ("drop", "switch"):
            raise ConfigError(f"unknown disruption strategy {self.strategy!r}")
        if self.strategy == "switch" and self.switch_seconds < 0:
            raise ConfigError("switch time must be >= 0")


@dataclass(frozen=True)
class BondingPolicy:
    """How a new connection chooses its bond order.

    ``flexible`` bonds min(free, K); ``k_only`` bonds exactly K or blocks;
    ``adaptive`` plays a schedule of (pu_activity, bond order) segments on
    top of a flexible or k_only base protocol.
    """

    mode: str = "flexible"         # "flexible" | "k_only" | "adaptive"
    schedule: tuple[tuple[float, int], ...] = ()
    adaptive_base: str = "flexible"

    def __post_init__(self):
        if self.mode not in ("flexible", "k_only", "adaptive"):
            raise ConfigError(f"unknown bonding mode {self.mode!r}")
        if self.mode == "adaptive":
            if not self.schedule:
                raise ConfigError("adaptive bonding needs a non-empty schedule")
            if self.adaptive_base not in ("flexible", "k_only"):
                raise ConfigError("adaptive base must be flexible or k_only")


@dataclass(frozen=True)
class PriorityScheme:
    """Two-class traffic: high-priority arrivals may displace regulars."""

    high_prob: float               # p_h, probability a new frame is high priority
    buffer_size: int               # B, max halted connections

    def __post_init__(self):
        if not 0.0 <= self.high_prob <= 1.0:
            raise ConfigError("high-priority probability must lie in [0, 1]")
        if self.buffer_size < 0:
            raise ConfigError("buffer size must be >= 0")


@dataclass(frozen=True)
class DetectorMeta:
    """Descriptive energy-detector parameters. Never used in computation."""

    bandwidth_hz: float = 0.0
    snr_db: float = 0.0
    threshold_db: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one experiment."""

    num_users: int                          # N, OSA nodes
    num_data_channels: int                  # M, data channels (control channel excluded)
    max_bond: int                           # K, maximum bond order, K <= M
    access_prob: float                      # p, per-slot RTS probability of an idle node
    slot_seconds: float                     # T
    sensing_seconds: float                  # T_s < T
    channel_rate_bps: float                 # C, single physical channel rate
    frame_bits: float                       # d, SU frame size
    pu_activity: float                      # q_p, mean per-channel PU busy probability
    detect_prob: float = 0.9                # p_d
    false_alarm_prob: float = 0.02          # p_f
    penalty: Penalty = field(default_factory=Penalty.perfect)
    bonding: BondingPolicy = field(default_factory=BondingPolicy)
    disruption: Disruption = field(default_factory=Disruption)
    selection: str = "random"               # "random" | "least_used"
    priority: PriorityScheme | None = None
    pu_traffic: PuTraffic = field(default_factory=PuTraffic)
    detector_meta: DetectorMeta | None = None

    def __post_init__(self):
        if self.num_users < 1:
            raise ConfigError("num_users must be >= 1")
        if self.num_data_channels < 1:
            raise ConfigError("num_data_channels must be >= 1")
        if not 1 <= self.max_bond <= self.num_data_channels:
            raise ConfigError("max_bond must satisfy 1 <= K <= M")
        if not 0.0 < self.access_prob < 1.0:
            raise ConfigError("access_prob must lie in (0, 1)")
        if self.slot_seconds <= 0 or self.sensing_seconds <= 0:
            raise ConfigError("slot and sensing times must be positive")
        if self.sensing_seconds >= self.slot_seconds:
            raise ConfigError("sensing time must be shorter than the slot")
        if self.channel_rate_bps <= 0 or self.frame_bits <= 0:
            raise ConfigError("channel rate and frame size must be positive")
        for name in ("pu_activity", "detect_prob", "false_alarm_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.selection not in ("random", "least_used"):
            raise ConfigError(f"unknown channel selection {self.selection!r}")
        if self.priority is not None and self.priority.buffer_size > self.num_data_channels:
            raise ConfigError("buffer size cannot exceed the channel count")
        for k in range(1, self.max_bond + 1):
            frame_end_prob(self, k)  # raises ConfigError when q(k) leaves (0, 1]
        if self.bonding.mode == "adaptive":
            for qp, order in self.bonding.schedule:
                if not 0.0 <= qp <= 1.0:
                    raise ConfigError("schedule activity levels must lie in [0, 1]")
                if not 1 <= order <= self.num_data_channels:
                    raise ConfigError("schedule bond orders must satisfy 1 <= k <= M")
        per_channel_activity(self)  # raises when imbalance pushes any channel out of [0, 1]

    def with_overrides(self, **changes) -> "ScenarioConfig":
        """Copy with replaced fields, re-running all validation."""
        return replace(self, **changes)


def frame_end_prob(cfg: ScenarioConfig, k: int) -> float:
    """Per-slot frame completion probability q(k) of a k-bonded connection.

    q(k) = C*(T - T_s)/d * k * beta(k); under the switch disruption strategy
    the air time per slot is extended by the switching delay T_p, which keeps
    the comparison with the drop strategy fair.
    """
    if not 1 <= k <= cfg.max_bond:
        raise ConfigError(f"bond order {k} outside 1..{cfg.max_bond}")
    air = cfg.slot_seconds - cfg.sensing_seconds
    if cfg.disruption.strategy == "switch":
        air += cfg.disruption.switch_seconds
    q = cfg.channel_rate_bps * air / cfg.frame_bits * k * cfg.penalty.factor(k)
    if not 0.0 < q <= 1.0:
        raise ConfigError(
            f"q({k}) = {q:.6g} is not a probability; check C, T, T_s, d, beta"
        )
    return q


def observed_busy_prob(cfg: ScenarioConfig, channel_activity: float | None = None) -> float:
    """Probability q_c that the network observes a channel busy.

    Combines true occupancy with the detector: q_c = q_p*p_d + (1 - q_p)*p_f.
    """
    qp = cfg.pu_activity if channel_activity is None else channel_activity
    return qp * cfg.detect_prob + (1.0 - qp) * cfg.false_alarm_prob


def per_channel_activity(cfg: ScenarioConfig) -> np.ndarray:
    """Per-channel PU busy probabilities q_p^(i), i = 1..M.

    With imbalance A_q the activity grows with the channel index as
    q_p^(i) = q_p * M * i**A_q / sum_j j**A_q, which preserves the mean
    activity q_p exactly; A_q = 0 yields a uniform vector.
    """
    m = cfg.num_data_channels
    a_q = cfg.pu_traffic.imbalance
    if a_q == 0.0:
        return np.full(m, cfg.pu_activity)
    idx = np.arange(1, m + 1, dtype=float)
    weights = idx**a_q
    activity = cfg.pu_activity * m * weights / weights.sum()
    if np.any(activity > 1.0) or np.any(activity < 0.0):
        raise ConfigError(
            f"imbalance {a_q} with activity {cfg.pu_activity} pushes a channel "
            "outside [0, 1]"
        )
    return activity


def lognormal_run_params(mean_slots: float) -> tuple[float, float]:
    """Location/scale (mu, sigma) of the log-normal run-length sampler.

    The continuous log-normal is rounded to the nearest slot count (clamped
    to >= 1); its target variance is the variance of the geometric
    distribution with the same mean, v = m*(m - 1), so heavy-tailed and
    memoryless runs stay mean- and variance-matched:

        sigma = sqrt(log(v/m**2 + 1))       mu = log(m**2 / sqrt(v + m**2))
    """
    if mean_slots <= 1.0:
        raise ConfigError("log-normal run length needs a mean above one slot")
    m2 = mean_slots * mean_slots
    variance = m2 - mean_slots
    sigma = math.sqrt(math.log(variance / m2 + 1.0))
    mu = math.log(m2 / math.sqrt(variance + m2))
    return mu, sigma


# ---------------------------------------------------------------------------
# Scenario files: flat "key = value" text, one key per ScenarioConfig field.

_SCENARIO_KEYS = {
    "num_users", "num_data_channels", "max_bond", "access_prob",
    "slot_seconds", "sensing_seconds", "channel_rate_bps", "frame_bits",
    "pu_activity", "detect_prob", "false_alarm_prob", "penalty",
    "bonding_policy", "disruption", "selection", "priority", "pu_traffic",
    "detector_meta",
}

_INT_KEYS = {"num_users", "num_data_channels", "max_bond"}
_FLOAT_KEYS = {
    "access_prob", "slot_seconds", "sensing_seconds", "pu_activity",
    "detect_prob", "false_alarm_prob",
}
_BIT_KEYS = {"channel_rate_bps", "frame_bits"}


def _parse_bits(text: str) -> float:
    m = re.fullmatch(r"\s*([0-9.eE+-]+)\s*([kM]?[bB]?)\s*", text)
    if not m or m.group(2) not in _BITS_PER_SUFFIX:
        raise ConfigError(f"cannot parse size/rate {text!r}")
    try:
        return float(m.group(1)) * _BITS_PER_SUFFIX[m.group(2)]
    except ValueError as exc:
        raise ConfigError(f"cannot parse size/rate {text!r}") from exc


def _parse_kv_list(text: str) -> dict[str, str]:
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _parse_penalty(text: str) -> Penalty:
    head, _, rest = text.partition(":")
    head = head.strip()
    if head == "perfect":
        return Penalty.perfect()
    if head == "power_law":
        return Penalty.power_law(float(rest))
    if head == "table":
        entries = _parse_kv_list(rest)
        orders = sorted(int(k) for k in entries)
        if orders != list(range(1, len(orders) + 1)):
            raise ConfigError("penalty table must cover orders 1..K contiguously")
        return Penalty.table([float(entries[str(k)]) for k in orders])
    raise ConfigError(f"unknown penalty spec {text!r}")


def _parse_bonding(text: str) -> BondingPolicy:
    head, _, rest = text.partition(":")
    head = head.strip()
    if head in ("flexible", "k_only"):
        return BondingPolicy(head)
    if head == "adaptive":
        base = "flexible"
        segments = []
        for part in rest.split(","):
            part = part.strip()
            if part.startswith("base="):
                base = part[5:].strip()
                continue
            qp, _, order = part.partition("=")
            segments.append((float(qp), int(order)))
        return BondingPolicy("adaptive", tuple(segments), base)
    raise ConfigError(f"unknown bonding policy {text!r}")


def _parse_disruption(text: str) -> Disruption:
    head, _, rest = text.partition(":")
    head = head.strip()
    if head == "drop":
        return Disruption("drop")
    if head == "switch":
        return Disruption("switch", float(rest))
    raise ConfigError(f"unknown disruption strategy {text!r}")


def _parse_pu_traffic(text: str) -> PuTraffic:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError("empty pu_traffic spec")
    model = parts[0]
    kv = _parse_kv_list(",".join(parts[1:])) if len(parts) > 1 else {}
    imbalance = float(kv.pop("imbalance", 0.0))
    if model == "iid":
        if kv:
            raise ConfigError(f"unexpected pu_traffic options {sorted(kv)}")
        return PuTraffic("iid", imbalance=imbalance)
    if model == "runs":
        off = kv.pop("off", "geometric")
        on = kv.pop("on", "geometric")
        if kv:
            raise ConfigError(f"unexpected pu_traffic options {sorted(kv)}")
        return PuTraffic("runs", off_dist=off, on_dist=on, imbalance=imbalance)
    raise ConfigError(f"unknown pu_traffic model {model!r}")


def parse_scenario(text: str) -> ScenarioConfig:
    """Build a ScenarioConfig from flat key = value text. Unknown keys reject."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _SCENARIO_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    kwargs: dict = {}
    for key, value in raw.items():
        if key in _INT_KEYS:
            kwargs[key] = int(value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(value)
        elif key in _BIT_KEYS:
            kwargs[key] = _parse_bits(value)
        elif key == "penalty":
            kwargs[key] = _parse_penalty(value)
        elif key == "bonding_policy":
            kwargs["bonding"] = _parse_bonding(value)
        elif key == "disruption":
            kwargs[key] = _parse_disruption(value)
        elif key == "selection":
            kwargs[key] = value
        elif key == "priority":
            kv = _parse_kv_list(value)
            kwargs[key] = PriorityScheme(
                high_prob=float(kv.pop("high_prob")),
                buffer_size=int(kv.pop("buffer", kv.pop("buffer_size", 0))),
            )
        elif key == "pu_traffic":
            kwargs[key] = _parse_pu_traffic(value)
        elif key == "detector_meta":
            kv = _parse_kv_list(value)
            kwargs[key] = DetectorMeta(
                bandwidth_hz=float(kv.pop("bandwidth_hz", 0.0)),
                snr_db=float(kv.pop("snr_db", 0.0)),
                threshold_db=float(kv.pop("threshold_db", 0.0)),
            )
    try:
        return ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path) -> ScenarioConfig:
    """Load a scenario file (see parse_scenario for the format)."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def config_digest(cfg: ScenarioConfig) -> str:
    """Stable hash of the fully resolved configuration, for CSV provenance."""
    import hashlib

    blob = repr(dataclasses.astuple(cfg)).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
