"""Performance toolkit for channel-bonding opportunistic-spectrum-access MACs.

Three engines over one scenario description:

* :mod:`osabond.chain`     — exact Markov-chain throughput/utilization;
* :mod:`osabond.oracle`    — brute-force event enumeration refereeing the chain;
* :mod:`osabond.simulator` — slot-level Monte Carlo for the full protocol
  family (switching, priorities, channel selection, heavy-tailed traffic);

plus :mod:`osabond.optimizer` (adaptive bond-order schedules) and a small
CLI (:mod:`osabond.cli`) with presets for the standard experiment sweeps.
"""

from .config import (
    BondingPolicy,
    DetectorMeta,
    Disruption,
    Penalty,
    PriorityScheme,
    PuTraffic,
    ScenarioConfig,
    frame_end_prob,
    lognormal_run_params,
    load_scenario,
    observed_busy_prob,
    parse_scenario,
    per_channel_activity,
)
from .chain import (
    AnalysisResult,
    StateSpace,
    analyze,
    arrangement_prob,
    build_transition_matrix,
    enumerate_states,
    preemption_marginal,
    preemption_prob,
    solve_steady_state,
    termination_prob,
    throughput,
    transition_prob,
    utilization,
)
from .errors import (
    CapacityError,
    ConfigError,
    ConstraintError,
    ConvergenceError,
    OsabondError,
    SingularError,
    UndefinedMetricError,
)
from .oracle import oracle_preemption_table, oracle_transition_matrix
from .simulator import MetricsReport, TraceTable, fairness_index, run, run_schedule
from .optimizer import BondSchedule, optimize_schedule
from .presets import large_scenario, small_scenario

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
