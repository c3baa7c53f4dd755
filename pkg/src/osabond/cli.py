"""Command line front end: scenario sweeps, presets, engine comparison.

Examples::

    osabond --scenario small.scn --sweep pu_activity=0:0.9:0.05 \
            --engine all --slots 500000 --seed 7 --out sweep.csv
    osabond --preset fig1a --out fig1a.csv --emit-gnuplot
    osabond --scenario small.scn --compare

Exit codes: 0 success, 1 engine comparison outside tolerance, 2 bad
configuration, 3 capacity or convergence failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import chain, oracle, simulator
from .config import ScenarioConfig, config_digest, load_scenario
from .errors import CapacityError, ConfigError, ConvergenceError, SingularError
from .presets import PRESETS, SweepSpec, build_preset

CSV_COLUMNS = (
    "preset", "variant", "engine", "param", "value", "rep", "seed", "slots",
    "states", "throughput_bps", "throughput_ci", "utilization",
    "utilization_ci", "collision_prob", "collision_ci", "fairness",
    "buffered_fraction", "buffered_ci", "mean_wait_slots", "mean_wait_ci",
    "channel_usage",
)

_INT_FIELDS = {"num_users", "num_data_channels", "max_bond"}

MATRIX_TOLERANCE = 1e-10
AGREEMENT_TOLERANCE = 0.02


def apply_param(cfg: ScenarioConfig, param: str, value) -> ScenarioConfig:
    """Set a (possibly dotted) scenario parameter, re-validating the config."""
    head, _, rest = param.partition(".")
    if not hasattr(cfg, head):
        raise ConfigError(f"unknown scenario parameter {param!r}")
    if rest:
        sub = getattr(cfg, head)
        if sub is None:
            raise ConfigError(f"{head} is not configured; cannot set {param}")
        if not hasattr(sub, rest):
            raise ConfigError(f"unknown scenario parameter {param!r}")
        current = getattr(sub, rest)
        value = type(current)(value) if current is not None else value
        return cfg.with_overrides(**{head: dataclasses.replace(sub, **{rest: value})})
    if head in _INT_FIELDS:
        value = int(round(float(value)))
    else:
        value = float(value)
    return cfg.with_overrides(**{head: value})


def parse_sweep(text: str):
    """Parse `param=start:stop:step` or `param=v1,v2,...` into (param, values)."""
    if "=" not in text:
        raise ConfigError("sweep must look like param=start:stop:step or param=v1,v2")
    param, _, spec = text.partition("=")
    param = param.strip()
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad sweep range {spec!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"bad sweep range {spec!r}")
        count = int(round((stop - start) / step)) + 1
        values = tuple(round(start + i * step, 12) for i in range(count))
    else:
        values = tuple(float(v) for v in spec.split(",") if v.strip())
        if not values:
            raise ConfigError("sweep value list is empty")
    return param, values


def _point_seed(seed: int, variant_idx: int, value_idx: int, rep: int) -> int:
    return int(np.random.SeedSequence((seed, variant_idx, value_idx, rep))
               .generate_state(1)[0])


def _sim_point(cfg: ScenarioConfig, slots: int, seed: int, warmup: int,
               batches: int) -> dict:
    rep = simulator.run(cfg, slots, seed, warmup=warmup, batches=batches)
    return {
        "slots": rep.slots,
        "throughput_bps": rep.throughput_bps,
        "throughput_ci": rep.throughput_ci,
        "utilization": rep.utilization,
        "utilization_ci": rep.utilization_ci,
        "collision_prob": rep.collision_prob,
        "collision_ci": rep.collision_ci,
        "fairness": rep.fairness,
        "buffered_fraction": rep.buffered_fraction,
        "buffered_ci": rep.buffered_ci,
        "mean_wait_slots": rep.mean_wait_slots,
        "mean_wait_ci": rep.mean_wait_ci,
        "channel_usage": ";".join(str(u) for u in rep.channel_usage),
    }


def _analysis_point(cfg: ScenarioConfig, engine: str) -> dict:
    space = chain.enumerate_states(cfg)
    if engine == "oracle":
        matrix = oracle.oracle_transition_matrix(cfg, space)
    else:
        matrix = chain.build_transition_matrix(cfg, space)
    pi = chain.solve_steady_state(matrix)
    return {
        "states": len(space),
        "throughput_bps": chain.throughput(pi, space, cfg),
        "utilization": chain.utilization(pi, space, cfg),
    }


def run_sweep(spec: SweepSpec, *, warmup: int = simulator.DEFAULT_WARMUP,
              batches: int = simulator.DEFAULT_BATCHES, workers: int = 1):
    """Execute a sweep; returns CSV rows in deterministic grid order."""
    rows = []
    sim_tasks = []   # (row_index, cfg, slots, seed)
    for vi, (label, overrides, engines) in enumerate(spec.variants):
        cfg_variant = spec.base.with_overrides(**overrides) if overrides else spec.base
        for gi, value in enumerate(spec.values):
            cfg = apply_param(cfg_variant, spec.param, value)
            if spec.coupled is not None:
                cfg = cfg.with_overrides(**spec.coupled(
                    int(value) if spec.param in _INT_FIELDS else value))
            for engine in engines:
                if engine in ("analysis", "oracle"):
                    row = {"preset": spec.preset, "variant": label,
                           "engine": engine, "param": spec.param,
                           "value": value, "rep": 0, "seed": "",
                           **_analysis_point(cfg, engine)}
                    rows.append(row)
                elif engine == "sim":
                    for rep in range(spec.reps):
                        seed = _point_seed(spec.seed, vi, gi, rep)
                        row = {"preset": spec.preset, "variant": label,
                               "engine": "sim", "param": spec.param,
                               "value": value, "rep": rep, "seed": seed}
                        rows.append(row)
                        sim_tasks.append((len(rows) - 1, cfg, spec.slots, seed))
                else:
                    raise ConfigError(f"unknown engine {engine!r}")
    if workers > 1 and len(sim_tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(
                _sim_point,
                [t[1] for t in sim_tasks], [t[2] for t in sim_tasks],
                [t[3] for t in sim_tasks],
                [warmup] * len(sim_tasks), [batches] * len(sim_tasks),
            )
            for (idx, *_), result in zip(sim_tasks, results):
                rows[idx].update(result)
    else:
        for idx, cfg, slots, seed in sim_tasks:
            rows[idx].update(_sim_point(cfg, slots, seed, warmup, batches))
    return rows


def _format_cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def write_csv(rows, spec: SweepSpec, stream) -> None:
    stream.write(f"# osabond config={config_digest(spec.base)} "
                 f"preset={spec.preset or '-'} param={spec.param} "
                 f"seed={spec.seed} slots={spec.slots}\n")
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        stream.write(",".join(_format_cell(row.get(col)) for col in CSV_COLUMNS)
                     + "\n")


def write_gnuplot(path, csv_path) -> None:
    """A starter plot script; styling is not part of any contract."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            "set datafile separator ','\n"
            "set key outside\n"
            "set xlabel 'swept parameter'\n"
            "set ylabel 'throughput (b/s)'\n"
            f"plot '{csv_path}' using 5:10 with linespoints title 'throughput'\n"
        )


@dataclass(frozen=True)
class ComparisonReport:
    """Cross-engine discrepancies for one scenario."""

    matrix_max_diff: float | None       # None when the oracle cannot run
    analysis_throughput: float
    sim_throughput: float
    sim_ci: float
    relative_diff: float
    within_ci: bool
    ok: bool


def compare_engines(cfg: ScenarioConfig, slots: int = 400_000, seed: int = 1,
                    *, matrix_builder=None) -> ComparisonReport:
    """Run all applicable engines on one scenario and score the agreement."""
    builder = matrix_builder or chain.build_transition_matrix
    space = chain.enumerate_states(cfg)
    matrix = builder(cfg, space)
    pi = chain.solve_steady_state(matrix)
    analysis_r = chain.throughput(pi, space, cfg)

    matrix_diff = None
    if (cfg.num_data_channels <= oracle.MAX_ORACLE_CHANNELS
            and max(sum(s) for s in space.states) <= oracle.MAX_ORACLE_CONNECTIONS):
        reference = oracle.oracle_transition_matrix(cfg, space)
        matrix_diff = float(np.abs(matrix - reference).max())

    rep = simulator.run(cfg, slots, seed)
    rel = abs(rep.throughput_bps - analysis_r) / max(analysis_r, 1e-12)
    within_ci = abs(rep.throughput_bps - analysis_r) <= max(rep.throughput_ci, 1e-12)
    ok = rel <= AGREEMENT_TOLERANCE and (
        matrix_diff is None or matrix_diff <= MATRIX_TOLERANCE
    )
    return ComparisonReport(
        matrix_max_diff=matrix_diff,
        analysis_throughput=analysis_r,
        sim_throughput=rep.throughput_bps,
        sim_ci=rep.throughput_ci,
        relative_diff=rel,
        within_ci=within_ci,
        ok=ok,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osabond",
        description="Markov-chain analysis, brute-force verification, and "
                    "Monte Carlo simulation of channel-bonding OSA MACs.",
    )
    parser.add_argument("--scenario", help="scenario file (key = value lines)")
    parser.add_argument("--preset", choices=PRESETS, help="canned experiment")
    parser.add_argument("--list-presets", action="store_true")
    parser.add_argument("--sweep", help="param=start:stop:step or param=v1,v2,...")
    parser.add_argument("--engine", choices=("analysis", "sim", "oracle", "all"),
                        default="analysis")
    parser.add_argument("--slots", type=int, default=200_000,
                        help="slots per simulation point")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--reps", type=int, default=1,
                        help="independent simulation repetitions per point")
    parser.add_argument("--warmup", type=int, default=simulator.DEFAULT_WARMUP)
    parser.add_argument("--batches", type=int, default=simulator.DEFAULT_BATCHES)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="-", help="CSV output path ('-' = stdout)")
    parser.add_argument("--emit-gnuplot", action="store_true",
                        help="also write <out>.gp with a starter plot script")
    parser.add_argument("--compare", action="store_true",
                        help="cross-check engines on the scenario and exit")
    parser.add_argument("--dump-matrix", metavar="PATH",
                        help="write the transition matrix as row,col,probability")
    parser.add_argument("--trace", metavar="PATH",
                        help="simulate the scenario once and write the per-slot "
                             "event trace")
    return parser


def _engine_tuple(name: str, cfg: ScenarioConfig) -> tuple[str, ...]:
    if name != "all":
        return (name,)
    engines = ["analysis", "sim"]
    if cfg.num_data_channels <= oracle.MAX_ORACLE_CHANNELS:
        engines.append("oracle")
    return tuple(engines)


def _main(argv) -> int:
    args = _build_parser().parse_args(argv)
    if args.list_presets:
        for name in PRESETS:
            print(name)
        return 0

    if args.preset:
        spec = build_preset(args.preset)
        spec = dataclasses.replace(spec, seed=args.seed)
        if args.slots != 200_000:
            spec = dataclasses.replace(spec, slots=args.slots)
        if args.reps != 1:
            spec = dataclasses.replace(spec, reps=args.reps)
    else:
        if not args.scenario:
            print("error: need --scenario or --preset", file=sys.stderr)
            return 2
        cfg = load_scenario(args.scenario)
        if args.compare:
            report = compare_engines(cfg, slots=args.slots, seed=args.seed)
            diff = ("n/a" if report.matrix_max_diff is None
                    else f"{report.matrix_max_diff:.3e}")
            print(f"matrix max |analysis - oracle|: {diff}")
            print(f"analysis throughput: {report.analysis_throughput:.6g} b/s")
            print(f"simulated throughput: {report.sim_throughput:.6g} "
                  f"+- {report.sim_ci:.3g} b/s")
            print(f"relative difference: {report.relative_diff * 100:.3f}% "
                  f"(within CI: {report.within_ci})")
            print("verdict:", "ok" if report.ok else "TOLERANCE VIOLATED")
            return 0 if report.ok else 1
        if args.dump_matrix:
            if args.engine == "oracle":
                matrix = oracle.oracle_transition_matrix(cfg)
            else:
                matrix = chain.build_transition_matrix(cfg)
            chain.dump_matrix_csv(matrix, args.dump_matrix)
            return 0
        if args.trace:
            rep = simulator.run(cfg, args.slots, args.seed,
                                warmup=args.warmup, batches=args.batches,
                                trace_slots=args.slots)
            rep.trace.write(args.trace)
            return 0
        if not args.sweep:
            print("error: need --sweep, --compare, --dump-matrix or --preset",
                  file=sys.stderr)
            return 2
        param, values = parse_sweep(args.sweep)
        spec = SweepSpec(
            base=cfg, param=param, values=values,
            variants=(("", {}, _engine_tuple(args.engine, cfg)),),
            slots=args.slots, seed=args.seed, reps=args.reps,
        )

    rows = run_sweep(spec, warmup=args.warmup, batches=args.batches,
                     workers=args.workers)
    if args.out == "-":
        write_csv(rows, spec, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            write_csv(rows, spec, fh)
        if args.emit_gnuplot:
            write_gnuplot(args.out + ".gp", args.out)
    return 0


def main(argv=None) -> int:
    try:
        code = _main(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (CapacityError, ConvergenceError, SingularError) as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    return code


if __name__ == "__main__":
    sys.exit(main())
