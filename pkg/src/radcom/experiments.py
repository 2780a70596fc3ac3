"""Monte Carlo harness and CLI: threshold sweeps, CSV output, verification.

Seed discipline: run ``i`` of a sweep draws its channel from
``base_seed + i``, so every solver and every threshold sees the same
channel realizations.  All model outputs are reproducible bit-for-bit for
a fixed base seed; per-run wall time is the one inherently non-reproducible
column in the per-run CSV.

Summary semantics: ``mean_sinr_db`` is the dB value of the average linear
SINR over runs; ``mean_secrecy_bits`` is the arithmetic mean of the
achieved rates (zero for infeasible runs, by the accounting convention of
the solvers).  For the overlap solver the threshold and the achieved rate
are per block of ``block_len`` uses; divide by ``block_len`` for per-use
values.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .convex_core import SolverOptions
from .nonoverlap import SolveResult, algorithm1, algorithm2
from .overlap import ao_overlap
from .scenario import ScenarioConfig, build_operators, sample_channel
from .secrecy import SecrecyConstraintParams

__all__ = [
    "SweepSpec",
    "TradeoffPoint",
    "RunRecord",
    "run_sweep",
    "emit_csv",
    "cli_main",
    "main",
]

SOLVERS = ("alg1", "alg2", "overlap")
SINR_DB_FLOOR = -300.0

SUMMARY_HEADER = "solver,r_m,mean_sinr_db,mean_secrecy_bits,feasible_fraction,runs"
PERRUN_HEADER = "solver,r_m,seed,sinr_db,secrecy_bits,feasible,outer_iters,runtime_ms"

log = logging.getLogger("radcom")


@dataclass(frozen=True)
class SweepSpec:
    config: ScenarioConfig
    thresholds: tuple
    n_runs: int = 100
    base_seed: int = 0
    solvers: tuple = ("alg2",)
    opts: SolverOptions = SolverOptions()
    jobs: int = 1

    def __post_init__(self):
        if not self.thresholds or any(t < 0 for t in self.thresholds):
            raise ValueError("thresholds must be non-empty and non-negative")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        bad = set(self.solvers) - set(SOLVERS)
        if bad:
            raise ValueError(f"unknown solver: {sorted(bad)[0]}")


@dataclass(frozen=True)
class TradeoffPoint:
    solver: str
    r_m: float
    mean_sinr_db: float
    mean_achieved_secrecy: float
    feasible_fraction: float
    runs: int
    runtime_ms: float  # total solver wall time at this point


@dataclass(frozen=True)
class RunRecord:
    solver: str
    r_m: float
    seed: int
    sinr: float
    sinr_db: float
    secrecy_bits: float
    feasible: bool
    outer_iters: int
    runtime_ms: float
    status: str


def sinr_to_db(sinr: float) -> float:
    if sinr <= 0:
        return SINR_DB_FLOOR
    return 10.0 * math.log10(sinr)


def solve_one(cfg: ScenarioConfig, solver: str, r_m: float, seed: int,
              opts: SolverOptions | None = None,
              trace_sink=None) -> SolveResult:
    """One seeded solve; the channel is drawn from ``seed`` directly."""
    opts = opts or SolverOptions()
    chan = sample_channel(cfg, seed)
    ops = build_operators(cfg)
    if solver == "overlap":
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0xA0)))
        return ao_overlap(cfg, chan, r_m, opts=opts, ops=ops, rng=rng,
                          trace_sink=trace_sink)
    params = SecrecyConstraintParams.create(r_m, cfg.sigma2_r, cfg.sigma2_c,
                                            cfg.n_rr, cfg.n_cr)
    fn = algorithm1 if solver == "alg1" else algorithm2
    return fn(cfg, chan, params, opts=opts, ops=ops, trace_sink=trace_sink)


def _run_task(args) -> RunRecord:
    cfg_json, solver, r_m, seed, opts = args
    cfg = ScenarioConfig.from_json(cfg_json)
    t0 = time.perf_counter()
    try:
        res = solve_one(cfg, solver, r_m, seed, opts)
    except Exception as exc:  # individual failures never abort the sweep
        log.error("run failed: solver=%s r_m=%s seed=%s: %s",
                  solver, r_m, seed, exc)
        return RunRecord(solver=solver, r_m=r_m, seed=seed, sinr=0.0,
                         sinr_db=SINR_DB_FLOOR, secrecy_bits=0.0,
                         feasible=False, outer_iters=0,
                         runtime_ms=(time.perf_counter() - t0) * 1e3,
                         status=f"error: {exc}")
    dt = (time.perf_counter() - t0) * 1e3
    return RunRecord(solver=solver, r_m=r_m, seed=seed, sinr=res.sinr,
                     sinr_db=sinr_to_db(res.sinr),
                     secrecy_bits=res.achieved_secrecy,
                     feasible=res.feasible, outer_iters=res.outer_iters,
                     runtime_ms=dt, status=res.status)


def run_sweep(spec: SweepSpec) -> tuple[list[TradeoffPoint], list[RunRecord]]:
    """Sweep thresholds and seeds for each solver; aggregate tradeoff points.

    Deterministic for a fixed ``base_seed`` regardless of worker count:
    records are sorted by ``(solver, r_m, seed)`` before aggregation.
    """
    cfg_json = spec.config.to_json()
    tasks = [(cfg_json, solver, float(r_m), spec.base_seed + i, spec.opts)
             for solver in spec.solvers
             for r_m in spec.thresholds
             for i in range(spec.n_runs)]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=4))
    else:
        records = [_run_task(t) for t in tasks]
    records.sort(key=lambda r: (r.solver, r.r_m, r.seed))

    points = []
    for solver in sorted(set(r.solver for r in records)):
        for r_m in sorted(set(r.r_m for r in records if r.solver == solver)):
            group = [r for r in records if r.solver == solver and r.r_m == r_m]
            mean_lin = sum(r.sinr for r in group) / len(group)
            points.append(TradeoffPoint(
                solver=solver, r_m=r_m, mean_sinr_db=sinr_to_db(mean_lin),
                mean_achieved_secrecy=sum(r.secrecy_bits for r in group)
                / len(group),
                feasible_fraction=sum(1 for r in group if r.feasible)
                / len(group),
                runs=len(group),
                runtime_ms=sum(r.runtime_ms for r in group)))
    return points, records


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def emit_csv(points: list[TradeoffPoint], records: list[RunRecord],
             out_dir: str) -> tuple[str, str]:
    """Write ``summary.csv`` and ``runs.csv``; returns their paths."""
    summary_path = os.path.join(out_dir, "summary.csv")
    runs_path = os.path.join(out_dir, "runs.csv")
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(summary_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(SUMMARY_HEADER + "\n")
            for p in points:
                f.write(",".join([
                    p.solver, _fmt(p.r_m), _fmt(p.mean_sinr_db),
                    _fmt(p.mean_achieved_secrecy), _fmt(p.feasible_fraction),
                    str(p.runs)]) + "\n")
        with open(runs_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(PERRUN_HEADER + "\n")
            for r in records:
                f.write(",".join([
                    r.solver, _fmt(r.r_m), str(r.seed), _fmt(r.sinr_db),
                    _fmt(r.secrecy_bits), "1" if r.feasible else "0",
                    str(r.outer_iters), _fmt(r.runtime_ms)]) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results under {out_dir!r}: {exc}") from exc
    return summary_path, runs_path


# --------------------------------------------------------------------------
# CLI
# --------------------------------------------------------------------------

_SNR_NOTE = (
    "Conventions: noise variances default to 1; gains follow the per-element "
    "SNR mapping |gamma_d|^2 = 10^(snr_direct_db/10)*sigma2_r, |gamma_t|^2 = "
    "10^(snr_surv_db/10)*sigma2_r, per-element CR channel variance "
    "10^(snr_comm_db/10)*sigma2_c. Steering phase law: exp(1j*pi*k*sin(theta)). "
    "Overlap thresholds/rates are per block; divide by block_len for per-use.")


def _load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as f:
        return ScenarioConfig.from_json(f.read())


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    spec = SweepSpec(config=cfg,
                     thresholds=tuple(float(t) for t in
                                      args.thresholds.split(",")),
                     n_runs=args.runs, base_seed=args.seed,
                     solvers=tuple(args.solvers.split(",")),
                     opts=SolverOptions(), jobs=args.jobs)
    points, records = run_sweep(spec)
    summary_path, runs_path = emit_csv(points, records, args.out)
    log.info("wrote %s and %s", summary_path, runs_path)
    for p in points:
        print(f"{p.solver} r_m={p.r_m:g}: mean SINR {p.mean_sinr_db:.3f} dB, "
              f"mean secrecy {p.mean_achieved_secrecy:.4f} bits, "
              f"feasible {p.feasible_fraction:.2f}")
    return 0


def _cmd_solve_one(args) -> int:
    cfg = _load_config(args.config)
    t0 = time.perf_counter()
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as sink:
            res = solve_one(cfg, args.solver, args.r_m, args.seed,
                            trace_sink=sink)
    else:
        res = solve_one(cfg, args.solver, args.r_m, args.seed)
    dt = (time.perf_counter() - t0) * 1e3
    doc = {
        "solver": args.solver,
        "r_m": args.r_m,
        "seed": args.seed,
        "feasible": res.feasible,
        "status": res.status,
        "sinr": res.sinr,
        "sinr_db": sinr_to_db(res.sinr),
        "secrecy_bits": res.achieved_secrecy,
        "secrecy_bits_per_use": (res.achieved_secrecy / cfg.block_len
                                 if args.solver == "overlap"
                                 else res.achieved_secrecy),
        "p_r": res.p_r,
        "tr_q_c": float(np.trace(res.q_c).real),
        "outer_iters": res.outer_iters,
        "inner_iters_total": res.inner_iters_total,
        "runtime_ms": dt,
        "q_c": [[[v.real, v.imag] for v in row] for row in res.q_c],
        "s_r": [[v.real, v.imag] for v in res.s_r],
    }
    print(json.dumps(doc, indent=2))
    # infeasibility is a valid outcome, not a solver error
    return 1 if res.status == "not_converged" or res.status.startswith("error") else 0


def _cmd_verify(args) -> int:
    from .verify import run_verification
    return run_verification(verbose=not args.quiet)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radcom",
        description="Radar-SINR vs. secrecy-rate tradeoff experiments",
        epilog=_SNR_NOTE)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="threshold sweep over seeded runs")
    p_sweep.add_argument("--config", required=True, help="scenario JSON path")
    p_sweep.add_argument("--thresholds", required=True,
                         help="comma-separated r_m values (bits)")
    p_sweep.add_argument("--runs", type=int, default=100)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--solvers", default="alg2",
                         help="comma-separated subset of alg1,alg2,overlap")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_one = sub.add_parser("solve-one", help="single seeded instance as JSON")
    p_one.add_argument("--config", required=True)
    p_one.add_argument("--r-m", dest="r_m", type=float, required=True)
    p_one.add_argument("--seed", type=int, default=0)
    p_one.add_argument("--solver", default="alg2", choices=SOLVERS)
    p_one.add_argument("--trace", default=None,
                       help="write per-iteration JSON lines to this path")
    p_one.set_defaults(fn=_cmd_solve_one)

    p_verify = sub.add_parser("verify", help="run the self-check suite")
    p_verify.add_argument("--quiet", action="store_true")
    p_verify.set_defaults(fn=_cmd_verify)
    return parser


def cli_main(argv=None) -> int:
    level = os.environ.get("RADCOM_LOG_LEVEL", "error").lower()
    logging.basicConfig(
        level={"error": logging.ERROR, "info": logging.INFO,
               "debug": logging.DEBUG}.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
