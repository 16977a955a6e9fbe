"""Command-line front end: scenario generation, solving, and verification.

Configuration lives in one JSON document; every field can be overridden by
a flag of the same name. All randomness flows from the single ``seed``
field, so any command is reproducible from (config, seed) alone. Exit
codes: 0 success, 1 configuration error, 2 non-convergence, 3 transport or
backend failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import data as bundled
from . import mock_annealer, reference
from .admm import AdmmConfig, BlockPartition, partition_by_unit, run_qphr_admm
from .benders import build_master, run_benders
from .errors import (
    EncodingRangeError,
    NumericalError,
    ParameterError,
    RemoteProtocolError,
    RemoteVerificationError,
    SizeLimitError,
    TransportError,
)
from .model import load_instance, num_commitment_vars, validate_instance
from .phr import PhrState, run_qphr_alm
from .qubo import BinaryEncoding, Qubo
from .samplers import SaSchedule, make_sampler, solve_exhaustive, solve_sa
from .scenarios import (
    TurbinePowerCurve,
    build_scenario_set,
    load_scenario_set,
    save_scenario_set,
    validate_scenario_set,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NO_CONVERGENCE = 2
EXIT_BACKEND = 3

BUNDLED_INSTANCES = ("tiny", "reference")


@dataclass
class RunConfig:
    """Every knob a command can consume, with working defaults.

    ``instance`` and ``scenarios`` accept file paths; ``instance`` also
    accepts the bundled names ``tiny`` and ``reference``. When ``scenarios``
    is omitted the bundled set is used for bundled instances and a fresh
    set is sampled from the generation fields otherwise.
    """

    instance: str | None = None
    scenarios: str | None = None
    # bound encoding
    chi: float = 2.0
    levels: int = 8
    # penalty schedule; sigma0=None auto-scales per master problem
    sigma0: float | None = None
    eta: float = 1.05
    delta: float = 0.01
    master_max_iter: int = 100
    block: str = "unit"  # "unit" or an integer uniform block size
    monolithic: bool = False
    # sampler backend
    sampler: str = "exhaustive"
    sa_sweeps: int = 1000
    sa_restarts: int = 20
    endpoint: str | None = None
    auth: str | None = None
    reads: int = 100
    timeout: float = 30.0
    # outer loop
    gap_tol: float = 1e-3
    max_k: int = 20
    # scenario generation
    wind_shape: float = 2.0
    wind_scale: float = 6.0
    cut_in: float = 3.0
    rated_speed: float = 11.0
    cut_out: float = 25.0
    rated_power: float = 0.6
    load_alpha: float = 2.5
    load_beta: float = 2.5
    load_min: float = 9.0
    load_max: float = 11.4
    n_scenarios: int = 10
    horizon: int = 6
    # bookkeeping
    out: str = "out"
    seed: int = 0


_CONFIG_FIELDS = {f.name for f in fields(RunConfig)}


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Config file first, then non-None flag values on top."""
    doc = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise ParameterError(f"config {path} must hold a JSON object")
        unknown = sorted(set(doc) - _CONFIG_FIELDS)
        if unknown:
            raise ParameterError(f"unknown config fields: {', '.join(unknown)}")
    cfg = RunConfig(**doc)
    applied = {k: v for k, v in overrides.items() if k in _CONFIG_FIELDS and v is not None}
    return replace(cfg, **applied)


def make_sampler_from_config(cfg: RunConfig):
    if cfg.sampler == "exhaustive":
        return make_sampler("exhaustive")
    if cfg.sampler == "sa":
        return make_sampler(
            "sa", sweeps=cfg.sa_sweeps, restarts=cfg.sa_restarts, seed=cfg.seed
        )
    if cfg.sampler == "remote":
        if not cfg.endpoint:
            raise ParameterError("remote sampler needs an endpoint")
        return make_sampler(
            "remote",
            endpoint=cfg.endpoint,
            auth=cfg.auth,
            reads=cfg.reads,
            timeout=cfg.timeout,
        )
    raise ParameterError(f"unknown sampler backend {cfg.sampler!r}")


def _load_problem(cfg: RunConfig):
    """Resolve the instance/scenario pair the config describes."""
    name = cfg.instance if cfg.instance is not None else "reference"
    if name in BUNDLED_INSTANCES:
        inst, scen = getattr(bundled, name)()
        if cfg.scenarios is not None:
            scen = load_scenario_set(cfg.scenarios)
    else:
        inst = load_instance(name)
        if cfg.scenarios is not None:
            scen = load_scenario_set(cfg.scenarios)
        else:
            scen = _generate_scenarios(cfg, horizon=inst.horizon)
    problems = validate_instance(inst) + validate_scenario_set(scen)
    if problems:
        raise ParameterError("; ".join(problems))
    return inst, scen


def _generate_scenarios(cfg: RunConfig, horizon: int | None = None):
    turbine = TurbinePowerCurve(
        cut_in=cfg.cut_in,
        rated_speed=cfg.rated_speed,
        cut_out=cfg.cut_out,
        rated_power=cfg.rated_power,
    )
    return build_scenario_set(
        wind_shape=cfg.wind_shape,
        wind_scale=cfg.wind_scale,
        turbine=turbine,
        load_alpha=cfg.load_alpha,
        load_beta=cfg.load_beta,
        load_min=cfg.load_min,
        load_max=cfg.load_max,
        n_scenarios=cfg.n_scenarios,
        horizon=cfg.horizon if horizon is None else horizon,
        seed=cfg.seed,
    )


def _partition(cfg: RunConfig, inst, enc: BinaryEncoding) -> BlockPartition:
    if cfg.block == "unit":
        return partition_by_unit(inst.n_units, inst.horizon, enc.levels)
    try:
        size = int(cfg.block)
    except ValueError:
        raise ParameterError(
            f"block must be 'unit' or an integer size, got {cfg.block!r}"
        ) from None
    return BlockPartition.uniform(num_commitment_vars(inst) + enc.levels, size)


def cmd_generate(cfg: RunConfig, output: str | None) -> int:
    scen = _generate_scenarios(cfg)
    target = Path(output) if output else Path(cfg.out) / "scenarios.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    save_scenario_set(scen, target)
    print(f"wrote {len(scen)} scenarios over {scen.horizon} periods to {target}")
    return EXIT_OK


def _write_benders_csv(trace, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["k", "bitstring", "lb", "ub_candidate", "best_ub", "gap",
             "master_converged", "cut_constant"]
        )
        for r in trace.rows:
            w.writerow(
                [r.k, r.bitstring, f"{r.lb:.10g}", f"{r.ub_candidate:.10g}",
                 f"{r.best_ub:.10g}", f"{r.gap:.10g}", int(r.master_converged),
                 "" if r.cut_constant is None else f"{r.cut_constant:.10g}"]
            )


def _write_final_master_trace(cfg, inst, enc, cuts, sampler, path: Path) -> None:
    """Penalty-loop trace for the final cut set, for plotting convergence."""
    objective, constraints = build_master(inst, enc, cuts)
    rows = []
    if cfg.monolithic:
        state = PhrState.fresh(
            len(constraints),
            sigma0=cfg.sigma0 if cfg.sigma0 is not None else 0.3,
            eta=cfg.eta,
            delta=cfg.delta,
            max_iter=cfg.master_max_iter,
        )
        outcome = run_qphr_alm(objective, constraints, state, sampler)
        for r in outcome.trace:
            rows.append([r.iteration, "", r.bitstring, f"{r.residual:.10g}", f"{r.sigma:.10g}"])
    else:
        part = _partition(cfg, inst, enc)
        zeros = np.zeros(objective.n, dtype=np.uint8)
        g0 = max((abs(c.value(zeros)) for c in constraints), default=1.0)
        sigma0 = cfg.sigma0 if cfg.sigma0 is not None else 1.0 / max(g0, 1.0)
        admm_cfg = AdmmConfig(
            sigma0=sigma0, eta=cfg.eta, delta=cfg.delta, max_sweeps=cfg.master_max_iter
        )
        outcome = run_qphr_admm(objective, constraints, part, admm_cfg, sampler)
        for r in outcome.trace:
            rows.append([r.sweep, r.block, r.bitstring, f"{r.residual:.10g}", f"{r.sigma:.10g}"])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "block", "bitstring", "residual", "sigma"])
        w.writerows(rows)


def _write_dispatch_csvs(inst, scen, u_best, out_dir: Path, tol: float) -> None:
    from .subqp import build_subproblem, solve_dispatch

    for h, scenario in enumerate(scen.scenarios):
        sol = solve_dispatch(build_subproblem(inst, scenario, u_best), tol=tol)
        with open(out_dir / f"dispatch_{h}.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            header = ["t", "load", "wind", "net_load"]
            header += [f"p_{g.id}" for g in inst.generators]
            header += ["shed"]
            w.writerow(header)
            for t in range(inst.horizon):
                net = scenario.load[t] - scenario.wind[t]
                row = [t, f"{scenario.load[t]:.10g}", f"{scenario.wind[t]:.10g}", f"{net:.10g}"]
                row += [f"{sol.p_gen[g, t]:.10g}" for g in range(inst.n_units)]
                row += [f"{sol.p_shed[t]:.10g}"]
                w.writerow(row)


def cmd_solve(cfg: RunConfig) -> int:
    inst, scen = _load_problem(cfg)
    nt = num_commitment_vars(inst)
    enc = BinaryEncoding(chi=cfg.chi, levels=cfg.levels, base_index=nt)
    sampler = make_sampler_from_config(cfg)
    partition = _partition(cfg, inst, enc)

    start = time.perf_counter()
    trace = run_benders(
        inst,
        scen,
        enc,
        sampler,
        gap_tol=cfg.gap_tol,
        max_k=cfg.max_k,
        monolithic=cfg.monolithic,
        partition=partition,
        sigma0=cfg.sigma0,
        eta=cfg.eta,
        delta=cfg.delta,
        master_max_iter=cfg.master_max_iter,
    )
    elapsed = time.perf_counter() - start

    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = trace.to_dict()
    doc["wall_time"] = elapsed
    doc["encoding"] = {"chi": enc.chi, "levels": enc.levels}
    with open(out_dir / "result.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_benders_csv(trace, out_dir / "benders_trace.csv")
    _write_final_master_trace(cfg, inst, enc, trace.cuts, sampler, out_dir / "phr_trace.csv")
    if trace.u_best is not None:
        _write_dispatch_csvs(inst, scen, trace.u_best, out_dir, tol=1e-6)

    status = "converged" if trace.converged else "iteration cap reached"
    print(
        f"{status}: k={trace.iterations} UB={trace.best_ub:.6g} LB={trace.lb:.6g} "
        f"gap={trace.gap:.3g} ({elapsed:.2f}s); outputs in {out_dir}"
    )
    return EXIT_OK if trace.converged else EXIT_NO_CONVERGENCE


def cmd_verify(cfg: RunConfig, sigma0: float | None, max_iter: int) -> int:
    """Pass/fail table for the bundled six-variable program.

    Four rows must land on their target bitstrings; two extra schedule
    probes confirm the fast schedule converges quickly and the known bad
    schedule is flagged instead of crashing. The probes characterize the
    block solver's schedule map, so they stay in block mode even when the
    rows run monolithic.
    """
    sampler = make_sampler_from_config(cfg)
    start = time.perf_counter()
    results = reference.run_all(
        sampler=sampler,
        sigma0=sigma0,
        eta=cfg.eta,
        delta=cfg.delta,
        max_iter=max_iter,
        monolithic=cfg.monolithic,
    )
    all_ok = True
    print(f"{'case':<20} {'schedule':<12} {'found':<8} {'target':<8} {'iters':>5}  status")
    for res in results:
        ok = res.matched
        all_ok &= ok
        s0 = res.row.sigma0 if sigma0 is None else sigma0
        print(
            f"{res.row.label:<20} s0={s0:<9g} {res.bitstring:<8} {res.row.target:<8} "
            f"{res.iterations:>5}  {'pass' if ok else 'FAIL'}"
        )

    row2 = reference.row_for_constraints(2)
    fast = reference.run_row(
        row2, sampler=sampler, sigma0=reference.FAST_SIGMA0, eta=reference.FAST_ETA,
        delta=cfg.delta, max_iter=max_iter,
    )
    fast_ok = fast.converged and fast.iterations <= 8
    all_ok &= fast_ok
    print(
        f"{'fast schedule':<20} s0={reference.FAST_SIGMA0:<9g} {fast.bitstring:<8} "
        f"{'(conv<=8)':<8} {fast.iterations:>5}  {'pass' if fast_ok else 'FAIL'}"
    )
    stall = reference.run_row(
        row2, sampler=sampler, sigma0=reference.STALL_SIGMA0, eta=reference.STALL_ETA,
        delta=cfg.delta, max_iter=max_iter,
    )
    stall_ok = not stall.converged
    all_ok &= stall_ok
    print(
        f"{'stalling schedule':<20} s0={reference.STALL_SIGMA0:<9g} {stall.bitstring:<8} "
        f"{'(flag)':<8} {stall.iterations:>5}  {'pass' if stall_ok else 'FAIL'}"
    )
    print(f"{'all pass' if all_ok else 'FAILURES'} ({time.perf_counter() - start:.2f}s)")
    return EXIT_OK if all_ok else EXIT_NO_CONVERGENCE


def cmd_qubo_dump(cfg: RunConfig, output: str | None) -> int:
    """Emit the cut-free master QUBO and constraint layout as JSON.

    The ``qubo`` object is exactly the wire payload the remote sampler
    protocol accepts, so the dump can be POSTed to an annealer service
    directly.
    """
    inst, _ = _load_problem(cfg)
    nt = num_commitment_vars(inst)
    enc = BinaryEncoding(chi=cfg.chi, levels=cfg.levels, base_index=nt)
    objective, constraints = build_master(inst, enc, [])
    doc = {
        "qubo": objective.to_dict(),
        "constraints": [
            {"coeffs": {str(i): a for i, a in sorted(c.coeffs.items())}, "bound": c.bound}
            for c in constraints
        ],
        "encoding": {"chi": enc.chi, "levels": enc.levels, "base_index": enc.base_index},
        "n_commitment_vars": nt,
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        Path(output).write_text(text, encoding="utf-8")
        print(f"wrote master QUBO ({objective.n} variables) to {output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(cfg: RunConfig, sizes: list[int], repeats: int, output: str | None) -> int:
    """Time random-QUBO solves per size; energies are seed-deterministic."""
    if not sizes or min(sizes) < 1:
        raise ParameterError(f"sizes must be positive integers, got {sizes}")
    if repeats < 1:
        raise ParameterError(f"repeats must be >= 1, got {repeats}")
    if cfg.sampler == "remote":
        raise ParameterError("bench supports the exhaustive and sa backends only")
    target = Path(output) if output else Path(cfg.out) / "bench.csv"
    target.parent.mkdir(parents=True, exist_ok=True)
    # untimed warmup so the first measured row does not pay one-off costs
    warm = Qubo.from_terms(2, np.array([1.0, -1.0]), {(0, 1): 0.5}, 0.0)
    if cfg.sampler == "sa":
        solve_sa(warm, SaSchedule(sweeps=10, restarts=1, seed=0))
    else:
        solve_exhaustive(warm)
    rows = []
    for n in sizes:
        for rep in range(repeats):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, n, rep]))
            linear = rng.uniform(-10.0, 10.0, size=n)
            quad = {
                (i, j): float(rng.uniform(-10.0, 10.0))
                for i in range(n)
                for j in range(i + 1, n)
            }
            q = Qubo.from_terms(n, linear, quad, 0.0)
            if cfg.sampler == "sa":
                sched = SaSchedule(
                    sweeps=cfg.sa_sweeps, restarts=cfg.sa_restarts, seed=cfg.seed
                )
                solve = lambda: solve_sa(q, sched)
            else:
                solve = lambda: solve_exhaustive(q)
            # best-of-inner timing: microsecond solves need noise filtering
            inner = 50 if cfg.sampler == "exhaustive" else 1
            res = solve()
            best = float("inf")
            for _ in range(inner):
                start = time.perf_counter()
                solve()
                best = min(best, time.perf_counter() - start)
            rows.append([n, rep, f"{res.energy:.10g}", f"{best:.6g}"])
    with open(target, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "repeat", "energy", "seconds"])
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {target}")
    return EXIT_OK


def cmd_mock_annealer(host: str, port: int, corrupt_energy: bool) -> int:
    mock_annealer.serve(host, port, corrupt_energy)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Routes usage errors through the config-error exit code."""

    def error(self, message):
        raise ParameterError(message)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--instance", help="instance path, or bundled name: tiny, reference")
    p.add_argument("--scenarios", help="scenario set JSON path")
    p.add_argument("--chi", type=float, help="bound encoding precision")
    p.add_argument("--levels", type=int, help="bound encoding bit count")
    p.add_argument("--sigma0", type=float, help="initial penalty weight (default: auto)")
    p.add_argument("--eta", type=float, help="penalty growth factor")
    p.add_argument("--delta", type=float, help="residual stop tolerance")
    p.add_argument("--master-max-iter", dest="master_max_iter", type=int,
                   help="sweep/iteration cap per master solve")
    p.add_argument("--block", help="'unit' or a uniform block size")
    p.add_argument("--monolithic", action="store_true", default=None,
                   help="solve the master without block splitting")
    p.add_argument("--sampler", choices=["exhaustive", "sa", "remote"])
    p.add_argument("--sa-sweeps", dest="sa_sweeps", type=int)
    p.add_argument("--sa-restarts", dest="sa_restarts", type=int)
    p.add_argument("--endpoint", help="remote annealer URL")
    p.add_argument("--auth", help="remote bearer token")
    p.add_argument("--reads", type=int, help="remote sample reads")
    p.add_argument("--timeout", type=float, help="remote request timeout, seconds")
    p.add_argument("--gap-tol", dest="gap_tol", type=float)
    p.add_argument("--max-k", dest="max_k", type=int)
    p.add_argument("--wind-shape", dest="wind_shape", type=float)
    p.add_argument("--wind-scale", dest="wind_scale", type=float)
    p.add_argument("--cut-in", dest="cut_in", type=float)
    p.add_argument("--rated-speed", dest="rated_speed", type=float)
    p.add_argument("--cut-out", dest="cut_out", type=float)
    p.add_argument("--rated-power", dest="rated_power", type=float)
    p.add_argument("--load-alpha", dest="load_alpha", type=float)
    p.add_argument("--load-beta", dest="load_beta", type=float)
    p.add_argument("--load-min", dest="load_min", type=float)
    p.add_argument("--load-max", dest="load_max", type=float)
    p.add_argument("--n-scenarios", dest="n_scenarios", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsuc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[], help="sample a scenario set to JSON")
    _add_config_flags(p)
    p.add_argument("--output", help="target file (default: <out>/scenarios.json)")

    p = sub.add_parser("solve", help="run the decomposition end to end")
    _add_config_flags(p)

    p = sub.add_parser(
        "verify-paper",
        help="check the bundled six-variable program lands on its known optima",
    )
    _add_config_flags(p)
    p.add_argument("--row-max-iter", dest="row_max_iter", type=int, default=50,
                   help="iteration cap per verification row")

    p = sub.add_parser("qubo-dump", help="emit the cut-free master QUBO as JSON")
    _add_config_flags(p)
    p.add_argument("--output", help="target file (default: stdout)")

    p = sub.add_parser("bench", help="time random-QUBO solves across sizes")
    _add_config_flags(p)
    p.add_argument("--sizes", default="4,8,12", help="comma-separated variable counts")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--output", help="target file (default: <out>/bench.csv)")

    p = sub.add_parser("mock-annealer", help="serve the annealer wire protocol")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0)
    p.add_argument("--corrupt-energy", action="store_true",
                   help="misreport energies, for client verification tests")
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "mock-annealer":
        return cmd_mock_annealer(args.host, args.port, args.corrupt_energy)
    cfg = load_config(args.config, vars(args))
    if args.command == "generate":
        return cmd_generate(cfg, args.output)
    if args.command == "solve":
        return cmd_solve(cfg)
    if args.command == "verify-paper":
        return cmd_verify(cfg, sigma0=cfg.sigma0, max_iter=args.row_max_iter)
    if args.command == "qubo-dump":
        return cmd_qubo_dump(cfg, args.output)
    if args.command == "bench":
        sizes = [int(s) for s in str(args.sizes).split(",") if s.strip()]
        return cmd_bench(cfg, sizes, args.repeats, args.output)
    raise ParameterError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _dispatch(args)
    except (ParameterError, SizeLimitError, EncodingRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TransportError, RemoteProtocolError, RemoteVerificationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
