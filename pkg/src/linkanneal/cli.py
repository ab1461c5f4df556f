"""Command-line harness: check, solve, zeno, compare, compile."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .classical import UNSAT_WITH_CONFIDENCE, anneal
from .config import BUDGET_EXHAUSTED, SOLVED, UNSAT_EVIDENCE, EngineConfig
from .netlang import NetlangError, compile_cnf, parse_dimacs, parse_network, serialize_network
from .network import bitstring, validate_network
from .oneway import anneal_one_way, zeno_scan
from .twoway import relax_two_way

SCHEMA_VERSION = 1
ENGINES = ("classical", "oneway", "twoway")
EXIT_OK, EXIT_IO, EXIT_UNSAT, EXIT_BUDGET = 0, 1, 2, 3
_VERDICT_EXIT = {
    SOLVED: EXIT_OK,
    UNSAT_EVIDENCE: EXIT_UNSAT,
    UNSAT_WITH_CONFIDENCE: EXIT_UNSAT,
    BUDGET_EXHAUSTED: EXIT_BUDGET,
}


def _say(args, *msg):
    if not getattr(args, "quiet", False):
        print(*msg)


def _err(*msg):
    print(*msg, file=sys.stderr)


def load_network(path):
    """Network from a native net file, or compiled on the fly from a .cnf file."""
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".cnf"):
        return compile_cnf(parse_dimacs(text))
    return parse_network(text)


def engine_config(args, **extra) -> EngineConfig:
    cfg = EngineConfig(seed=args.seed, dt=args.dt, sigma=args.sigma, bath=not args.no_bath)
    if args.max_steps is not None:
        cfg = cfg.replace(max_steps=args.max_steps, max_iters=args.max_steps)
    return cfg.replace(**extra)


def run_engine(net, engine: str, cfg: EngineConfig, seed):
    """Run one engine; returns (trace, verdict, assignment, iterations, final_energy, hitting)."""
    rng = np.random.default_rng(seed)
    if engine == "classical":
        out, trace = anneal(net, cfg, rng)
        hit = out.iterations if out.verdict == SOLVED else None
        return trace, out.verdict, out.assignment, out.iterations, out.final_energy, hit
    if engine == "oneway":
        trace, out = anneal_one_way(net, cfg, rng)
        hit = out.steps if out.verdict == SOLVED else None
        return trace, out.verdict, out.assignment, out.steps, out.final_energy, hit
    if engine == "twoway":
        trace, out = relax_two_way(net, cfg, rng)
        # a measurement returns a solution with probability >= 1/2 from this step on
        hit = out.half_solution_step if out.verdict == SOLVED else None
        return trace, out.verdict, out.assignment, out.steps, out.final_energy, hit
    raise ValueError(f"unknown engine {engine!r}")


# -- subcommands ------------------------------------------------------------------------


def cmd_check(args) -> int:
    try:
        text = Path(args.net).read_text(encoding="utf-8")
        net = parse_network(text, validate=False)
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    except NetlangError as exc:
        _err(f"{args.net}:{exc}")
        return EXIT_IO
    report = validate_network(net)
    if not report.ok:
        for v in report.violations:
            _err(f"{args.net}: {v}")
        return EXIT_IO
    _say(args, f"{args.net}: valid ({net.n} nodes, {len(net.links)} links, "
               f"{len(net.gates)} gates, {len(net.constraints)} constraints)")
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        net = load_network(args.net)
    except (OSError, NetlangError) as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    cfg = engine_config(args)
    trace, verdict, assignment, iters, energy, _ = run_engine(net, args.engine, cfg, args.seed)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        trace_path = out / "trace.csv"
        trace_path.write_text(trace.to_csv(), encoding="utf-8")
        summary = {
            "schema_version": SCHEMA_VERSION,
            "engine": args.engine,
            "seed": args.seed,
            "verdict": verdict,
            "iterations": int(iters),
            "final_energy": float(energy),
            "solution": bitstring(assignment) if verdict == SOLVED else None,
            "trace_path": str(trace_path),
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    _say(args, f"{args.engine}: {verdict} after {iters} iterations"
               + (f", solution {summary['solution']}" if summary["solution"] else ""))
    return _VERDICT_EXIT[verdict]


def cmd_zeno(args) -> int:
    if not args.n:
        _err("error: need at least one n")
        return EXIT_IO
    try:
        rows = zeno_scan(args.theta, args.phi, args.n)
    except ValueError as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    try:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "deviation", "scaled"])
            for n, dev, scaled in rows:
                w.writerow([n, repr(dev), repr(scaled)])
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    for n, dev, scaled in rows:
        _say(args, f"n={n:>8d}  deviation={dev:.6e}  n*angle={scaled:.6f}")
    return EXIT_OK


def _compare_job(job):
    text, is_cnf, engine, cfg, seed = job
    net = compile_cnf(parse_dimacs(text)) if is_cnf else parse_network(text)
    _, _, _, _, _, hit = run_engine(net, engine, cfg, seed)
    return engine, hit


def hitting_stats(hits) -> dict:
    """Median and quartiles of hitting times; unsolved runs count as +inf."""
    arr = np.array([np.inf if h is None else float(h) for h in hits])
    q25, med, q75 = (np.quantile(arr, q, method="lower") for q in (0.25, 0.5, 0.75))
    return {"runs": int(arr.size), "solved": int(np.isfinite(arr).sum()),
            "median": float(med), "q25": float(q25), "q75": float(q75)}


def cmd_compare(args) -> int:
    engines = args.engines.split(",")
    bad = [e for e in engines if e not in ENGINES]
    if bad or not engines:
        _err(f"error: unknown engines {bad}")
        return EXIT_IO
    try:
        text = Path(args.net).read_text(encoding="utf-8")
        is_cnf = args.net.endswith(".cnf")
        compile_cnf(parse_dimacs(text)) if is_cnf else parse_network(text)
    except (OSError, NetlangError) as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    cfg = engine_config(args)
    seeds = [np.random.SeedSequence([args.seed, i]) for i in range(args.runs)]
    jobs = [(text, is_cnf, e, cfg, s) for e in engines for s in seeds]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_compare_job, jobs))
    else:
        results = [_compare_job(j) for j in jobs]
    # single aggregator; results come back in job order
    rows = []
    for e in engines:
        stats = hitting_stats([hit for eng, hit in results if eng == e])
        rows.append({"engine": e, **stats})
    try:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["engine", "runs", "solved", "median", "q25", "q75"])
            for r in rows:
                w.writerow([r["engine"], r["runs"], r["solved"], repr(r["median"]), repr(r["q25"]), repr(r["q75"])])
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    for r in rows:
        _say(args, f"{r['engine']:>9s}: solved {r['solved']}/{r['runs']}, median {r['median']}, "
                   f"IQR [{r['q25']}, {r['q75']}]")
    return EXIT_OK


def cmd_compile(args) -> int:
    try:
        f = parse_dimacs(Path(args.cnf).read_text(encoding="utf-8"))
    except (OSError, NetlangError) as exc:
        _err(f"{args.cnf}: {exc}")
        return EXIT_IO
    try:
        Path(args.out).write_text(serialize_network(compile_cnf(f)), encoding="utf-8")
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    _say(args, f"wrote {args.out} ({f.num_vars} variables, {len(f.clauses)} clauses)")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-steps", type=int, default=None, help="step / proposal budget")
    common.add_argument("--dt", type=float, default=0.1)
    common.add_argument("--sigma", type=float, default=1.0, help="relaxation rate of every element")
    common.add_argument("--out", default=None)
    common.add_argument("--no-bath", action="store_true", help="disable the heat bath")
    common.add_argument("--quiet", action="store_true")

    p = argparse.ArgumentParser(prog="linkanneal", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="parse and validate a net file")
    s.add_argument("net")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("solve", parents=[common], help="run one engine on a net (or .cnf) file")
    s.add_argument("net")
    s.add_argument("--engine", choices=ENGINES, default="twoway")
    s.set_defaults(func=cmd_solve, out_default="run")

    s = sub.add_parser("zeno", parents=[common], help="Zeno scan of repeated rotate-and-project")
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--phi", type=float, default=np.pi / 4)
    s.add_argument("--n", type=int, nargs="+", default=[100, 1000, 10000])
    s.set_defaults(func=cmd_zeno, out_default="zeno.csv")

    s = sub.add_parser("compare", parents=[common], help="hitting-time statistics per engine")
    s.add_argument("net")
    s.add_argument("--engines", default=",".join(ENGINES))
    s.add_argument("--runs", type=int, default=50)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_compare, out_default="compare.csv")

    s = sub.add_parser("compile", parents=[common], help="compile DIMACS CNF into a net file")
    s.add_argument("cnf")
    s.set_defaults(func=cmd_compile, out_default="out.net")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.out is None:
        args.out = getattr(args, "out_default", None)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
