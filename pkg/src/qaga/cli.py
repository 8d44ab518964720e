"""Command-line entry point: ``qaga {gen,solve,exact,bench-a,bench-b}``.

Set ``QAGA_WORKERS`` to spread sampling reads or benchmark problems over
several workers; results do not depend on it.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from qaga import benchgen, io
from qaga.exceptions import ContractError
from qaga.greedy import solve_compare
from qaga.samplers import SamplerConfig, default_workers, exact_ground_state

METHOD_NAMES = {"qa": "QA", "mqc": "MQC", "qaga": "QAGA"}


def _fmt_energy(e: float) -> str:
    return f"{e:.9f}"


def _sampler_flags(p):
    p.add_argument("--reads", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweeps", type=int, default=None, help="default: 10 x active variables")
    p.add_argument("--beta0", type=float, default=0.1)
    p.add_argument("--beta1", type=float, default=10.0)
    p.add_argument("--gauges", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qaga", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random problem file")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--sparsity", type=float, default=1.0)
    p.add_argument("--dist", choices=benchgen.DISTRIBUTIONS, default="normal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zero-bias", action="store_true")
    p.add_argument("--out", required=True, help="problem file to write")

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("problem")
    p.add_argument("--method", choices=sorted(METHOD_NAMES), default="qaga")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--backend", choices=("sa", "exact"), default="sa")
    p.add_argument("--max-stages", type=int, default=None)
    _sampler_flags(p)
    p.add_argument("--out", default=None, help="directory for assignment, trace and config")

    p = sub.add_parser("exact", help="enumerate the ground state (small problems only)")
    p.add_argument("problem")
    p.add_argument("--out", default=None, help="file for the ground-state assignment")

    for name in ("bench-a", "bench-b"):
        p = sub.add_parser(name, help=f"run experiment {name[-1].upper()} from a JSON config")
        p.add_argument("config")
        p.add_argument("--out", default=None, help="report directory (overrides the config)")
    return parser


def _assignment_json(z) -> str:
    return json.dumps({"assignment": [[i, s] for i, s in sorted(z.items())]}, indent=1) + "\n"


def _cmd_gen(args):
    spec = benchgen.ProblemSpec(args.n, args.sparsity, args.dist, args.seed, args.zero_bias)
    H = benchgen.gen_random(spec)
    io.write_problem(H, args.out)
    echo = {"command": "gen", "n": args.n, "sparsity": args.sparsity, "dist": args.dist,
            "seed": args.seed, "zero_bias": args.zero_bias, "out": args.out}
    print("config: " + json.dumps(echo, sort_keys=True))
    print(f"couplers: {len(H.J)}")


def _cmd_solve(args):
    H = io.read_problem(args.problem)
    method = METHOD_NAMES[args.method]
    cfg = SamplerConfig(args.reads, args.seed, args.sweeps, args.beta0, args.beta1, args.gauges)
    results = solve_compare(
        H,
        [method],
        sampler_cfg=cfg,
        theta=args.theta,
        backend=args.backend,
        max_stages=args.max_stages,
        workers=default_workers(),
    )
    res = results[method]
    echo = {
        "command": "solve",
        "problem": args.problem,
        "method": args.method,
        "theta": args.theta,
        "backend": args.backend,
        "max_stages": args.max_stages if args.max_stages else H.num_variables,
        "sampler": cfg.as_dict(),
        "root_sweeps": cfg.resolved(H.num_variables).sweeps,
    }
    print("config: " + json.dumps(echo, sort_keys=True))
    if res.trace is not None:
        print(f"stages: {res.trace.total_stages}")
    print(f"reads: {res.reads}")
    print(f"energy: {_fmt_energy(res.energy)}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "assignment.json").write_text(_assignment_json(res.assignment))
        (out / "config.json").write_text(json.dumps(echo, indent=1, sort_keys=True) + "\n")
        if res.trace is not None:
            (out / "trace.csv").write_text(io.format_trace(res.trace))


def _cmd_exact(args):
    H = io.read_problem(args.problem)
    z, e = exact_ground_state(H)
    print("config: " + json.dumps({"command": "exact", "problem": args.problem}, sort_keys=True))
    print(f"energy: {_fmt_energy(e)}")
    if args.out:
        Path(args.out).write_text(_assignment_json(z))


def _cmd_bench(args):
    try:
        doc = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ContractError(f"cannot read config {args.config}: {exc}") from exc
    doc.setdefault("workers", default_workers())
    cfg = benchgen.ExperimentConfig.from_dict(doc)
    out = args.out or cfg.output
    if not out:
        raise ContractError("no output directory: pass --out or set 'output' in the config")
    if args.command == "bench-a":
        report = benchgen.run_experiment_a(cfg)
    else:
        report = benchgen.run_experiment_b(cfg)
    benchgen.write_report(report, out)
    print("config: " + json.dumps(report.config, sort_keys=True))
    for row in report.summary:
        print(",".join(str(row[k]) for k in row))


COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "exact": _cmd_exact,
    "bench-a": _cmd_bench,
    "bench-b": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except (ContractError, OSError, IndexError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    return 0


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
