"""Command line entry point: ``sccasupp {run,summarize,regime,lowdeg,bounds}``.

Exit codes: 0 success, 2 config or argument error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from sccasupp import bench, lowdeg, theory
from sccasupp.errors import ConfigError, SccaError

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _cmd_run(args):
    path = bench.shipped_config(args.preset) if args.preset else args.config
    cfg = bench.ExperimentConfig.load(path)
    if args.replications is not None:
        cfg.replications = args.replications
    if args.workers is not None:
        cfg.workers = args.workers
    out = args.output or cfg.output_path
    text = bench.emit_results(bench.run_experiment(cfg), out)
    if out is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {out}", file=sys.stderr)


def _cmd_summarize(args):
    try:
        text = Path(args.results).read_text()
    except OSError as exc:
        raise ConfigError(str(exc)) from None
    summary = bench.emit_summary(bench.summarize(bench.parse_results(text)), args.output)
    if args.output is None:
        sys.stdout.write(summary)


def _cmd_regime(args):
    report = theory.classify_regime(args.n, args.p, args.q, args.sx, args.sy)
    if args.json:
        print(json.dumps(report.as_dict()))
    else:
        print(report.regime.value)


def _cmd_lowdeg(args):
    cfg = lowdeg.LowDegConfig(
        n=args.n, p=args.p, q=args.q, s_x=args.sx, s_y=args.sy, b_const=args.B,
        degree=args.D, mc_samples=args.mc_samples, seed=args.seed,
    )
    est = lowdeg.lowdeg_norm_exact(cfg) if args.exact else lowdeg.lowdeg_norm_mc(cfg)
    if args.json:
        print(json.dumps({"value": est.value, "std_error": est.std_error, "method": est.method}))
    else:
        print(f"{est.method}: {est.value:.10g} (se {est.std_error:.3g})")


def _cmd_bounds(args):
    out = {
        "impossible_sparsity": theory.impossible_sparsity_predicate(args.n, args.p, args.s, args.B),
        "min_signal_threshold": theory.min_signal_threshold(args.n, args.p, args.s, args.B),
    }
    if args.json:
        print(json.dumps(out))
    else:
        print(f"impossible_sparsity: {out['impossible_sparsity']}")
        print(f"min_signal_threshold: {out['min_signal_threshold']:.10g}")


def build_parser():
    parser = argparse.ArgumentParser(prog="sccasupp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo experiment from a YAML config")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to an experiment config")
    src.add_argument("--preset", choices=["desk_scale", "full_scale"], help="use a shipped config")
    run.add_argument("--output", "-o", help="results CSV (default: config output_path or stdout)")
    run.add_argument("--replications", type=int)
    run.add_argument("--workers", type=int)
    run.set_defaults(func=_cmd_run)

    summ = sub.add_parser("summarize", help="per grid point means and standard errors")
    summ.add_argument("results")
    summ.add_argument("--output", "-o")
    summ.set_defaults(func=_cmd_summarize)

    reg = sub.add_parser("regime", help="classify (n, p, q, sx, sy) into a sparsity regime")
    for name in ("n", "p", "q", "sx", "sy"):
        reg.add_argument(f"--{name}", type=int, required=True)
    reg.add_argument("--json", action="store_true")
    reg.set_defaults(func=_cmd_regime)

    ld = sub.add_parser("lowdeg", help="truncated likelihood-ratio norm")
    for name in ("n", "p", "q", "sx", "sy", "D"):
        ld.add_argument(f"--{name}", type=int, required=True)
    ld.add_argument("--B", type=float, required=True)
    ld.add_argument("--mc-samples", type=int, default=100_000)
    ld.add_argument("--seed", type=int, default=0)
    ld.add_argument("--exact", action="store_true", help="exact evaluation instead of Monte Carlo")
    ld.add_argument("--json", action="store_true")
    ld.set_defaults(func=_cmd_lowdeg)

    bd = sub.add_parser("bounds", help="information-theoretic limits for (n, p, s, B)")
    for name in ("n", "p", "s"):
        bd.add_argument(f"--{name}", type=int, required=True)
    bd.add_argument("--B", type=float, required=True)
    bd.add_argument("--json", action="store_true")
    bd.set_defaults(func=_cmd_bounds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SccaError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
