"""Command line: ``calsim run | sweep | scenarios | verify``.

Exit codes: 0 success, 1 configuration error, 2 invariant-suite failure.
Reports go to ``--out``, else the config's ``output``, else
``$CALSIM_OUTPUT_DIR/<config name>.<format>`` (current directory if unset).
"""
import argparse
import os
import re
import sys

from ..errors import ConfigError
from .config import load_config
from .io import emit_report
from .runner import run_experiment, run_sweep
from .scenarios import scenario_catalog
from .verify import run_verification

OUTPUT_DIR_ENV = "CALSIM_OUTPUT_DIR"


def parse_vary(spec):
    """``n=2^10..2^17`` (geometric, doubling) or ``n=1000,2000`` into ``("n", [values])``."""
    name, sep, rhs = spec.partition("=")
    if not sep or name.strip() != "n":
        raise ConfigError(f"--vary: only 'n=...' is supported, got {spec!r}")
    rhs = rhs.strip()
    m = re.fullmatch(r"2\^(\d+)\.\.2\^(\d+)", rhs)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise ConfigError(f"--vary: empty range {rhs!r}")
        return "n", [2**k for k in range(lo, hi + 1)]
    try:
        values = [int(v) for v in rhs.split(",")]
    except ValueError:
        raise ConfigError(f"--vary: expected 2^a..2^b or a comma list of integers, got {rhs!r}") from None
    return "n", values


def _output_path(args, cfg, fmt):
    if args.out:
        return args.out
    if cfg.output:
        return cfg.output
    stem = os.path.splitext(os.path.basename(args.config))[0]
    return os.path.join(os.environ.get(OUTPUT_DIR_ENV, "."), f"{stem}.{fmt}")


def _check_workers(args):
    if args.workers is not None and args.workers < 1:
        raise ConfigError(f"--workers: must be a positive integer, got {args.workers}")


def _cmd_run(args):
    _check_workers(args)
    cfg = load_config(args.config)
    fmt = args.format or cfg.format
    reports = run_experiment(cfg, workers=args.workers)
    path = _output_path(args, cfg, fmt)
    emit_report(reports, path, fmt)
    print(f"wrote {len(reports)} reports to {path}")
    return 0


def _cmd_sweep(args):
    _check_workers(args)
    cfg = load_config(args.config)
    fmt = args.format or cfg.format
    _, values = parse_vary(args.vary)
    reports = run_sweep(cfg, values, workers=args.workers)
    path = _output_path(args, cfg, fmt)
    emit_report(reports, path, fmt)
    print(f"wrote {len(reports)} reports over n in {values} to {path}")
    return 0


def _cmd_scenarios(args):
    for s in scenario_catalog():
        params = ", ".join(f"{k}={v}" for k, v in s.defaults.items())
        print(f"{s.name}({params}): {s.description}")
    return 0


def _cmd_verify(args):
    results = run_verification(seed=args.seed)
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail}")
    return 0 if all(r.ok for r in results) else 2


def build_parser():
    parser = argparse.ArgumentParser(prog="calsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "run one experiment"), ("sweep", "run an experiment over a grid of n")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--workers", type=int)
        if name == "sweep":
            p.add_argument("--vary", required=True, help="e.g. n=2^10..2^17")
    sub.add_parser("scenarios", help="list built-in scenarios")
    p = sub.add_parser("verify", help="run the oracle-invariant suite")
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "sweep": _cmd_sweep, "scenarios": _cmd_scenarios,
               "verify": _cmd_verify}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
