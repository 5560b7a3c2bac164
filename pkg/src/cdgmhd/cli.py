"""Command-line front end.

Subcommands:

  run            execute one benchmark case, writing snapshots/diagnostics
  convergence    mesh-refinement study with l1 errors and observed orders
  verify         seeded property batteries, machine-readable summary
  breakdown      the constructed positivity failure of the source-free update

`run` takes an optional key=value config file; every key is also a flag
and flags win.  Exit codes: 0 success, 1 failed verification battery or
undemonstrated breakdown, 2 inadmissible/non-finite state, 3 bad
configuration, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config_file, make_config, parse_value
from .runner import EXIT_CONFIG, EXIT_IO, convergence_study, run
from .verification import CounterexampleFamily, fuzz_lemmas, run_counterexample, BATTERIES

_RUN_KEYS = (
    "problem", "nx", "ny", "k", "variant", "limiter", "source", "cfl",
    "cfl_mode", "theta", "t_end", "gamma", "out", "snapshot_every",
    "diag_every", "oversample", "seed", "max_steps", "resume",
    "checkpoint_every", "debug_pp",
)


def _add_config_flags(sp: argparse.ArgumentParser, keys=_RUN_KEYS) -> None:
    for key in keys:
        sp.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar="V")


def _overrides(args: argparse.Namespace, keys=_RUN_KEYS) -> dict:
    out = {}
    for key in keys:
        raw = getattr(args, key, None)
        if raw is not None:
            out[key] = parse_value(key, raw)
    return out


def _parse_levels(spec: str) -> list:
    levels = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        if "x" in item:
            a, b = item.split("x", 1)
            levels.append((int(a), int(b)))
        else:
            levels.append(int(item))
    return levels


def cmd_run(args: argparse.Namespace) -> int:
    file_values = load_config_file(args.config) if args.config else {}
    cfg = make_config(file_values, _overrides(args))
    result = run(cfg)
    if result.failure is not None:
        print(f"aborted ({result.failure['kind']}): {result.failure['message']}", file=sys.stderr)
    print(f"status={result.status} steps={result.steps} t={result.t:.6g} out={result.outdir}")
    return result.status


def cmd_convergence(args: argparse.Namespace) -> int:
    cfg = make_config({}, _overrides(args))
    levels = _parse_levels(args.levels)
    report = convergence_study(cfg, levels, reference=args.reference)
    table = report.table()
    if args.table:
        with open(args.table, "w", encoding="utf-8") as fh:
            fh.write(f"# problem={report.problem} reference={report.reference}\n")
            fh.write(table)
    print(f"problem={report.problem} reference={report.reference}")
    print(table, end="")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    report = fuzz_lemmas(seed=args.seed, n_samples=args.samples,
                         batteries=args.battery or None)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if report.passed else 1


def cmd_breakdown(args: argparse.Namespace) -> int:
    family = CounterexampleFamily(
        pressure=args.pressure, epsilon=args.epsilon, gamma=args.gamma,
        cfl_number=args.cfl_number, theta=args.theta,
    )
    report = run_counterexample(family, dx=args.dx)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if report.breakdown_demonstrated else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdgmhd",
        description="central DG solver for ideal MHD on overlapping meshes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", help="execute one benchmark case")
    sp.add_argument("config", nargs="?", default=None, help="key=value config file")
    _add_config_flags(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("convergence", help="mesh refinement study")
    sp.add_argument("--levels", default="10,20,40,80",
                    help="comma list of cell counts (ints or NXxNY)")
    sp.add_argument("--reference", default="advected",
                    choices=("advected", "stationary"),
                    help="exact state used for the error")
    sp.add_argument("--table", default=None, help="write the table to this CSV")
    _add_config_flags(sp)
    sp.set_defaults(func=cmd_convergence)

    sp = sub.add_parser("verify", help="run seeded property batteries")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--battery", action="append", choices=sorted(BATTERIES),
                    help="restrict to this battery (repeatable)")
    sp.add_argument("--out", default=None, help="also write the JSON report here")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("breakdown", help="constructed positivity failure")
    sp.add_argument("--pressure", type=float, default=1e-5)
    sp.add_argument("--epsilon", type=float, default=0.5)
    sp.add_argument("--gamma", type=float, default=5.0 / 3.0)
    sp.add_argument("--cfl-number", dest="cfl_number", type=float, default=8.0)
    sp.add_argument("--theta", type=float, default=1.0)
    sp.add_argument("--dx", type=float, default=0.1)
    sp.add_argument("--out", default=None, help="also write the JSON report here")
    sp.set_defaults(func=cmd_breakdown)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as err:
        # ConfigError included: bad flag values, bad parameter ranges
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
