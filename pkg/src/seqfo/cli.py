"""``seqfo`` command-line entry point.

Every ExperimentConfig key is also a flag (``--max-outer`` or ``--max_outer``);
flags override values read from ``--config``.
"""

import argparse
import logging
import sys
import typing
from dataclasses import fields

from . import harness
from .harness import ExperimentConfig

_BOOL_KEYS = {"emit_plot", "record_time"}
_SKIP_KEYS = {"out", "seed"}  # declared once as common options


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _scalar_type(f):
    if f.name in ("initial_input", "initial_state"):
        return _floats
    if f.name == "alpha":
        return lambda s: s if s == "auto" else float(s)
    base = f.type
    if isinstance(base, str):
        base = eval(base, vars(typing))  # noqa: S307  annotations are local literals
    args = [a for a in typing.get_args(base) if a is not type(None)]
    base = args[0] if args else base
    return base if base in (int, float, str) else str


def _flag_names(name):
    names = [f"--{name.replace('_', '-')}"]
    if "_" in name:
        names.append(f"--{name}")
    return names


def _add_common(p):
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    p.add_argument("--out", help="output directory")
    for f in fields(ExperimentConfig):
        if f.name in _SKIP_KEYS:
            continue
        if f.name in _BOOL_KEYS:
            p.add_argument(*_flag_names(f.name), dest=f.name, action="store_true", default=None)
        else:
            p.add_argument(*_flag_names(f.name), dest=f.name, type=_scalar_type(f), default=None)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="seqfo", description="Sequential feedback optimization experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [("run", "run one experiment"),
                       ("certify", "print the step-size certificate"),
                       ("sweep", "run one experiment per parameter value"),
                       ("compare-greedy", "compare a farm run with greedy control")]:
        p = sub.add_parser(name, help=text)
        _add_common(p)
        if name == "certify":
            p.add_argument("--T", dest="cert_T", type=int, default=None, help="inner loop length")
            p.add_argument("--estimate", action="store_true", help="estimate constants by sampling")
        if name == "sweep":
            p.add_argument("--param", required=True, choices=harness.SWEEP_PARAMS)
            p.add_argument("--values", required=True, type=_floats)
    return parser


def config_from_args(args):
    overrides = {f.name: getattr(args, f.name, None) for f in fields(ExperimentConfig)}
    return ExperimentConfig.from_file(args.config, **overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return harness.EXIT_FAILURE
    if args.command == "run":
        return harness.cmd_run(cfg)
    if args.command == "certify":
        T = args.cert_T if args.cert_T is not None else cfg.inner_T
        return harness.cmd_certify(cfg, T=T, estimate=args.estimate)
    if args.command == "sweep":
        values = [int(v) if args.param == "T" else v for v in args.values]
        return harness.cmd_sweep(cfg, args.param, values, jobs=args.jobs)
    return harness.cmd_compare_greedy(cfg)


if __name__ == "__main__":
    sys.exit(main())
