"""Command line front end: validate, calculus, model, axioms, detect, run.

Every flag can also be set through an environment variable named
``ABSINT_<FLAG>`` (upper case, dashes as underscores), e.g. ``ABSINT_Q=2``.
Flags given on the command line win over the environment.

Exit status: 0 ran and consistent, 1 input or usage error, 2 ran and the
RH verdict disagreed with the axiom checks.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .loaders import InputError
from .pipeline import DEFAULT_TOLERANCES, STAGES, RunConfig, run, to_json, to_markdown
from .spectral import SpectralError

ENV_PREFIX = "ABSINT_"

SUBCOMMANDS = {
    "validate": (),
    "calculus": ("calculus",),
    "model": ("model",),
    "axioms": ("axioms",),
    "detect": ("detect",),
    "run": STAGES,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors share exit status 1 with input errors
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _float_list(text: str) -> list:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _tolerance(text: str):
    name, sep, value = text.partition("=")
    if not sep or name not in DEFAULT_TOLERANCES:
        raise argparse.ArgumentTypeError(
            f"expected NAME=VALUE with NAME in {sorted(DEFAULT_TOLERANCES)}, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance value is not a number: {value!r}")


def _common(p: argparse.ArgumentParser):
    p.add_argument("input", nargs="?", default=_env("input"), type=Path,
                   help="operator JSON file or zero table (one ordinate per line)")
    p.add_argument("--input-kind", choices=["auto", "json", "zeros"], default=_env("input-kind", "auto"))
    p.add_argument("--q", type=float, default=float(_env("q", 4.0)))
    p.add_argument("--y-grid", type=_float_list, default=_float_list(_env("y-grid")) if _env("y-grid") else None,
                   help="cuts Y, comma separated (default: midpoints between consecutive |Im s|)")
    p.add_argument("--n-max", type=int, default=int(_env("n-max", 60)))
    p.add_argument("--n-detect", type=int, default=int(_env("n-detect", 500)))
    p.add_argument("--quadrature-nodes", type=int, default=int(_env("quadrature-nodes", 512)))
    p.add_argument("--lefschetz-n-max", type=int, default=int(_env("lefschetz-n-max", 20)))
    p.add_argument("--samples", type=int, default=int(_env("samples", 1000)))
    p.add_argument("--w2-dim", type=int, default=int(_env("w2-dim", 0)),
                   help="adjoin this many random complement directions to the span")
    p.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    p.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--format", choices=["json", "markdown"], default=_env("format", "json"))
    p.add_argument("--output", type=Path, default=_env("output"))
    p.add_argument("--allow-invalid", action="store_true",
                   default=_env("allow-invalid", "0") not in ("0", "", "false"))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="absint", description=__doc__.split("\n\n")[0],
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "validate": "check the operator axioms OP1-OP5",
        "calculus": "phi_Y(A) spectrally and by contour quadrature",
        "model": "IP conditions and the Lefschetz-type trace formula",
        "axioms": "INT1, INT2, the Castelnuovo-type inequality and the pairing identities",
        "detect": "power-sum RH-violation test per cut",
        "run": "all stages plus the overall equivalence check",
    }
    for name in SUBCOMMANDS:
        _common(sub.add_parser(name, help=helps[name]))
    return parser


def config_from_args(args) -> RunConfig:
    if args.input is None:
        raise UsageError("an input file is required")
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(dict(args.tol))
    try:
        return RunConfig(input_path=args.input, q=args.q, Y_grid=args.y_grid, n_max=args.n_max,
                         N_detect=args.n_detect, quadrature_nodes=args.quadrature_nodes,
                         seed=args.seed, samples=args.samples,
                         lefschetz_n_max=args.lefschetz_n_max, w2_dim=args.w2_dim,
                         tolerances=tolerances, output_format=args.format,
                         input_kind=args.input_kind, allow_invalid=args.allow_invalid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        report = run(cfg, SUBCOMMANDS[args.command])
    except (UsageError, InputError, SpectralError, OSError) as exc:
        print(f"absint: error: {exc}", file=sys.stderr)
        return 1
    text = to_json(report) if cfg.output_format == "json" else to_markdown(report)
    if args.output is not None:
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if report.get("status") == "invalid-operator":
        print("absint: error: operator fails: " + ", ".join(
            k for k, v in report["op_validation"]["verdicts"].items() if not v["passed"]), file=sys.stderr)
        return 1
    if args.command == "run" and not report["overall"]["equivalence_consistent"]:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
