"""Command-line front end: ``ubmfield <group> <command> [flags]``.

Settings are merged as defaults < JSON ``--config`` file < explicit flags.
Exit codes: 0 success, 1 statistical failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from typing import Optional, Sequence

from . import experiments as ex

log = logging.getLogger("ubmfield")

EXIT_OK, EXIT_STAT_FAIL, EXIT_INVALID = 0, 1, 2


def _ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _number(tok: str) -> float:
    """A float, or a multiple of pi written as 'pi', '-pi', '0.5pi'."""
    tok = tok.strip()
    if tok.endswith("pi"):
        head = tok[:-2]
        scale = {"": 1.0, "-": -1.0, "+": 1.0}.get(head)
        return math.pi * (float(head) if scale is None else scale)
    return float(tok)


def _points(text: str) -> tuple:
    """'dt:dtheta[:K];...', e.g. '0.5:1:100;0:pi:1000000'."""
    out = []
    for chunk in filter(None, text.split(";")):
        parts = chunk.split(":")
        try:
            vals = [_number(p) for p in parts]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad point {chunk!r}") from None
        out.append(tuple(vals[:2]) + tuple(int(v) for v in vals[2:]))
    return tuple(out)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# flag name -> (dest, type, help); only the flags a command declares are added
_FLAGS = {
    "n": ("n", int, "matrix dimension"),
    "n-list": ("n", _ints, "comma-separated matrix dimensions"),
    "sigma": ("sigma", _ints, "comma-separated nonzero integer exponents"),
    "k": ("k", _ints, "comma-separated trace powers"),
    "t-grid": ("t_grid", _floats, "comma-separated record times"),
    "dt": ("dt", float, "integrator step"),
    "reps": ("reps", int, "Monte Carlo replicas"),
    "seed": ("seed", int, "master seed"),
    "s": ("s", float, "time regularity"),
    "eps": ("eps", float, "circle regularity"),
    "K": ("K", int, "Fourier truncation"),
    "T": ("T", float, "time horizon"),
    "workers": ("workers", int, "worker processes"),
    "mode": ("mode", str, "finite or limit"),
    "num-times": ("num_times", int, "time grid points"),
    "substeps": ("substeps", int, "integrator steps per grid interval"),
    "points": ("points", _points, "points as 'dt:dtheta[:K];...'"),
}

_COMMANDS = {
    ("wick", "eval"): (ex.WickEvalConfig, ["sigma"]),
    ("wick", "verify"): (ex.WickVerifyConfig, ["sigma", "n", "reps", "seed"]),
    ("ubm", "cov-check"): (ex.CovCheckConfig, ["n", "k", "t-grid", "dt", "reps", "seed", "workers"]),
    ("field", "sample"): (ex.FieldSampleConfig, ["mode", "n", "K", "T", "t-grid", "dt", "reps", "seed", "workers"]),
    ("sobolev", "scan"): (ex.SobolevScanConfig, ["n-list", "s", "eps", "K", "T", "num-times", "substeps", "reps", "seed", "workers"]),
    ("gff", "check"): (ex.GffCheckConfig, ["K", "points"]),
}

_RUNNERS = {
    ("wick", "eval"): ex.run_wick_eval,
    ("wick", "verify"): ex.run_wick_verify,
    ("ubm", "cov-check"): ex.run_cov_check,
    ("field", "sample"): ex.run_field_sample,
    ("sobolev", "scan"): ex.run_sobolev_scan,
    ("gff", "check"): ex.run_gff_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ubmfield", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)
    subs = {}
    for group, cmd in _COMMANDS:
        if group not in subs:
            subs[group] = groups.add_parser(group).add_subparsers(dest="command", required=True, parser_class=_Parser)
        p = subs[group].add_parser(cmd)
        for flag in _COMMANDS[group, cmd][1]:
            dest, typ, help_ = _FLAGS[flag]
            name = "--n" if flag == "n-list" else f"--{flag}"
            # default None so that unset flags never override the config file
            p.add_argument(name, dest=dest, type=typ, default=None, help=help_)
        if (group, cmd) != ("wick", "eval"):
            p.add_argument("--out", default=None, help="CSV path (default: stdout)")
            p.add_argument("--config", default=None, help="JSON file with default settings")
    return parser


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ex.ConfigError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _make_config(key, args) -> object:
    cls, flags = _COMMANDS[key]
    allowed = {_FLAGS[f][0] for f in flags}
    merged = _load_config(getattr(args, "config", None))
    unknown = set(merged) - allowed
    if unknown:
        raise ex.ConfigError(f"unknown config keys: {sorted(unknown)}")
    for dest in allowed:
        value = getattr(args, dest, None)
        if value is not None:
            merged[dest] = value
    for dest in ("sigma", "k", "t_grid", "n", "points"):
        if isinstance(merged.get(dest), list):
            merged[dest] = tuple(tuple(p) if isinstance(p, list) else p for p in merged[dest])
    try:
        return cls(**merged)
    except TypeError as exc:
        # missing required field such as the seed
        raise ex.ConfigError(str(exc).split(".__init__() ")[-1]) from None


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors exit 2, --help exits 0
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    key = (args.group, args.command)
    try:
        cfg = _make_config(key, args)
    except (ex.ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"ubmfield: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID

    start = time.perf_counter()
    result = _RUNNERS[key](cfg)
    if isinstance(result, str):
        print(result)
        return EXIT_OK
    log.info("%s %s finished in %.2f s", *key, time.perf_counter() - start)
    text = result.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not result.passed:
        log.warning("statistical check failed")
        return EXIT_STAT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
