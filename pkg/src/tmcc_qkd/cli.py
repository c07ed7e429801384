"""Command-line front end: ``tmcc-qkd {state-info,entropy-curve,qber-curve,simulate}``.

Every option can also come from a ``--config`` file of ``key = value`` lines
(``#`` starts a comment). Keys are the long option names with or without
the leading dashes; flags given on the command line win.

Exit codes: 0 success, 2 usage or validation error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, TextIO

import numpy as np

from . import __version__
from .alphabet import alphabet_entropy, alphabet_for_state
from .eavesdrop import Estimator, ResendSource, analytic_qber, lambda_for_mean
from .exceptions import TmccError
from .photon_stats import (
    TmccState,
    build_distribution,
    mandel_q,
    max_info,
    mean_photon_number,
    variance,
)
from .simulation import SessionConfig, run_session, simulate_slots

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

_ALPHABET_COLUMNS = {"2": "H2", "4": "H4", "8": "H8", "max": "Hmax"}
_ESTIMATORS = {"paper-literal": Estimator.PAPER_LITERAL, "weighted": Estimator.PROBABILITY_WEIGHTED}
_ATTACKS = {"none": None, "clone-tmcc": ResendSource.TMCC, "clone-poisson": ResendSource.POISSON}


def _fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{x:.6f}"


def _nonneg_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"expected a finite nonnegative number, got {text!r}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(f"expected a positive integer, got {text!r}")
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return value


def _alphabets(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in items if t not in _ALPHABET_COLUMNS]
    if not items or bad:
        raise ValueError(f"alphabets must be a comma list drawn from 2,4,8,max; got {text!r}")
    # columns always come out in the fixed header order
    return [k for k in _ALPHABET_COLUMNS if k in items]


def _choice(options: dict) -> Callable[[str], str]:
    def convert(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {sorted(options)}, got {text!r}")
        return text

    return convert


def _alphabet_size(text: str) -> int:
    value = int(text)
    if value not in (2, 4, 8):
        raise ValueError(f"alphabet size must be 2, 4 or 8, got {text!r}")
    return value


@dataclass(frozen=True)
class _Option:
    flags: tuple[str, ...]
    convert: Callable[[str], object]
    default: object
    help: str


_OPTIONS = {
    "lam": _Option(("--lambda",), _nonneg_float, None, "TMCC parameter |lambda|"),
    "lambda_min": _Option(("--lambda-min",), _nonneg_float, 0.0, "sweep start"),
    "lambda_max": _Option(("--lambda-max",), _nonneg_float, 16.0, "sweep end"),
    "points": _Option(("--points",), _positive_int, 81, "number of sweep points (>= 2)"),
    "x_axis": _Option(
        ("--x-axis",),
        _choice({"lambda": 0, "mean": 0}),
        "lambda",
        "space sweep points evenly in lambda or in mean photon number",
    ),
    "alphabets": _Option(("--alphabets",), _alphabets, "2,4,8,max", "columns among 2,4,8,max"),
    "m": _Option(("--m",), _alphabet_size, 2, "alphabet size 2, 4 or 8"),
    "source": _Option(("--source",), _choice({"tmcc": 0, "poisson": 0}), "tmcc", "Eve's resend source"),
    "estimator": _Option(("--estimator",), _choice(_ESTIMATORS), "weighted", "QBER estimator"),
    "slots": _Option(("--slots",), _positive_int, 100000, "number of time slots"),
    "seed": _Option(("--seed",), _seed, 0, "unsigned 64-bit seed"),
    "attack": _Option(("--attack",), _choice(_ATTACKS), "none", "eavesdropping attack"),
    "workers": _Option(("--workers",), _positive_int, 1, "parallel workers"),
    "out": _Option(("--out",), str, None, "output path (default: standard output)"),
}

_COMMAND_OPTIONS = {
    "state-info": ["lam", "out"],
    "entropy-curve": ["lambda_min", "lambda_max", "points", "x_axis", "alphabets", "workers", "out"],
    "qber-curve": [
        "lambda_min", "lambda_max", "points", "x_axis", "m", "source", "estimator", "workers", "out",
    ],
    "simulate": ["lam", "m", "slots", "seed", "attack", "workers", "out"],
}


class _Usage(Exception):
    pass


def _argtype(convert: Callable[[str], object]) -> Callable[[str], object]:
    def wrapped(text: str) -> object:
        try:
            return convert(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    wrapped.__name__ = convert.__name__.lstrip("_")
    return wrapped


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmcc-qkd",
        description="Large-alphabet QKD over two-mode coherently correlated beams.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "state-info": "photon statistics of one TMCC state",
        "entropy-curve": "CSV of alphabet entropies over a lambda sweep",
        "qber-curve": "CSV of clone-attack error rates over a lambda sweep",
        "simulate": "Monte Carlo key-distribution session",
    }
    for name, keys in _COMMAND_OPTIONS.items():
        p = sub.add_parser(name, help=helps[name])
        for key in keys:
            opt = _OPTIONS[key]
            # None default marks "not given" so config values can fill in
            p.add_argument(*opt.flags, dest=key, type=_argtype(opt.convert), default=None, help=opt.help)
        p.add_argument("--config", default=None, help="file of key = value lines")
        if name == "simulate":
            p.add_argument(
                "--dump",
                action="store_true",
                help="write per-slot CSV (slot,n_alice,n_bob,letter_alice,letter_bob) to --out",
            )
    return parser


def _read_config(path: str, allowed: list[str]) -> dict[str, object]:
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[config]\n" + fh.read(), source=path)
    except OSError as exc:
        raise _Usage(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise _Usage(f"malformed config {path}: {exc}") from None
    by_flag = {}
    for key in allowed:
        for flag in _OPTIONS[key].flags:
            by_flag[flag.lstrip("-")] = key
            by_flag[flag.lstrip("-").replace("-", "_")] = key
    values: dict[str, object] = {}
    for raw_key, raw_value in parser["config"].items():
        key = by_flag.get(raw_key.lstrip("-"))
        if key is None:
            raise _Usage(f"unknown config key {raw_key!r} for this command")
        try:
            values[key] = _OPTIONS[key].convert(raw_value.strip())
        except ValueError as exc:
            raise _Usage(f"config key {raw_key!r}: {exc}") from None
    return values


def _resolve(args: argparse.Namespace) -> dict[str, object]:
    keys = _COMMAND_OPTIONS[args.command]
    values = {k: _OPTIONS[k].default for k in keys}
    if args.config:
        values.update(_read_config(args.config, keys))
    values.update({k: getattr(args, k) for k in keys if getattr(args, k) is not None})
    if isinstance(values.get("alphabets"), str):
        values["alphabets"] = _alphabets(values["alphabets"])
    return values


@contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _sweep_lambdas(opts: dict) -> list[float]:
    lo, hi, points = opts["lambda_min"], opts["lambda_max"], opts["points"]
    if points < 2:
        raise _Usage("--points must be at least 2")
    if not lo < hi:
        raise _Usage("--lambda-min must be smaller than --lambda-max")
    grid = np.linspace(lo, hi, points)
    if opts["x_axis"] == "mean":
        return [lambda_for_mean(float(x)) for x in grid]
    return [float(x) for x in grid]


def _parallel_map(fn, items, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _cmd_state_info(opts: dict, out: TextIO) -> None:
    if opts["lam"] is None:
        raise _Usage("--lambda is required")
    state = TmccState(opts["lam"])
    dist = build_distribution(state)
    mean = mean_photon_number(state)
    q = mandel_q(state) if mean > 0 else None
    lines = [
        ("lambda", _fmt(state.lam)),
        ("mean", _fmt(mean)),
        ("variance", _fmt(variance(state))),
        ("mandel_q", "undefined" if q is None else _fmt(q)),
        ("max_info_bits", _fmt(max_info(state))),
        ("n_max", str(state.n_max)),
        ("tail_mass", f"{dist.tail_mass:.3e}"),
    ]
    for key, value in lines:
        out.write(f"{key}: {value}\n")


def _entropy_row(lam: float, columns: list[str]) -> list[str]:
    state = TmccState(lam)
    row = [_fmt(lam), _fmt(mean_photon_number(state))]
    for col in columns:
        row.append(_fmt(max_info(state) if col == "max" else alphabet_entropy(state, int(col))))
    return row


def _cmd_entropy_curve(opts: dict, out: TextIO) -> None:
    columns = opts["alphabets"]
    rows = _parallel_map(lambda lam: _entropy_row(lam, columns), _sweep_lambdas(opts), opts["workers"])
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["lambda", "mean"] + [_ALPHABET_COLUMNS[c] for c in columns])
    writer.writerows(rows)


def _qber_row(lam: float, m: int, source: str, estimator: Estimator) -> list[str]:
    state = TmccState(lam)
    report = analytic_qber(state, m, source, estimator)
    return [
        _fmt(lam),
        _fmt(mean_photon_number(state)),
        _fmt(report.p_err),
        _fmt(report.p_err_per_bit),
        _fmt(report.p_err_per_bit_hamming),
    ]


def _cmd_qber_curve(opts: dict, out: TextIO) -> None:
    estimator = _ESTIMATORS[opts["estimator"]]
    rows = _parallel_map(
        lambda lam: _qber_row(lam, opts["m"], opts["source"], estimator),
        _sweep_lambdas(opts),
        opts["workers"],
    )
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["lambda", "mean", "p_err_letter", "p_err_bit_eq14", "p_err_bit_hamming"])
    writer.writerows(rows)


def _cmd_simulate(opts: dict, dump: bool) -> None:
    if opts["lam"] is None:
        raise _Usage("--lambda is required")
    if dump and opts["out"] is None:
        raise _Usage("--dump needs --out <path> for the per-slot CSV")
    config = SessionConfig(
        lam=opts["lam"],
        alphabet_size=opts["m"],
        slots=opts["slots"],
        seed=opts["seed"],
        attack=_ATTACKS[opts["attack"]],
    )
    result = run_session(config, workers=opts["workers"])
    spec = alphabet_for_state(TmccState(config.lam), config.alphabet_size)
    q = result.empirical_mandel_q
    lines = [
        ("lambda", _fmt(config.lam)),
        ("alphabet_size", str(config.alphabet_size)),
        ("center", str(spec.center)),
        ("attack", opts["attack"]),
        ("seed", str(config.seed)),
        ("slots", str(result.slots)),
        ("letter_errors", str(result.letter_errors)),
        ("letter_error_rate", _fmt(result.letter_error_rate)),
        ("bit_error_rate_eq14", _fmt(result.bit_error_rate_eq14)),
        ("bit_error_rate_hamming", _fmt(result.bit_error_rate_hamming)),
        ("empirical_mean", _fmt(result.empirical_mean)),
        ("empirical_mandel_q", "undefined" if math.isnan(q) else _fmt(q)),
        ("empirical_letter_freq", ",".join(_fmt(f) for f in result.empirical_letter_freq)),
    ]
    for key, value in lines:
        sys.stdout.write(f"{key}: {value}\n")
    if dump:
        n_a, n_b, l_a, l_b = simulate_slots(config)
        with _output(opts["out"]) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["slot", "n_alice", "n_bob", "letter_alice", "letter_bob"])
            writer.writerows(zip(range(config.slots), n_a.tolist(), n_b.tolist(), l_a.tolist(), l_b.tolist()))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = _resolve(args)
        if args.command == "simulate":
            _cmd_simulate(opts, args.dump)
        else:
            handler = {
                "state-info": _cmd_state_info,
                "entropy-curve": _cmd_entropy_curve,
                "qber-curve": _cmd_qber_curve,
            }[args.command]
            with _output(opts["out"]) as out:
                handler(opts, out)
    except (_Usage, ValueError) as exc:
        print(f"tmcc-qkd {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TmccError, RuntimeError, ArithmeticError, OSError) as exc:
        print(f"tmcc-qkd {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
