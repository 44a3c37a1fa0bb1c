"""Command-line front end: sweeps, margins, interaction ratios, validation.

Output files are written atomically (temp file, then rename) with LF line
endings and ``.9e`` scientific formatting, so identical inputs give byte
identical files.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .config import ParseError, ValidationError, build_system, parse_file
from .freq_core import (
    DivisionByZero, FreqExpr, FreqGrid, OpenCircuitEvaluation, constant, div,
    parallel, sweep,
)
from .network import TabulatedOutOfRange
from .stability import margins
from .tf_canon import (
    g_iio_back_current, g_vv_closed, g_vvc, loop_gain, open_loop, z_in_closed,
    z_out_terminated, z_out_unterminated,
)
from .validation import run_equivalence_suite

__all__ = ["main"]

_SWEEP_HEADER = "freq_hz,real,imag,mag_db,phase_deg_unwrapped"
_COEFF_HEADER = ("freq_hz,Ai_re,Ai_im,Bi_re,Bi_im,Ci_re,Ci_im,"
                 "Ao_re,Ao_im,Bo_re,Bo_im,Co_re,Co_im")
_EVAL_ERRORS = (DivisionByZero, OpenCircuitEvaluation, TabulatedOutOfRange)

_TF_CHOICES = {
    "gvvc": g_vvc,
    "zin": z_in_closed,
    "zo_un": z_out_unterminated,
    "zo_term": z_out_terminated,
    "gvv": g_vv_closed,
    "giio": g_iio_back_current,
}


class _Parser(argparse.ArgumentParser):
    """Usage problems exit with status 1 (2 is reserved for evaluation)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _mag_phase(samples: np.ndarray):
    with np.errstate(divide="ignore"):
        mag_db = 20.0 * np.log10(np.abs(samples))
    phase = np.degrees(np.unwrap(np.angle(samples)))
    return mag_db, phase


def _sweep_rows(freqs: np.ndarray, samples: np.ndarray) -> list[str]:
    mag_db, phase = _mag_phase(samples)
    return [f"{f:.9e},{v.real:.9e},{v.imag:.9e},{m:.9e},{p:.9e}"
            for f, v, m, p in zip(freqs, samples, mag_db, phase)]


def _sweep_csv(expr: FreqExpr, grid: FreqGrid):
    """CSV text plus an error message (None when the sweep completed)."""
    freqs = grid.frequencies
    try:
        samples = np.asarray(expr.eval(2j * np.pi * freqs))
        rows = _sweep_rows(freqs, samples)
        return "\n".join([_SWEEP_HEADER, *rows]) + "\n", None
    except _EVAL_ERRORS:
        pass
    # Re-run point by point so everything before the failure is kept.
    collected: list[complex] = []
    message = None
    for f in freqs:
        try:
            collected.append(complex(expr.eval(2j * np.pi * float(f))))
        except _EVAL_ERRORS as err:
            message = f"evaluation failed at {f:.6g} Hz: {err}"
            break
    kept = freqs[:len(collected)]
    rows = _sweep_rows(kept, np.asarray(collected)) if collected else []
    return "\n".join([_SWEEP_HEADER, *rows]) + "\n", message


def _load_built(args):
    config_path = os.path.abspath(args.config)
    doc = parse_file(config_path)
    return build_system(doc, base_dir=os.path.dirname(config_path))


def _grid_with_overrides(grid: FreqGrid, args) -> FreqGrid:
    f_min = args.fmin if args.fmin is not None else grid.f_min_hz
    f_max = args.fmax if args.fmax is not None else grid.f_max_hz
    ppd = args.ppd if args.ppd is not None else grid.points_per_decade
    return FreqGrid(f_min, f_max, ppd)


def _cmd_tf(args) -> int:
    built = _load_built(args)
    plant = open_loop(built.plant) if args.open_loop else built.plant
    expr = _TF_CHOICES[args.which](plant)
    grid = _grid_with_overrides(built.grid, args)
    text, message = _sweep_csv(expr, grid)
    _write_atomic(args.out, text)
    if message is not None:
        print(message, file=sys.stderr)
        return 2
    return 0


def _format_list(values) -> str:
    if not values:
        return "none"
    return ",".join(f"{v:.9e}" for v in values)


def _cmd_margins(args) -> int:
    built = _load_built(args)
    grid = built.grid
    if grid.points_per_decade < 50:
        grid = replace(grid, points_per_decade=50)
    loop = loop_gain(built.plant)
    report = margins(loop, grid)
    lines = [
        f"verdict = {report.verdict}",
        f"gain_crossover_hz = {_format_list(report.gain_crossover_hz)}",
        f"phase_margin_deg = {_format_list(report.phase_margin_deg)}",
        f"phase_crossover_hz = {_format_list(report.phase_crossover_hz)}",
        f"gain_margin_db = {_format_list(report.gain_margin_db)}",
        f"f_min_hz = {grid.f_min_hz:.9e}",
        f"f_max_hz = {grid.f_max_hz:.9e}",
        f"points_per_decade = {grid.points_per_decade}",
    ]
    _write_atomic(args.out, "\n".join(lines) + "\n")
    text, message = _sweep_csv(loop, grid)
    _write_atomic(f"{args.out}.sweep.csv", text)
    if message is not None:
        print(message, file=sys.stderr)
        return 2
    return 0


def _cmd_tmlg(args) -> int:
    source_path = os.path.abspath(args.source)
    source_doc = parse_file(source_path)
    source = build_system(source_doc, base_dir=os.path.dirname(source_path))
    if source.spec.input_filter is not None:
        z_source = source.spec.input_filter.z_parallel
    else:
        z_source = constant(0.0)  # stiff source: the ratio degenerates to zero

    z_load_in: FreqExpr | None = None
    for load_arg in args.load:
        load_path = os.path.abspath(load_arg)
        doc = parse_file(load_path)
        if doc.input_filter is not None:
            print(f"load config {load_arg} must not carry its own input "
                  "filter section: its input impedance is taken at the "
                  "filter interface", file=sys.stderr)
            return 1
        built = build_system(doc, base_dir=os.path.dirname(load_path))
        z_one = z_in_closed(built.plant)
        z_load_in = z_one if z_load_in is None else parallel(z_load_in, z_one)

    ratio = div(z_source, z_load_in)
    grid = source.grid
    text, message = _sweep_csv(ratio, grid)
    _write_atomic(args.out, text)
    if message is not None:
        print(message, file=sys.stderr)
        return 2
    samples = np.asarray(ratio.eval(2j * np.pi * grid.frequencies))
    mag_db, _ = _mag_phase(samples)
    peak = int(np.argmax(mag_db))
    report = [
        f"n_loads = {len(args.load)}",
        f"peak_freq_hz = {grid.frequencies[peak]:.9e}",
        f"peak_mag_db = {mag_db[peak]:.9e}",
    ]
    _write_atomic(f"{args.out}.report.txt", "\n".join(report) + "\n")
    return 0


def _cmd_validate(args) -> int:
    report = run_equivalence_suite(seed=args.seed, cases=args.cases)
    print(report.render())
    return 0 if report.passed else 2


def _cmd_coeffs(args) -> int:
    built = _load_built(args)
    freqs = built.grid.frequencies
    s = 2j * np.pi * freqs
    primed = built.primed
    columns = [np.broadcast_to(np.asarray(expr.eval(s)), freqs.shape)
               for expr in (primed.a_in, primed.b_in, primed.c_in,
                            primed.a_out, primed.b_out, primed.c_out)]
    rows = []
    for k, f in enumerate(freqs):
        parts = [f"{f:.9e}"]
        for col in columns:
            parts.append(f"{col[k].real:.9e}")
            parts.append(f"{col[k].imag:.9e}")
        rows.append(",".join(parts))
    _write_atomic(args.out, "\n".join([_COEFF_HEADER, *rows]) + "\n")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="iackit",
                     description="Converter and filter frequency-domain analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    tf = sub.add_parser("tf", help="sweep one canonical transfer function")
    tf.add_argument("--config", required=True)
    tf.add_argument("--which", required=True, choices=sorted(_TF_CHOICES))
    tf.add_argument("--open-loop", action="store_true", dest="open_loop")
    tf.add_argument("--fmin", type=float)
    tf.add_argument("--fmax", type=float)
    tf.add_argument("--ppd", type=int)
    tf.add_argument("--out", required=True)
    tf.set_defaults(handler=_cmd_tf)

    marg = sub.add_parser("margins", help="loop-gain crossovers and margins")
    marg.add_argument("--config", required=True)
    marg.add_argument("--out", required=True)
    marg.set_defaults(handler=_cmd_margins)

    tm = sub.add_parser("tmlg", help="source/load interaction ratio")
    tm.add_argument("--source", required=True)
    tm.add_argument("--load", required=True, action="append")
    tm.add_argument("--out", required=True)
    tm.set_defaults(handler=_cmd_tmlg)

    val = sub.add_parser("validate", help="randomized oracle equivalence suite")
    val.add_argument("--seed", type=int, default=1)
    val.add_argument("--cases", type=int, default=200)
    val.set_defaults(handler=_cmd_validate)

    co = sub.add_parser("coeffs", help="dump the six composed coefficients")
    co.add_argument("--config", required=True)
    co.add_argument("--out", required=True)
    co.set_defaults(handler=_cmd_coeffs)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    try:
        return args.handler(args)
    except (ParseError, ValidationError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 1
