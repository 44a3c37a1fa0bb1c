"""Loop-gain margins and source/load interaction ratios."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .freq_core import FreqExpr, FreqGrid, SweepResult, div, sweep

__all__ = ["MarginReport", "NyquistTrace", "margins", "nyquist", "tmlg"]

_MIN_POINTS_PER_DECADE = 50


@dataclass(frozen=True, eq=False)
class MarginReport:
    """Crossover frequencies and margins read off one loop-gain sweep.

    Margins are reported at every crossover found inside the grid span, in
    ascending frequency.  ``stable`` applies the usual minimum-phase reading:
    positive phase margin at some gain crossover and no negative gain margin
    at any phase crossover.
    """

    gain_crossover_hz: tuple[float, ...]
    phase_margin_deg: tuple[float, ...]
    phase_crossover_hz: tuple[float, ...]
    gain_margin_db: tuple[float, ...]
    stable: bool

    @property
    def verdict(self) -> str:
        if not self.gain_crossover_hz and not self.phase_crossover_hz:
            return "no-crossover"
        return "stable" if self.stable else "unstable"


@dataclass(frozen=True, eq=False)
class NyquistTrace:
    """Complex locus of a ratio along a frequency grid."""

    freq_hz: np.ndarray
    samples: np.ndarray


def _interp_crossing(f_lo: float, f_hi: float, y_lo: float, y_hi: float) -> float:
    """Zero crossing of y between two grid points, linear in log-frequency."""
    t = y_lo / (y_lo - y_hi)
    return float(f_lo * (f_hi / f_lo) ** t)


def _refine(expr: FreqExpr, f_a: float, f_b: float, y_a: float, y_b: float,
            measure) -> float:
    """One secant step on the bracketing pair, keeping opposite signs."""
    f_mid = _interp_crossing(f_a, f_b, y_a, y_b)
    y_mid = measure(expr, f_mid)
    if y_mid == 0.0:
        return f_mid
    if (y_a < 0.0) != (y_mid < 0.0):
        return _interp_crossing(f_a, f_mid, y_a, y_mid)
    return _interp_crossing(f_mid, f_b, y_mid, y_b)


def _mag_db_at(expr: FreqExpr, freq_hz: float) -> float:
    value = expr.eval(2j * np.pi * freq_hz)
    return float(20.0 * np.log10(abs(value)))


def margins(loop_tf: FreqExpr, grid: FreqGrid) -> MarginReport:
    """Sweep a loop gain and read every crossover and its margin.

    The grid must carry at least 50 points per decade: phase unwrapping and
    crossing detection both ride on sample density.
    """
    if grid.points_per_decade < _MIN_POINTS_PER_DECADE:
        raise ValueError(
            f"margins needs at least {_MIN_POINTS_PER_DECADE} points per "
            f"decade, got {grid.points_per_decade}")
    result = sweep(loop_tf, grid)
    freqs = result.freq_hz
    mag_db = result.mag_db
    phase = result.phase_deg_unwrapped
    principal = result.phase_deg_principal

    gain_crossovers: list[float] = []
    phase_margins: list[float] = []
    for k in range(len(freqs) - 1):
        lo, hi = mag_db[k], mag_db[k + 1]
        if not np.isfinite(lo) or not np.isfinite(hi):
            continue
        if lo == 0.0:
            f_x = float(freqs[k])
        elif (lo < 0.0) != (hi < 0.0) and hi != 0.0:
            f_x = _refine(loop_tf, float(freqs[k]), float(freqs[k + 1]),
                          lo, hi, _mag_db_at)
        else:
            continue
        value = loop_tf.eval(2j * np.pi * f_x)
        phase_principal = float(np.degrees(np.angle(value)))
        # Re-anchor the off-grid principal phase onto the unwrapped branch.
        phase_grid = float(np.interp(np.log10(f_x), np.log10(freqs), phase))
        turns = round((phase_grid - phase_principal) / 360.0)
        phase_unwrapped = phase_principal + 360.0 * turns
        gain_crossovers.append(f_x)
        phase_margins.append(180.0 + phase_unwrapped)

    def _phase_dist(expr: FreqExpr, freq_hz: float) -> float:
        value = expr.eval(2j * np.pi * freq_hz)
        phase_principal = float(np.degrees(np.angle(value)))
        phase_grid = float(np.interp(np.log10(freq_hz), np.log10(freqs), phase))
        turns = round((phase_grid - phase_principal) / 360.0)
        return phase_principal + 360.0 * turns + 180.0

    phase_rel = phase + 180.0
    phase_crossovers: list[float] = []
    gain_margins: list[float] = []
    for k in range(len(freqs) - 1):
        lo, hi = float(phase_rel[k]), float(phase_rel[k + 1])
        if lo == 0.0:
            f_x = float(freqs[k])
        elif (lo < 0.0) != (hi < 0.0) and hi != 0.0:
            f_x = _refine(loop_tf, float(freqs[k]), float(freqs[k + 1]),
                          lo, hi, _phase_dist)
        else:
            continue
        phase_crossovers.append(f_x)
        gain_margins.append(-_mag_db_at(loop_tf, f_x))

    stable = bool(gain_crossovers) and any(pm > 0.0 for pm in phase_margins) \
        and all(gm > 0.0 for gm in gain_margins)
    return MarginReport(
        gain_crossover_hz=tuple(gain_crossovers),
        phase_margin_deg=tuple(phase_margins),
        phase_crossover_hz=tuple(phase_crossovers),
        gain_margin_db=tuple(gain_margins),
        stable=stable,
    )


def tmlg(z_source: FreqExpr, z_load_in: FreqExpr) -> FreqExpr:
    """Minor-loop gain: source output impedance over load input impedance."""
    return div(z_source, z_load_in)


def nyquist(ratio: FreqExpr, grid: FreqGrid) -> NyquistTrace:
    """Evaluate a ratio along a grid for locus plotting."""
    result: SweepResult = sweep(ratio, grid)
    return NyquistTrace(freq_hz=result.freq_hz, samples=result.samples)
