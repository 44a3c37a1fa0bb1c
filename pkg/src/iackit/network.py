"""Impedance primitives and filter/load models.

Builds the branch impedances the composition stage consumes: R/L/C elements
with series parasitics, series/parallel element networks, the damped LC input
filter, the output post-filter, resonance helpers, and the load models
(resistive, constant-power, constant-current, tabulated, element network).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .freq_core import (
    OPEN,
    FreqExpr,
    constant,
    parallel,
    poly_ratio,
)

__all__ = [
    "ConstantCurrentLoad",
    "ConstantPowerLoad",
    "Element",
    "InputFilterModel",
    "LoadModel",
    "NetLoad",
    "NonPositiveParameter",
    "ParallelNet",
    "PostFilterModel",
    "ResistiveLoad",
    "Series",
    "TabulatedImpedance",
    "TabulatedLoad",
    "TabulatedOutOfRange",
    "capacitor",
    "impedance",
    "inductor",
    "input_filter",
    "load_impedance",
    "load_tabulated_csv",
    "parallel_input_impedance",
    "post_filter",
    "resistor",
    "resonance_freq",
    "series",
    "shunt_group",
]


class NonPositiveParameter(ValueError):
    """A physical parameter that must be strictly positive was not."""


class TabulatedOutOfRange(ValueError):
    """A tabulated impedance was evaluated outside its frequency table."""


@dataclass(frozen=True)
class Element:
    """Single two-terminal element with an optional series parasitic.

    kind is "R", "L", or "C"; value is ohm, henry, or farad accordingly and
    must be strictly positive; parasitic_ohm is a series resistance (an
    inductor's winding resistance, a capacitor's ESR) and must be >= 0.
    """

    kind: str
    value: float
    parasitic_ohm: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("R", "L", "C"):
            raise ValueError(f"element kind must be R, L, or C, got {self.kind!r}")
        if not (math.isfinite(self.value) and self.value > 0):
            raise NonPositiveParameter(
                f"element value must be > 0, got {self.value!r}")
        if not (math.isfinite(self.parasitic_ohm) and self.parasitic_ohm >= 0):
            raise ValueError(
                f"series parasitic must be >= 0, got {self.parasitic_ohm!r}")


def resistor(ohm: float) -> Element:
    return Element("R", ohm)


def inductor(henry: float, series_ohm: float = 0.0) -> Element:
    return Element("L", henry, series_ohm)


def capacitor(farad: float, esr_ohm: float = 0.0) -> Element:
    return Element("C", farad, esr_ohm)


@dataclass(frozen=True)
class Series:
    parts: tuple

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValueError("a series network needs at least one part")


@dataclass(frozen=True)
class ParallelNet:
    parts: tuple

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValueError("a parallel network needs at least one part")


ImpedanceNet = Union[Element, Series, ParallelNet]


def series(*parts: ImpedanceNet) -> Series:
    return Series(tuple(parts))


def shunt_group(*parts: ImpedanceNet) -> ParallelNet:
    """Parallel group of branches (e.g. a capacitor bank with its damper)."""
    return ParallelNet(tuple(parts))


def impedance(net: ImpedanceNet) -> FreqExpr:
    """Impedance expression of an element network."""
    if isinstance(net, Element):
        if net.kind == "R":
            return constant(net.value + net.parasitic_ohm)
        if net.kind == "L":
            # r + s*L
            return poly_ratio([net.parasitic_ohm, net.value], [1.0])
        # (1 + s*esr*C) / (s*C)  ==  esr + 1/(s*C)
        return poly_ratio([1.0, net.parasitic_ohm * net.value], [0.0, net.value])
    if isinstance(net, Series):
        total = impedance(net.parts[0])
        for part in net.parts[1:]:
            total = total + impedance(part)
        return total
    if isinstance(net, ParallelNet):
        total = impedance(net.parts[0])
        for part in net.parts[1:]:
            total = parallel(total, impedance(part))
        return total
    raise TypeError(f"not an impedance network: {net!r}")


def resonance_freq(inductance_h: float, capacitance_f: float) -> float:
    """Resonant frequency 1/(2*pi*sqrt(L*C)) in Hz."""
    if not (math.isfinite(inductance_h) and inductance_h > 0):
        raise NonPositiveParameter(f"inductance must be > 0, got {inductance_h!r}")
    if not (math.isfinite(capacitance_f) and capacitance_f > 0):
        raise NonPositiveParameter(f"capacitance must be > 0, got {capacitance_f!r}")
    return 1.0 / (2.0 * math.pi * math.sqrt(inductance_h * capacitance_f))


@dataclass(frozen=True, eq=False)
class InputFilterModel:
    """Branch impedances of the LC input filter.

    z_inductor is the series branch from the source, z_capacitor the shunt
    branch at the converter-side node (possibly a composite capacitor bank
    with a damping leg), and z_parallel their parallel combination: the
    impedance seen at the converter-side node with the source shorted, which
    is also the filter's output impedance used in interaction ratios.
    """

    z_inductor: FreqExpr
    z_capacitor: FreqExpr
    z_parallel: FreqExpr

    @property
    def output_impedance(self) -> FreqExpr:
        return self.z_parallel


def input_filter(series_inductor: Element, capacitor_branch: ImpedanceNet) -> InputFilterModel:
    if series_inductor.kind != "L":
        raise ValueError("the input-filter series element must be an inductor")
    z_l = impedance(series_inductor)
    z_c = impedance(capacitor_branch)
    return InputFilterModel(z_inductor=z_l, z_capacitor=z_c,
                            z_parallel=parallel(z_l, z_c))


@dataclass(frozen=True, eq=False)
class PostFilterModel:
    """Branch impedances of the output post-filter.

    z_output_parallel is inductor || shunt capacitor (the impedance at the
    load-side node with the converter side shorted).  z_input_parallel is
    inductor || converter-output-capacitor (the impedance at the converter
    node with the load side shorted); when the converter has no output
    capacitor it degenerates to the inductor branch itself.  z_source_cap
    keeps the raw converter-capacitor branch for independent circuit solves.
    """

    z_inductor: FreqExpr
    z_capacitor: FreqExpr
    z_output_parallel: FreqExpr
    z_input_parallel: FreqExpr
    z_source_cap: FreqExpr


def post_filter(series_inductor: Element, shunt_capacitor: Element,
                z_converter_cap: FreqExpr = OPEN) -> PostFilterModel:
    if series_inductor.kind != "L":
        raise ValueError("the post-filter series element must be an inductor")
    if shunt_capacitor.kind != "C":
        raise ValueError("the post-filter shunt element must be a capacitor")
    z_l = impedance(series_inductor)
    z_c = impedance(shunt_capacitor)
    return PostFilterModel(
        z_inductor=z_l,
        z_capacitor=z_c,
        z_output_parallel=parallel(z_l, z_c),
        z_input_parallel=parallel(z_l, z_converter_cap),
        z_source_cap=z_converter_cap,
    )


@dataclass(frozen=True)
class ResistiveLoad:
    r_ohm: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r_ohm) and self.r_ohm > 0):
            raise NonPositiveParameter(f"load resistance must be > 0, got {self.r_ohm!r}")


@dataclass(frozen=True)
class ConstantPowerLoad:
    """Tightly regulated downstream stage: incremental resistance -V^2/P."""

    v_out: float
    p_out: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v_out) and self.v_out > 0):
            raise NonPositiveParameter(f"load voltage must be > 0, got {self.v_out!r}")
        if not (math.isfinite(self.p_out) and self.p_out > 0):
            raise NonPositiveParameter(f"load power must be > 0, got {self.p_out!r}")


@dataclass(frozen=True)
class ConstantCurrentLoad:
    """Ideal current sink: infinite incremental impedance."""


@dataclass(frozen=True, eq=False)
class TabulatedLoad:
    """Measured impedance table over frequency."""

    freq_hz: np.ndarray
    z_ohm: np.ndarray
    extrapolate: bool = False

    def __post_init__(self) -> None:
        freq = np.asarray(self.freq_hz, dtype=float)
        z = np.asarray(self.z_ohm, dtype=complex)
        if freq.ndim != 1 or freq.size < 2:
            raise ValueError("a tabulated load needs at least two frequency rows")
        if z.shape != freq.shape:
            raise ValueError("impedance and frequency columns must align")
        if freq[0] <= 0:
            raise NonPositiveParameter("table frequencies must be > 0")
        if np.any(np.diff(freq) <= 0):
            raise ValueError("table frequencies must be strictly increasing")
        object.__setattr__(self, "freq_hz", freq)
        object.__setattr__(self, "z_ohm", z)


@dataclass(frozen=True)
class NetLoad:
    net: ImpedanceNet


LoadModel = Union[ResistiveLoad, ConstantPowerLoad, ConstantCurrentLoad,
                  TabulatedLoad, NetLoad]


@dataclass(frozen=True, eq=False)
class TabulatedImpedance(FreqExpr):
    """Expression node interpolating a measured impedance table.

    Real and imaginary parts are interpolated separately, piecewise-linearly
    in log-frequency.  Evaluation keys on f = |Im s|/(2*pi) and conjugates
    the result for negative Im s, preserving conjugate symmetry.  Outside the
    table the node raises unless extrapolation is enabled, in which case the
    endpoint values are held.
    """

    freq_hz: np.ndarray
    z_ohm: np.ndarray
    extrapolate: bool

    def _compute(self, s, memo):
        s_arr = np.asarray(s, dtype=np.complex128)
        freq = np.abs(s_arr.imag) / (2.0 * math.pi)
        lo, hi = self.freq_hz[0], self.freq_hz[-1]
        if not self.extrapolate:
            outside = (freq < lo) | (freq > hi)
            if np.any(outside):
                bad = float(np.atleast_1d(freq)[np.atleast_1d(outside)][0])
                raise TabulatedOutOfRange(
                    f"{bad:.6g} Hz is outside the impedance table "
                    f"[{lo:.6g}, {hi:.6g}] Hz and extrapolation is disabled")
        log_table = np.log10(self.freq_hz)
        log_freq = np.log10(np.clip(freq, lo, hi))
        real = np.interp(log_freq, log_table, self.z_ohm.real)
        imag = np.interp(log_freq, log_table, self.z_ohm.imag)
        out = real + 1j * imag
        return np.where(s_arr.imag < 0, np.conj(out), out)


def load_impedance(load: LoadModel) -> FreqExpr:
    """Impedance expression of a load model.

    A constant-current load maps to the open-circuit marker, whose reciprocal
    is an exact zero, so admittance-form transfer functions stay evaluable.
    """
    if isinstance(load, ResistiveLoad):
        return constant(load.r_ohm)
    if isinstance(load, ConstantPowerLoad):
        return constant(-load.v_out * load.v_out / load.p_out)
    if isinstance(load, ConstantCurrentLoad):
        return OPEN
    if isinstance(load, TabulatedLoad):
        return TabulatedImpedance(load.freq_hz, load.z_ohm, load.extrapolate)
    if isinstance(load, NetLoad):
        return impedance(load.net)
    raise TypeError(f"not a load model: {load!r}")


def parallel_input_impedance(z_first: FreqExpr, z_second: FreqExpr) -> FreqExpr:
    """Combined input impedance of two converters fed from the same node."""
    return parallel(z_first, z_second)


_TABLE_HEADER = ["freq_hz", "real_ohm", "imag_ohm"]


def load_tabulated_csv(path, extrapolate: bool = False) -> TabulatedLoad:
    """Read a measured impedance table (header: freq_hz,real_ohm,imag_ohm)."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != _TABLE_HEADER:
            raise ValueError(
                f"expected header {','.join(_TABLE_HEADER)!r}, got {header!r}")
        freq, real, imag = [], [], []
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"expected 3 columns, got {row!r}")
            freq.append(float(row[0]))
            real.append(float(row[1]))
            imag.append(float(row[2]))
    z = np.asarray(real, dtype=float) + 1j * np.asarray(imag, dtype=float)
    return TabulatedLoad(np.asarray(freq, dtype=float), z, extrapolate)
