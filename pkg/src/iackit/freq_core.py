"""Complex-frequency expression algebra.

Transfer functions and impedances are immutable expression DAGs over the
Laplace variable ``s``.  The node set is deliberately small: real constants,
ratios of real-coefficient polynomials, pure transport delays, the four
arithmetic combinators, and the two-terminal parallel combination.  A delay
factor makes the general expression non-rational, so nothing downstream
manipulates poles or zeros; all results come from pointwise evaluation on
log-spaced frequency grids.

Expressions evaluate on a scalar complex ``s`` or on a numpy array of ``s``
values.  Shared subexpressions evaluate once per call through an identity
memo, so heavily shared DAGs (common denominators and the like) stay cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as _poly

__all__ = [
    "AllZeroDenominator",
    "Const",
    "Delay",
    "DivisionByZero",
    "FreqExpr",
    "FreqGrid",
    "Negate",
    "OPEN",
    "OpenCircuit",
    "OpenCircuitEvaluation",
    "ParallelPair",
    "PolyRatio",
    "Product",
    "Quotient",
    "Sum",
    "SweepResult",
    "add",
    "constant",
    "delay",
    "div",
    "mul",
    "neg",
    "parallel",
    "poly_ratio",
    "reciprocal",
    "sweep",
]


class DivisionByZero(ArithmeticError):
    """A quotient or parallel combination hit an exactly-zero denominator."""

    def __init__(self, message: str, s: complex | None = None,
                 freq_hz: float | None = None) -> None:
        super().__init__(message)
        self.s = s
        self.freq_hz = freq_hz


class AllZeroDenominator(ValueError):
    """``poly_ratio`` was given an identically zero denominator."""


class OpenCircuitEvaluation(ArithmeticError):
    """An open circuit has no finite value; it only combines structurally."""


def _require_finite(value: float, what: str) -> float:
    out = float(value)
    if not math.isfinite(out):
        raise ValueError(f"{what} must be finite, got {value!r}")
    return out


def _freq_of(s: complex | None) -> float | None:
    if s is None:
        return None
    return s.imag / (2.0 * math.pi)


def _check_denominator(den, s, what: str) -> None:
    # Exact zeros only: a nearly-cancelled denominator is a legitimate (huge)
    # value, not an error.
    if np.ndim(den) == 0:
        if den == 0:
            s_val = None if np.ndim(s) else complex(s)
            raise DivisionByZero(_zero_message(what, s_val), s=s_val,
                                 freq_hz=_freq_of(s_val))
        return
    bad = np.flatnonzero(np.asarray(den) == 0)
    if bad.size:
        s_arr = np.broadcast_to(np.asarray(s), np.shape(den)).reshape(-1)
        s_val = complex(s_arr[bad[0]])
        raise DivisionByZero(_zero_message(what, s_val), s=s_val,
                             freq_hz=_freq_of(s_val))


def _zero_message(what: str, s_val: complex | None) -> str:
    if s_val is None:
        return f"{what} is exactly zero"
    return f"{what} is exactly zero at {_freq_of(s_val):.6g} Hz (s = {s_val:.6g})"


@dataclass(frozen=True, eq=False)
class FreqExpr:
    """Base expression node.

    Instances are immutable and compare by identity, so a shared node is the
    same sample wherever it appears and "bit-identical" means ``is``.
    """

    def eval(self, s):
        """Evaluate at complex ``s`` (a scalar or an ndarray of any shape)."""
        out = self._eval(s, {})
        if isinstance(s, np.ndarray):
            arr = np.asarray(out, dtype=np.complex128)
            if arr.shape != s.shape:
                arr = np.broadcast_to(arr, s.shape).copy()
            return arr
        return complex(out)

    def _eval(self, s, memo):
        key = id(self)
        found = memo.get(key)
        if found is None:
            found = self._compute(s, memo)
            memo[key] = found
        return found

    def _compute(self, s, memo):
        raise NotImplementedError

    # Arithmetic sugar; plain numbers are lifted to constant nodes.
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)


@dataclass(frozen=True, eq=False)
class Const(FreqExpr):
    value: float

    def _compute(self, s, memo):
        return self.value


@dataclass(frozen=True, eq=False)
class PolyRatio(FreqExpr):
    """Ratio of real-coefficient polynomials in s, ascending powers."""

    num: tuple[float, ...]
    den: tuple[float, ...]

    def _compute(self, s, memo):
        num = _poly.polyval(s, self.num)
        den = _poly.polyval(s, self.den)
        _check_denominator(den, s, "polynomial denominator")
        return np.divide(num, den)


@dataclass(frozen=True, eq=False)
class Delay(FreqExpr):
    """Pure transport delay exp(-s*delay_s); unit magnitude on the jw axis."""

    delay_s: float

    def _compute(self, s, memo):
        return np.exp(np.multiply(s, -self.delay_s))


@dataclass(frozen=True, eq=False)
class Sum(FreqExpr):
    lhs: FreqExpr
    rhs: FreqExpr

    def _compute(self, s, memo):
        return np.add(self.lhs._eval(s, memo), self.rhs._eval(s, memo))


@dataclass(frozen=True, eq=False)
class Product(FreqExpr):
    lhs: FreqExpr
    rhs: FreqExpr

    def _compute(self, s, memo):
        return np.multiply(self.lhs._eval(s, memo), self.rhs._eval(s, memo))


@dataclass(frozen=True, eq=False)
class Quotient(FreqExpr):
    num: FreqExpr
    den: FreqExpr

    def _compute(self, s, memo):
        num = self.num._eval(s, memo)
        den = self.den._eval(s, memo)
        _check_denominator(den, s, "quotient denominator")
        return np.divide(num, den)


@dataclass(frozen=True, eq=False)
class Negate(FreqExpr):
    child: FreqExpr

    def _compute(self, s, memo):
        return np.negative(self.child._eval(s, memo))


@dataclass(frozen=True, eq=False)
class ParallelPair(FreqExpr):
    """Two-terminal parallel combination lhs*rhs/(lhs+rhs)."""

    lhs: FreqExpr
    rhs: FreqExpr

    def _compute(self, s, memo):
        a = self.lhs._eval(s, memo)
        b = self.rhs._eval(s, memo)
        den = np.add(a, b)
        _check_denominator(den, s, "parallel-combination denominator")
        return np.divide(np.multiply(a, b), den)


@dataclass(frozen=True, eq=False)
class OpenCircuit(FreqExpr):
    """Infinite-impedance marker.

    It never evaluates; the combinators rewrite it away structurally: its
    reciprocal is an exact zero, a parallel partner passes through unchanged,
    and a series (sum) partner is swallowed.
    """

    def _compute(self, s, memo):
        raise OpenCircuitEvaluation(
            "an open circuit has no finite value; take its reciprocal or "
            "combine it in parallel before evaluating")


#: Shared open-circuit instance.  All rewrites key on the type, so separately
#: constructed OpenCircuit objects behave identically; this one is merely the
#: conventional spelling.
OPEN = OpenCircuit()


def constant(value: float) -> Const:
    """Real constant node."""
    return Const(_require_finite(value, "constant value"))


def _coerce(value) -> FreqExpr:
    if isinstance(value, FreqExpr):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not valid expression operands")
    if isinstance(value, (int, float)):
        return constant(value)
    raise TypeError(f"cannot use {type(value).__name__} as a frequency expression")


def poly_ratio(num_coeffs, den_coeffs) -> PolyRatio:
    """Polynomial ratio with real coefficients given in ascending powers."""
    num = tuple(_require_finite(c, "numerator coefficient") for c in num_coeffs)
    den = tuple(_require_finite(c, "denominator coefficient") for c in den_coeffs)
    if not num:
        num = (0.0,)
    if not den or all(c == 0.0 for c in den):
        raise AllZeroDenominator("denominator polynomial is identically zero")
    return PolyRatio(num, den)


def delay(delay_s: float) -> Delay:
    t = _require_finite(delay_s, "delay time")
    if t < 0:
        raise ValueError(f"delay time must be >= 0, got {t}")
    return Delay(t)


def add(lhs, rhs) -> FreqExpr:
    lhs, rhs = _coerce(lhs), _coerce(rhs)
    if isinstance(lhs, OpenCircuit) or isinstance(rhs, OpenCircuit):
        return OPEN  # series with an open circuit stays open
    # Adding an exact zero is an identity; the fold keeps shared-node checks
    # (and the open-circuit capacitor absorption) bit-identical.
    if isinstance(rhs, Const) and rhs.value == 0.0:
        return lhs
    if isinstance(lhs, Const) and lhs.value == 0.0:
        return rhs
    return Sum(lhs, rhs)


def mul(lhs, rhs) -> FreqExpr:
    lhs, rhs = _coerce(lhs), _coerce(rhs)
    if isinstance(lhs, OpenCircuit) or isinstance(rhs, OpenCircuit):
        return OPEN
    if isinstance(rhs, Const) and rhs.value == 1.0:
        return lhs
    if isinstance(lhs, Const) and lhs.value == 1.0:
        return rhs
    # No zero fold: (1/x)*0 must still report x's division error, not hide it.
    return Product(lhs, rhs)


def div(num, den) -> FreqExpr:
    num, den = _coerce(num), _coerce(den)
    num_open = isinstance(num, OpenCircuit)
    den_open = isinstance(den, OpenCircuit)
    if num_open and den_open:
        raise ValueError("the ratio of two open circuits is undefined")
    if den_open:
        return Const(0.0)  # anything finite over an infinite impedance
    if num_open:
        return OPEN
    if isinstance(den, Const) and den.value == 1.0:
        return num
    return Quotient(num, den)


def neg(value) -> FreqExpr:
    value = _coerce(value)
    if isinstance(value, OpenCircuit):
        return OPEN
    if isinstance(value, Negate):
        return value.child
    return Negate(value)


def parallel(lhs, rhs) -> FreqExpr:
    """Impedance parallel combination lhs*rhs/(lhs+rhs)."""
    lhs, rhs = _coerce(lhs), _coerce(rhs)
    if isinstance(lhs, OpenCircuit):
        return rhs
    if isinstance(rhs, OpenCircuit):
        return lhs
    return ParallelPair(lhs, rhs)


def reciprocal(value) -> FreqExpr:
    return div(1.0, value)


@dataclass(frozen=True)
class FreqGrid:
    """Log-spaced grid f_k = f_min * 10**(k / points_per_decade).

    The first point is exactly ``f_min_hz``; the count is the largest that
    does not overshoot ``f_max_hz`` (up to a 1e-12 relative guard so that
    exact decade multiples land on ``f_max_hz``), so the last point is within
    one grid step of ``f_max_hz``.
    """

    f_min_hz: float
    f_max_hz: float
    points_per_decade: int = 100

    def __post_init__(self) -> None:
        if not (math.isfinite(self.f_min_hz) and self.f_min_hz > 0):
            raise ValueError(f"f_min_hz must be > 0, got {self.f_min_hz!r}")
        if not (math.isfinite(self.f_max_hz) and self.f_max_hz > self.f_min_hz):
            raise ValueError("f_max_hz must exceed f_min_hz")
        ppd = self.points_per_decade
        if ppd != int(ppd) or int(ppd) < 1:
            raise ValueError(f"points_per_decade must be a positive integer, got {ppd!r}")

    @cached_property
    def frequencies(self) -> np.ndarray:
        decades = math.log10(self.f_max_hz / self.f_min_hz)
        count = math.floor(self.points_per_decade * decades * (1.0 + 1e-12)) + 1
        exponents = np.arange(count) / self.points_per_decade
        return self.f_min_hz * 10.0 ** exponents

    def __len__(self) -> int:
        return len(self.frequencies)


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Complex samples over a grid, with derived Bode columns."""

    grid: FreqGrid
    samples: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples",
                           np.asarray(self.samples, dtype=np.complex128))
        if self.samples.shape != self.grid.frequencies.shape:
            raise ValueError("one sample per grid frequency is required")

    @property
    def freq_hz(self) -> np.ndarray:
        return self.grid.frequencies

    @cached_property
    def mag_db(self) -> np.ndarray:
        # An exact zero sample maps to -inf dB by design.
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.samples))

    @cached_property
    def phase_deg_principal(self) -> np.ndarray:
        return np.degrees(np.angle(self.samples))

    @cached_property
    def phase_deg_unwrapped(self) -> np.ndarray:
        # Sequential unwrap from the lowest frequency; the first entry is the
        # principal value there, and later entries differ from their principal
        # values by exact multiples of 360 degrees.
        return np.degrees(np.unwrap(np.angle(self.samples)))


def sweep(expr: FreqExpr, grid: FreqGrid) -> SweepResult:
    """Evaluate ``expr`` at s = j*2*pi*f over the grid.

    Division-by-zero errors propagate with the offending frequency attached.
    """
    s = 2j * np.pi * grid.frequencies
    return SweepResult(grid, expr.eval(s))
