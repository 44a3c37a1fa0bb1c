"""Converter coefficient sets and the modulator block.

A converter is characterized by six frequency-domain coefficients tying the
duty perturbation, the output-node voltage, and the input-node voltage to the
two averaged terminal currents: the current absorbed at the input port and
the current injected at the output port.  Built-in derivations cover the buck
cell and the phase-shifted full bridge (as a buck equivalent referred to the
secondary); arbitrary converters enter through user-supplied expressions.

The ``output_cap_included`` flag records whether the injected-current
coefficient of the output voltage already contains the converter's own output
capacitor.  Composition with a post-filter needs the capacitor separate;
composition without one needs it absorbed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .freq_core import FreqExpr, add, constant, delay, mul, poly_ratio, reciprocal
from .network import Element, impedance

__all__ = [
    "AlreadyAbsorbed",
    "CoeffSet",
    "Modulator",
    "OperatingPoint",
    "absorb_output_cap",
    "buck_coeffs",
    "modulator_gain",
    "psfb_coeffs",
    "transport_delay",
    "user_coeffs",
]


class AlreadyAbsorbed(ValueError):
    """The output capacitor is already part of the coefficient set."""


@dataclass(frozen=True)
class OperatingPoint:
    """Steady-state bias the small-signal coefficients are linearized around.

    v_in: source voltage (V); v_out: regulated output voltage (V);
    duty: steady-state duty ratio in (0, 1); i_inductor: average filter
    inductor current (A); turns_ratio: secondary/primary transformer ratio
    (1 for non-isolated cells); f_switch: switching frequency (Hz).
    """

    v_in: float
    v_out: float
    duty: float
    i_inductor: float
    turns_ratio: float = 1.0
    f_switch: float = 100e3

    def __post_init__(self) -> None:
        for name in ("v_in", "v_out", "i_inductor", "turns_ratio", "f_switch"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be > 0, got {value!r}")
        if not (math.isfinite(self.duty) and 0.0 < self.duty < 1.0):
            raise ValueError(f"duty must lie in (0, 1), got {self.duty!r}")


@dataclass(frozen=True, eq=False)
class CoeffSet:
    """The six characteristic coefficients of one converter.

    a_in/b_in/c_in map duty / output voltage / input voltage to the absorbed
    input current; a_out/b_out/c_out map the same three to the injected
    output current.  The voltage coefficients follow the sign convention
    i_absorbed = a_in*duty - b_in*v_output + c_in*v_input (same shape on the
    output side), so b_* enter equations negated.
    """

    a_in: FreqExpr
    b_in: FreqExpr
    c_in: FreqExpr
    a_out: FreqExpr
    b_out: FreqExpr
    c_out: FreqExpr
    output_cap_included: bool


def buck_coeffs(op: OperatingPoint, inductance: float, series_ohm: float = 0.0,
                output_cap: Element | None = None) -> CoeffSet:
    """Coefficients of the averaged buck cell.

    The output set comes from the inductor branch balance
    Z_L*i_l = V_in*duty + D*v_in - v_out with Z_L = s*L + r; the input set is
    the averaged switch current D*i_l + I_L*duty.  With ``output_cap`` given,
    the returned set has the capacitor absorbed (flag set); otherwise the
    capacitor stays external (flag clear).
    """
    if not (math.isfinite(inductance) and inductance > 0):
        raise ValueError(f"inductance must be > 0, got {inductance!r}")
    if not (math.isfinite(series_ohm) and series_ohm >= 0):
        raise ValueError(f"series resistance must be >= 0, got {series_ohm!r}")
    z_l = poly_ratio([series_ohm, inductance], [1.0])
    a_out = constant(op.v_in) / z_l
    b_out = reciprocal(z_l)
    c_out = constant(op.duty) / z_l
    a_in = constant(op.i_inductor) + constant(op.duty) * a_out
    b_in = constant(op.duty) * b_out
    c_in = constant(op.duty) * c_out
    coeffs = CoeffSet(a_in, b_in, c_in, a_out, b_out, c_out,
                      output_cap_included=False)
    if output_cap is not None:
        coeffs = absorb_output_cap(coeffs, impedance(output_cap))
    return coeffs


def psfb_coeffs(op: OperatingPoint, inductance: float, series_ohm: float = 0.0,
                leakage_h: float = 0.0, output_cap: Element | None = None) -> CoeffSet:
    """Coefficients of the phase-shifted full bridge, referred to the secondary.

    The bridge reduces to a buck cell whose source is the reflected input
    n*v_in and whose primary current is n times the averaged secondary
    current, so the input-voltage channel and the input-current port both
    carry the turns ratio.  The leakage inductance does not resonate at these
    frequencies; its commutation duty loss appears as the effective damping
    resistance 4*n^2*L_lk*f_switch in series with the filter inductor.
    """
    if not (math.isfinite(inductance) and inductance > 0):
        raise ValueError(f"inductance must be > 0, got {inductance!r}")
    if not (math.isfinite(series_ohm) and series_ohm >= 0):
        raise ValueError(f"series resistance must be >= 0, got {series_ohm!r}")
    if not (math.isfinite(leakage_h) and leakage_h >= 0):
        raise ValueError(f"leakage inductance must be >= 0, got {leakage_h!r}")
    ratio = op.turns_ratio
    r_eff = 4.0 * ratio * ratio * leakage_h * op.f_switch
    z_l = poly_ratio([series_ohm + r_eff, inductance], [1.0])
    a_out = constant(ratio * op.v_in) / z_l
    b_out = reciprocal(z_l)
    c_out = constant(ratio * op.duty) / z_l
    a_in = constant(ratio * op.i_inductor) + constant(ratio * op.duty) * a_out
    b_in = constant(ratio * op.duty) * b_out
    c_in = constant(ratio * op.duty) * c_out
    coeffs = CoeffSet(a_in, b_in, c_in, a_out, b_out, c_out,
                      output_cap_included=False)
    if output_cap is not None:
        coeffs = absorb_output_cap(coeffs, impedance(output_cap))
    return coeffs


def user_coeffs(a_in: FreqExpr, b_in: FreqExpr, c_in: FreqExpr,
                a_out: FreqExpr, b_out: FreqExpr, c_out: FreqExpr,
                output_cap_included: bool) -> CoeffSet:
    """Coefficient set from user-supplied expressions (all six required)."""
    entries = {"a_in": a_in, "b_in": b_in, "c_in": c_in,
               "a_out": a_out, "b_out": b_out, "c_out": c_out}
    for name, expr in entries.items():
        if not isinstance(expr, FreqExpr):
            raise ValueError(f"coefficient {name} is missing or not an expression")
    return CoeffSet(a_in, b_in, c_in, a_out, b_out, c_out,
                    bool(output_cap_included))


def absorb_output_cap(coeffs: CoeffSet, z_cap: FreqExpr) -> CoeffSet:
    """Fold the output capacitor branch into the injected-current set.

    Only the output-voltage coefficient changes: the capacitor's admittance
    adds to b_out.  Every other coefficient is the same node.  Passing the
    open-circuit marker (no capacitor) flips the flag and changes nothing.
    """
    if coeffs.output_cap_included:
        raise AlreadyAbsorbed("the output capacitor is already absorbed")
    return CoeffSet(
        a_in=coeffs.a_in,
        b_in=coeffs.b_in,
        c_in=coeffs.c_in,
        a_out=coeffs.a_out,
        b_out=add(coeffs.b_out, reciprocal(z_cap)),
        c_out=coeffs.c_out,
        output_cap_included=True,
    )


@dataclass(frozen=True)
class Modulator:
    """PWM modulator: gain 1/carrier_amplitude with a transport delay."""

    carrier_amplitude: float = 1.0
    delay_s: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.carrier_amplitude) and self.carrier_amplitude > 0):
            raise ValueError(
                f"carrier amplitude must be > 0, got {self.carrier_amplitude!r}")
        if not (math.isfinite(self.delay_s) and self.delay_s >= 0):
            raise ValueError(f"modulator delay must be >= 0, got {self.delay_s!r}")


def modulator_gain(mod: Modulator) -> FreqExpr:
    """Control-quantity-to-duty transfer: exp(-s*t_d)/carrier_amplitude."""
    return mul(constant(1.0 / mod.carrier_amplitude), delay(mod.delay_s))


def transport_delay(duty: float, f_switch: float) -> float:
    """Average modulator transport delay: half a period plus half the on-time."""
    if not (math.isfinite(f_switch) and f_switch > 0):
        raise ValueError(f"switching frequency must be > 0, got {f_switch!r}")
    if not (math.isfinite(duty) and 0.0 <= duty <= 1.0):
        raise ValueError(f"duty must lie in [0, 1], got {duty!r}")
    period = 1.0 / f_switch
    return period / 2.0 + duty * period / 2.0
