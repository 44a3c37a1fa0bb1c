"""Canonical closed-loop transfer functions of one composed converter.

Given a primed coefficient set (filters and modulator already folded in), a
load model, and the control chain (voltage-loop compensator, sensor gain, and
the three external feedforwards from the outer-port quantities), this module
builds the five canonical responses as expressions:

* control-to-output voltage gain (feedback loop open, feedforwards active),
* closed-loop input impedance,
* unterminated output impedance (load disconnected),
* closed-loop source-to-output audio susceptibility,
* closed-loop back-current gain (output-port current to input-port current),

plus the terminated output impedance and the voltage loop gain.  Load terms
enter in admittance form, so a constant-current load (open-circuit marker,
reciprocal exactly zero) stays evaluable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .freq_core import Const, FreqExpr, constant, neg, parallel, poly_ratio, reciprocal
from .iac_lib import CoeffSet
from .network import LoadModel, load_impedance

__all__ = [
    "ControlChain",
    "PlantModel",
    "control_chain",
    "g_iio_back_current",
    "g_vv_closed",
    "g_vvc",
    "loop_gain",
    "open_loop",
    "pi_compensator",
    "z_in_closed",
    "z_out_terminated",
    "z_out_unterminated",
]


@dataclass(frozen=True, eq=False)
class ControlChain:
    """Feedback and feedforward blocks around the composed converter.

    sensor scales the sensed output voltage; compensator is the voltage-loop
    regulator; adc_chain is an extra measurement-chain block that multiplies
    the loop gain only (it sits outside the feedback summing).  The three
    feedforwards add outer-port signals to the control quantity: the
    input-port current, the input-port voltage, and the output-port current.
    """

    sensor: FreqExpr
    compensator: FreqExpr
    adc_chain: FreqExpr
    ff_in_current: FreqExpr
    ff_in_voltage: FreqExpr
    ff_out_current: FreqExpr


def _as_expr(value) -> FreqExpr:
    if isinstance(value, FreqExpr):
        return value
    return constant(value)


def control_chain(compensator, sensor=1.0, adc_chain=1.0, ff_in_current=0.0,
                  ff_in_voltage=0.0, ff_out_current=0.0) -> ControlChain:
    """Convenience builder lifting plain numbers to constant blocks."""
    return ControlChain(
        sensor=_as_expr(sensor),
        compensator=_as_expr(compensator),
        adc_chain=_as_expr(adc_chain),
        ff_in_current=_as_expr(ff_in_current),
        ff_in_voltage=_as_expr(ff_in_voltage),
        ff_out_current=_as_expr(ff_out_current),
    )


def pi_compensator(k_p: float, t_i: float) -> FreqExpr:
    """Proportional-integral block k_p*(1 + 1/(t_i*s))."""
    if not k_p > 0:
        raise ValueError(f"proportional gain must be > 0, got {k_p!r}")
    if not t_i > 0:
        raise ValueError(f"integral time must be > 0, got {t_i!r}")
    return poly_ratio([k_p, k_p * t_i], [0.0, t_i])


@dataclass(frozen=True, eq=False)
class PlantModel:
    """Primed coefficient set plus its load and control chain."""

    coeffs: CoeffSet
    load: LoadModel
    control: ControlChain


def _load_admittance(plant: PlantModel) -> FreqExpr:
    return reciprocal(load_impedance(plant.load))


def _feedback(plant: PlantModel) -> FreqExpr:
    return plant.control.sensor * plant.control.compensator


def g_vvc(plant: PlantModel) -> FreqExpr:
    """Control-to-output voltage gain with the voltage loop open.

    External feedforwards stay active; written over the load admittance so an
    open load contributes exactly nothing.
    """
    c, ch = plant.coeffs, plant.control
    y = _load_admittance(plant)
    fig, fio = ch.ff_in_current, ch.ff_out_current
    den = c.b_out + fig * (c.a_out * c.b_in - c.a_in * c.b_out) \
        + (1.0 - c.a_out * fio - c.a_in * fig) * y
    return c.a_out / den


def z_in_closed(plant: PlantModel) -> FreqExpr:
    """Closed-loop input impedance at the outer input port."""
    c, ch = plant.coeffs, plant.control
    y = _load_admittance(plant)
    fb = _feedback(plant)
    fig, fvg, fio = ch.ff_in_current, ch.ff_in_voltage, ch.ff_out_current
    cross = c.a_in * c.c_out - c.a_out * c.c_in
    num = c.b_out - c.a_out * fio * y - c.a_in * fig * y \
        - c.a_in * c.b_out * fig + c.a_out * c.b_in * fig + c.a_out * fb + y
    den = c.c_in * y + c.a_in * fvg * y - c.c_out * c.b_in + c.c_in * c.b_out \
        + fio * y * cross + fvg * (c.a_in * c.b_out - c.a_out * c.b_in) \
        - fb * cross
    return num / den


def z_out_unterminated(plant: PlantModel) -> FreqExpr:
    """Output-voltage-to-output-current ratio with the load disconnected.

    In the injected-current sign convention this is the negative of the
    impedance an external source would measure.
    """
    c, ch = plant.coeffs, plant.control
    fb = _feedback(plant)
    fig, fio = ch.ff_in_current, ch.ff_out_current
    num = c.a_in * fig + c.a_out * fio - 1.0
    den = c.b_out - c.a_in * fig * c.b_out + c.a_out * fig * c.b_in \
        + c.a_out * fb
    return num / den


def z_out_terminated(plant: PlantModel) -> FreqExpr:
    """Output impedance with the load connected: (-unterminated) || load."""
    return parallel(neg(z_out_unterminated(plant)), load_impedance(plant.load))


def g_vv_closed(plant: PlantModel) -> FreqExpr:
    """Closed-loop source-to-output voltage gain (audio susceptibility)."""
    c, ch = plant.coeffs, plant.control
    y = _load_admittance(plant)
    fb = _feedback(plant)
    fig, fvg, fio = ch.ff_in_current, ch.ff_in_voltage, ch.ff_out_current
    num = c.c_out + c.a_out * fvg - c.a_in * fig * c.c_out \
        + c.a_out * fig * c.c_in
    den = c.b_out - c.a_out * fio * y - c.a_in * fig * y \
        - c.a_in * c.b_out * fig + c.a_out * c.b_in * fig + c.a_out * fb + y
    return num / den


def g_iio_back_current(plant: PlantModel) -> FreqExpr:
    """Closed-loop output-port-current-to-input-port-current gain."""
    c, ch = plant.coeffs, plant.control
    fb = _feedback(plant)
    fig, fio = ch.ff_in_current, ch.ff_out_current
    num = c.b_in + c.a_in * c.b_out * fio - c.a_out * c.b_in * fio \
        + c.a_in * fb
    den = c.b_out - c.a_in * c.b_out * fig + c.a_out * c.b_in * fig \
        + c.a_out * fb
    return num / den


def loop_gain(plant: PlantModel) -> FreqExpr:
    """Voltage loop gain: control-to-output gain times the measurement chain."""
    ch = plant.control
    return g_vvc(plant) * ch.adc_chain * ch.sensor * ch.compensator


def open_loop(plant: PlantModel) -> PlantModel:
    """The same plant with the voltage-loop compensator zeroed (idempotent)."""
    comp = plant.control.compensator
    if isinstance(comp, Const) and comp.value == 0.0:
        return plant
    return PlantModel(
        coeffs=plant.coeffs,
        load=plant.load,
        control=replace(plant.control, compensator=constant(0.0)),
    )
