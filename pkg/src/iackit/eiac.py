"""Structure composition: fold filters and internal feedforward into a
converter's coefficient set.

Four power structures are supported, named by which external filters surround
the converter: both filters (input LC plus output post-filter), input filter
only, post-filter only, and the bare converter.  Each extension maps the six
unprimed coefficients (duty-referred, at the converter's own terminals) to
six primed coefficients (control-quantity-referred, at the outer ports),
absorbing the modulator transfer and, where an input filter exists, the
internal feedforward of the absorbed current and the converter-node voltage.

The closed-form extension tables were derived once from the port-wiring
equations and are transcribed here verbatim; the per-frequency circuit solver
in ``mna_oracle`` re-derives the same quantities numerically from the wiring
equations alone, so any transcription slip shows up as a dual-route mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .freq_core import Const, FreqExpr, constant, reciprocal
from .iac_lib import CoeffSet
from .network import InputFilterModel, PostFilterModel

__all__ = [
    "InternalFeedforward",
    "Structure",
    "StructureSpec",
    "WrongCapFlag",
    "WrongVariant",
    "clc_extension",
    "extend",
    "extend_bare",
    "extend_with_both_filters",
    "extend_with_input_filter",
    "extend_with_post_filter",
    "zero_feedforward",
]


class WrongCapFlag(ValueError):
    """The coefficient set's output-capacitor flag does not fit the structure."""


class WrongVariant(ValueError):
    """A structure spec was passed to the wrong extension."""


class Structure(Enum):
    """Which external filters surround the converter."""

    BOTH_FILTERS = "both-filters"
    INPUT_ONLY = "input-filter"
    POST_ONLY = "post-filter"
    BARE = "bare"


@dataclass(frozen=True, eq=False)
class InternalFeedforward:
    """Feedforward terms summed into the modulator input.

    absorbed_current scales the converter's absorbed input current;
    input_voltage scales the converter-node input voltage.  Both require an
    input filter to be meaningful (without one these signals are the outer
    port quantities and belong to the external feedforward instead).
    """

    absorbed_current: FreqExpr
    input_voltage: FreqExpr


def zero_feedforward() -> InternalFeedforward:
    return InternalFeedforward(constant(0.0), constant(0.0))


@dataclass(frozen=True, eq=False)
class StructureSpec:
    """One converter's surroundings: filters, modulator, internal feedforward."""

    variant: Structure
    modulator_tf: FreqExpr
    input_filter: InputFilterModel | None = None
    post_filter: PostFilterModel | None = None
    internal_ff: InternalFeedforward | None = None

    def __post_init__(self) -> None:
        needs_input = self.variant in (Structure.BOTH_FILTERS, Structure.INPUT_ONLY)
        needs_post = self.variant in (Structure.BOTH_FILTERS, Structure.POST_ONLY)
        if needs_input and self.input_filter is None:
            raise ValueError(f"{self.variant.value} structure needs an input filter")
        if not needs_input and self.input_filter is not None:
            raise ValueError(f"{self.variant.value} structure takes no input filter")
        if needs_post and self.post_filter is None:
            raise ValueError(f"{self.variant.value} structure needs a post-filter")
        if not needs_post and self.post_filter is not None:
            raise ValueError(f"{self.variant.value} structure takes no post-filter")
        if not needs_input and self.internal_ff is not None:
            raise ValueError(
                "internal feedforward senses converter-side filter quantities "
                "and requires an input-filter structure")
        if needs_input and self.internal_ff is None:
            object.__setattr__(self, "internal_ff", zero_feedforward())


def _require_variant(spec: StructureSpec, expected: Structure) -> None:
    if spec.variant is not expected:
        raise WrongVariant(
            f"expected a {expected.value} spec, got {spec.variant.value}")


def _require_cap_flag(coeffs: CoeffSet, included: bool, context: str) -> None:
    if coeffs.output_cap_included != included:
        state = "absorbed into b_out" if included else "kept as a separate branch"
        raise WrongCapFlag(f"{context} needs the output capacitor {state}")


def extend_with_both_filters(coeffs: CoeffSet, spec: StructureSpec) -> CoeffSet:
    """Primed coefficients with an input filter and an output post-filter.

    The converter's output capacitor must be a separate branch here: it forms
    the converter-side parallel impedance of the post-filter.
    """
    _require_variant(spec, Structure.BOTH_FILTERS)
    _require_cap_flag(coeffs, False, "the both-filters extension")
    gm = spec.modulator_tf
    ff_i = spec.internal_ff.absorbed_current
    ff_v = spec.internal_ff.input_voltage
    z_li = spec.input_filter.z_inductor
    z_ci = spec.input_filter.z_capacitor
    z_g = spec.input_filter.z_parallel
    z_lp = spec.post_filter.z_inductor
    z_op = spec.post_filter.z_output_parallel
    z_lpc = spec.post_filter.z_input_parallel
    ai, bi, ci = coeffs.a_in, coeffs.b_in, coeffs.c_in
    ao, bo, co = coeffs.a_out, coeffs.b_out, coeffs.c_out

    # Input-side elimination collapses into two auxiliary quantities; their
    # ratio carries the whole feedforward/filter coupling.
    x1 = ci - (ai * ff_i * gm - 1.0) / z_g + ai * ff_v * gm
    x2 = ao * ff_v * gm - ao * ff_i * gm / z_g + co
    x_ratio = x2 / x1

    # Output trio shares one denominator.
    den_out = z_lp / z_lpc - z_lp * bi * x_ratio + bo * z_lp
    a_out_p = (ao * gm - gm * ai * x_ratio) / den_out
    b_out_p = ((z_lp / z_op) * (bo + reciprocal(z_lpc)) - reciprocal(z_lp)
               - bi * z_lp * x2 / (z_op * x1)) / den_out
    c_out_p = (gm * ao * ff_i / z_li
               + (1.0 - ai * ff_i * gm) * x_ratio / z_li) / den_out

    # Input trio shares another denominator and reuses the primed output
    # coefficients (the output port reacts back through b_in).
    k_in = z_g * ci + ai * gm * (ff_v * z_g - ff_i) + 1.0
    b_in_p = ((bi * z_lp / (z_op * z_ci)) * (z_g - z_ci)
              * (b_out_p * z_op - 1.0)) / k_in
    a_in_p = (z_ci - z_g) * (ai * gm - a_out_p * bi * z_lp) / (z_ci * k_in)
    c_in_p = (z_g + ci * z_g * z_ci + ai * gm * z_g * (ff_v * z_ci - ff_i)
              + bi * c_out_p * z_li * z_lp * (z_g - z_ci)) / (z_li * z_ci * k_in)

    return CoeffSet(a_in_p, b_in_p, c_in_p, a_out_p, b_out_p, c_out_p,
                    output_cap_included=True)


def extend_with_input_filter(coeffs: CoeffSet, spec: StructureSpec) -> CoeffSet:
    """Primed coefficients with an input filter and no post-filter.

    Without a post-filter the output port is the converter's own output node,
    so the output capacitor must already be absorbed into b_out.
    """
    _require_variant(spec, Structure.INPUT_ONLY)
    _require_cap_flag(coeffs, True, "the input-filter extension")
    gm = spec.modulator_tf
    ff_i = spec.internal_ff.absorbed_current
    ff_v = spec.internal_ff.input_voltage
    z_li = spec.input_filter.z_inductor
    z_ci = spec.input_filter.z_capacitor
    z_g = spec.input_filter.z_parallel
    ai, bi, ci = coeffs.a_in, coeffs.b_in, coeffs.c_in
    ao, bo, co = coeffs.a_out, coeffs.b_out, coeffs.c_out

    # Every primed coefficient shares this denominator.
    k = ci * z_g - ai * gm * (ff_i - ff_v * z_g) + 1.0
    a_out_p = gm * (ao - ai * co * z_g + ao * ci * z_g) / k
    b_out_p = bo - (bi * co * z_g - ao * bi * ff_i * gm
                    + ao * bi * ff_v * gm * z_g) / k
    c_out_p = (co + gm * (ao * (ff_v + ci * ff_i) - ai * co * ff_i)) / ((z_li / z_g) * k)
    a_in_p = ai * gm * (z_ci - z_g) / (z_ci * k)
    b_in_p = bi * (z_ci - z_g) / (z_ci * k)
    c_in_p = z_g * (ci * z_ci - ai * ff_i * gm + ai * ff_v * gm * z_ci + 1.0) \
        / (z_li * z_ci * k)

    return CoeffSet(a_in_p, b_in_p, c_in_p, a_out_p, b_out_p, c_out_p,
                    output_cap_included=True)


def extend_with_post_filter(coeffs: CoeffSet, spec: StructureSpec) -> CoeffSet:
    """Primed coefficients with an output post-filter and no input filter."""
    _require_variant(spec, Structure.POST_ONLY)
    _require_cap_flag(coeffs, False, "the post-filter extension")
    gm = spec.modulator_tf
    z_lp = spec.post_filter.z_inductor
    z_op = spec.post_filter.z_output_parallel
    z_lpc = spec.post_filter.z_input_parallel
    ai, bi, ci = coeffs.a_in, coeffs.b_in, coeffs.c_in
    ao, bo, co = coeffs.a_out, coeffs.b_out, coeffs.c_out

    loading = bo * z_lpc + 1.0  # converter loaded by its cap and the choke
    z_lp_sq = z_lp * z_lp
    a_out_p = ao * gm * z_lpc / (z_lp * loading)
    b_out_p = (z_lp_sq - z_op * z_lpc + bo * z_lp_sq * z_lpc) \
        / (z_lp_sq * z_op * loading)
    c_out_p = co * z_lpc / (z_lp * loading)
    a_in_p = ai * gm - ao * bi * gm * z_lpc / loading
    b_in_p = bi * z_lpc / (z_lp * loading)
    c_in_p = ci - co * bi * z_lpc / loading

    return CoeffSet(a_in_p, b_in_p, c_in_p, a_out_p, b_out_p, c_out_p,
                    output_cap_included=True)


def extend_bare(coeffs: CoeffSet, modulator_tf: FreqExpr) -> CoeffSet:
    """Primed coefficients of the bare converter: only the modulator folds in.

    The duty coefficients pick up the modulator transfer; the four voltage
    coefficients are the same nodes, bit for bit.
    """
    _require_cap_flag(coeffs, True, "the bare extension")
    return CoeffSet(
        a_in=coeffs.a_in * modulator_tf,
        b_in=coeffs.b_in,
        c_in=coeffs.c_in,
        a_out=coeffs.a_out * modulator_tf,
        b_out=coeffs.b_out,
        c_out=coeffs.c_out,
        output_cap_included=True,
    )


def extend(coeffs: CoeffSet, spec: StructureSpec) -> CoeffSet:
    """Dispatch to the extension matching the spec's structure variant."""
    if spec.variant is Structure.BOTH_FILTERS:
        return extend_with_both_filters(coeffs, spec)
    if spec.variant is Structure.INPUT_ONLY:
        return extend_with_input_filter(coeffs, spec)
    if spec.variant is Structure.POST_ONLY:
        return extend_with_post_filter(coeffs, spec)
    return extend_bare(coeffs, spec.modulator_tf)


def clc_extension(primed: CoeffSet, z_second_cap: FreqExpr) -> CoeffSet:
    """Account for a second input-filter capacitor across the source port.

    The extra shunt branch adds its admittance to the input-voltage
    coefficient of the absorbed port current; nothing else changes.  Passing
    the open-circuit marker returns the identical coefficient set.
    """
    extra = reciprocal(z_second_cap)
    if isinstance(extra, Const) and extra.value == 0.0:
        return primed
    return CoeffSet(
        a_in=primed.a_in,
        b_in=primed.b_in,
        c_in=primed.c_in + extra,
        a_out=primed.a_out,
        b_out=primed.b_out,
        c_out=primed.c_out,
        output_cap_included=primed.output_cap_included,
    )
