"""Randomized equivalence suite: closed-form route against the circuit solver.

Each case draws a full random setup (structure, topology, operating point,
filters, load, control, every feedforward active) and compares the six
composed coefficients plus the five canonical transfer functions against the
independent per-frequency circuit solves.  The draw sequence is fully
determined by the seed, so reports are reproducible byte for byte.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .eiac import InternalFeedforward, Structure, StructureSpec, extend
from .freq_core import constant
from .iac_lib import (
    Modulator, OperatingPoint, absorb_output_cap, buck_coeffs, modulator_gain,
    psfb_coeffs, transport_delay,
)
from .mna_oracle import OracleConfig, extract_primed_coeffs_many, solve_tf_many
from .network import (
    ConstantPowerLoad, ResistiveLoad, capacitor, impedance, inductor,
    input_filter, post_filter,
)
from .tf_canon import (
    PlantModel, control_chain, g_iio_back_current, g_vv_closed, g_vvc,
    pi_compensator, z_in_closed, z_out_unterminated,
)

__all__ = ["SuiteReport", "run_equivalence_suite"]

_STRUCTURES = (Structure.BOTH_FILTERS, Structure.INPUT_ONLY,
               Structure.POST_ONLY, Structure.BARE)
_COEFF_NAMES = ("a_in_p", "b_in_p", "c_in_p", "a_out_p", "b_out_p", "c_out_p")
_TF_NAMES = ("gvvc", "zin", "zo_un", "gvv", "giio")
_TF_BUILDERS = (g_vvc, z_in_closed, z_out_unterminated, g_vv_closed,
                g_iio_back_current)


@dataclass(frozen=True, eq=False)
class SuiteReport:
    seed: int
    cases: int
    n_freqs: int
    tol: float
    worst: dict
    passed: bool
    elapsed_s: float

    def render(self) -> str:
        """Deterministic text form (wall time deliberately excluded)."""
        lines = [f"oracle equivalence: seed={self.seed} cases={self.cases} "
                 f"freqs_per_case={self.n_freqs} tol={self.tol:.1e}"]
        for structure in _STRUCTURES:
            for name in _COEFF_NAMES + _TF_NAMES:
                value = self.worst[(structure.value, name)]
                lines.append(f"  {structure.value:<13s} {name:<8s} {value:.3e}")
        overall = max(self.worst.values())
        verdict = "pass" if self.passed else "FAIL"
        lines.append(f"verdict: {verdict} (worst {overall:.3e})")
        return "\n".join(lines)


def _logu(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(10.0 ** rng.uniform(np.log10(lo), np.log10(hi)))


def _rel_err(closed: np.ndarray, reference: np.ndarray) -> float:
    scale = np.maximum(np.abs(closed), np.abs(reference))
    scale = np.where(scale == 0.0, 1.0, scale)
    return float(np.max(np.abs(closed - reference) / scale))


def _random_case(rng: np.random.Generator, structure: Structure, n_freqs: int):
    has_input = structure in (Structure.BOTH_FILTERS, Structure.INPUT_ONLY)
    has_post = structure in (Structure.BOTH_FILTERS, Structure.POST_ONLY)

    use_psfb = rng.uniform() < 0.5
    v_g = _logu(rng, 50.0, 500.0)
    duty = float(rng.uniform(0.2, 0.8))
    turns = float(rng.uniform(0.2, 2.0)) if use_psfb else 1.0
    v_o = duty * turns * v_g
    f_sw = _logu(rng, 1e4, 2e5)
    inductance = _logu(rng, 10e-6, 1e-3)
    winding_ohm = float(rng.uniform(0.0, 0.1))
    leakage = _logu(rng, 0.1e-6, 10e-6) if use_psfb else 0.0

    r_equiv = _logu(rng, 0.5, 50.0)
    i_l = v_o / r_equiv
    use_cpl = rng.uniform() < 0.5
    load = (ConstantPowerLoad(v_out=v_o, p_out=v_o * v_o / r_equiv)
            if use_cpl else ResistiveLoad(r_equiv))

    op = OperatingPoint(v_in=v_g, v_out=v_o, duty=duty, i_inductor=i_l,
                        turns_ratio=turns, f_switch=f_sw)
    if use_psfb:
        raw = psfb_coeffs(op, inductance=inductance, series_ohm=winding_ohm,
                          leakage_h=leakage)
    else:
        raw = buck_coeffs(op, inductance=inductance, series_ohm=winding_ohm)

    z_out_cap = impedance(capacitor(_logu(rng, 10e-6, 10e-3),
                                    esr_ohm=float(rng.uniform(0.0, 0.05))))
    coeffs = raw if has_post else absorb_output_cap(raw, z_out_cap)

    carrier = float(rng.uniform(0.5, 2.0))
    mod_tf = modulator_gain(Modulator(carrier_amplitude=carrier,
                                      delay_s=transport_delay(duty, f_sw)))

    fil = None
    internal = None
    if has_input:
        fil = input_filter(
            inductor(_logu(rng, 1e-3, 100e-3),
                     series_ohm=float(rng.uniform(0.0, 0.5))),
            capacitor(_logu(rng, 10e-6, 1e-3),
                      esr_ohm=float(rng.uniform(0.0, 0.1))))
        internal = InternalFeedforward(
            absorbed_current=constant(float(rng.uniform(-0.2, 0.2))),
            input_voltage=constant(float(rng.uniform(-0.2, 0.2))))

    post = None
    if has_post:
        post = post_filter(
            inductor(_logu(rng, 1e-6, 100e-6),
                     series_ohm=float(rng.uniform(0.0, 0.05))),
            capacitor(_logu(rng, 1e-6, 100e-6),
                      esr_ohm=float(rng.uniform(0.0, 0.05))),
            z_converter_cap=z_out_cap)

    spec = StructureSpec(variant=structure, modulator_tf=mod_tf,
                         input_filter=fil, post_filter=post,
                         internal_ff=internal)
    chain = control_chain(
        pi_compensator(_logu(rng, 0.05, 5.0), _logu(rng, 1e-4, 1e-2)),
        sensor=_logu(rng, 0.01, 1.0),
        ff_in_current=constant(float(rng.uniform(-0.5, 0.5))),
        ff_in_voltage=constant(float(rng.uniform(-0.5, 0.5))),
        ff_out_current=constant(float(rng.uniform(-5.0, 5.0))))

    primed = extend(coeffs, spec)
    plant = PlantModel(coeffs=primed, load=load, control=chain)
    oracle = OracleConfig(coeffs=coeffs, spec=spec, control=chain, load=load)
    freqs = np.logspace(0.0, np.log10(f_sw / 2.0), n_freqs)
    return plant, oracle, freqs


def run_equivalence_suite(seed: int = 1, cases: int = 200, n_freqs: int = 30,
                          tol: float = 1e-8) -> SuiteReport:
    """Compare both routes over ``cases`` random setups; track worst errors."""
    rng = np.random.default_rng(seed)
    worst = {(structure.value, name): 0.0
             for structure in _STRUCTURES
             for name in _COEFF_NAMES + _TF_NAMES}
    started = time.perf_counter()
    for index in range(cases):
        structure = _STRUCTURES[index % len(_STRUCTURES)]
        plant, oracle, freqs = _random_case(rng, structure, n_freqs)
        s = 2j * np.pi * freqs
        reference = extract_primed_coeffs_many(oracle, freqs)
        composed = (plant.coeffs.a_in, plant.coeffs.b_in, plant.coeffs.c_in,
                    plant.coeffs.a_out, plant.coeffs.b_out, plant.coeffs.c_out)
        for name, expr, ref in zip(_COEFF_NAMES, composed, reference):
            err = _rel_err(expr.eval(s), ref)
            key = (structure.value, name)
            if err > worst[key]:
                worst[key] = err
        for name, builder in zip(_TF_NAMES, _TF_BUILDERS):
            closed = builder(plant).eval(s)
            ref = solve_tf_many(oracle, name, freqs)
            err = _rel_err(closed, ref)
            key = (structure.value, name)
            if err > worst[key]:
                worst[key] = err
    elapsed = time.perf_counter() - started
    passed = max(worst.values()) <= tol
    return SuiteReport(seed=seed, cases=cases, n_freqs=n_freqs, tol=tol,
                       worst=worst, passed=passed, elapsed_s=elapsed)
