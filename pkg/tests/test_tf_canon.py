import math

import numpy as np
import pytest

from iackit.freq_core import constant
from iackit.network import load_impedance
from iackit.tf_canon import (
    PlantModel, control_chain, g_iio_back_current, g_vv_closed, g_vvc,
    loop_gain, open_loop, pi_compensator, z_in_closed, z_out_terminated,
    z_out_unterminated,
)

from _helpers import at, rel_err

_FREQS = (2.0, 47.0, 81.0, 560.0, 3.3e3, 2.4e4)


class TestPiCompensator:
    def test_corner_value(self):
        comp = pi_compensator(0.073, 0.0022)
        f_corner = 1.0 / (2.0 * math.pi * 0.0022)
        assert f_corner == pytest.approx(72.3432, rel=1e-5)
        v = at(comp, f_corner)
        assert v == pytest.approx(0.073 * (1.0 - 1.0j), rel=1e-12)
        assert abs(v) == pytest.approx(0.073 * math.sqrt(2.0), rel=1e-12)

    def test_integral_action_dominates_low_frequency(self):
        comp = pi_compensator(1.0, 1e-3)
        assert abs(at(comp, 0.01)) > 1e3

    def test_validation(self):
        with pytest.raises(ValueError):
            pi_compensator(0.0, 1e-3)
        with pytest.raises(ValueError):
            pi_compensator(1.0, 0.0)


def _fb_at(plant, f):
    return at(plant.control.sensor, f) * at(plant.control.compensator, f)


class TestZeroFeedforwardReductions:
    """The shipped reference designs carry no external feedforward, so every
    canonical response must collapse to its short two-term form."""

    def _check(self, built):
        plant = built.plant
        c = plant.coeffs
        y_expr = load_impedance(plant.load)
        for f in _FREQS:
            y = 1.0 / at(y_expr, f)
            fb = _fb_at(plant, f)
            a_in, b_in, c_in = at(c.a_in, f), at(c.b_in, f), at(c.c_in, f)
            a_out, b_out, c_out = at(c.a_out, f), at(c.b_out, f), at(c.c_out, f)
            assert rel_err(at(g_vvc(plant), f), a_out / (b_out + y)) < 1e-12
            assert rel_err(at(z_out_unterminated(plant), f),
                           -1.0 / (b_out + a_out * fb)) < 1e-12
            gvv = c_out / (b_out + a_out * fb + y)
            assert rel_err(at(g_vv_closed(plant), f), gvv) < 1e-12
            assert rel_err(at(g_iio_back_current(plant), f),
                           (b_in + a_in * fb) / (b_out + a_out * fb)) < 1e-12
            zin = 1.0 / (c_in - (a_in * fb + b_in) * gvv)
            assert rel_err(at(z_in_closed(plant), f), zin) < 1e-12

    def test_200w_design(self, built_200w):
        self._check(built_200w)

    def test_20kw_design(self, built_20kw):
        self._check(built_20kw)

    def test_bare_design(self, built_200w_nofilter):
        self._check(built_200w_nofilter)


class TestCrossRelations:
    def test_back_current_equals_minus_impedance_product(self, built_200w):
        plant = built_200w.plant
        c = plant.coeffs
        for f in _FREQS:
            fb = _fb_at(plant, f)
            lhs = at(g_iio_back_current(plant), f)
            rhs = -(at(c.b_in, f) + at(c.a_in, f) * fb) \
                * at(z_out_unterminated(plant), f)
            assert rel_err(lhs, rhs) < 1e-12

    def test_terminated_impedance_is_parallel_combination(self, built_200w):
        plant = built_200w.plant
        z_l = load_impedance(plant.load)
        for f in _FREQS:
            z_un = at(z_out_unterminated(plant), f)
            zl = at(z_l, f)
            expected = (-z_un) * zl / (-z_un + zl)
            assert rel_err(at(z_out_terminated(plant), f), expected) < 1e-12

    def test_loop_gain_factors(self, built_20kw):
        plant = built_20kw.plant
        ch = plant.control
        for f in _FREQS:
            expected = at(g_vvc(plant), f) * at(ch.adc_chain, f) \
                * at(ch.sensor, f) * at(ch.compensator, f)
            assert rel_err(at(loop_gain(plant), f), expected) < 1e-12


class TestOpenLoop:
    def test_compensator_zeroed(self, built_200w):
        opened = open_loop(built_200w.plant)
        assert at(opened.control.compensator, 10.0) == 0.0
        assert at(loop_gain(opened), 10.0) == 0.0

    def test_idempotent_and_same_object(self, built_200w):
        once = open_loop(built_200w.plant)
        assert open_loop(once) is once

    def test_feedback_paths_differ_open_vs_closed(self, built_200w):
        plant = built_200w.plant
        opened = open_loop(plant)
        for f in (10.0, 81.0, 900.0):
            closed_v = at(g_vv_closed(plant), f)
            open_v = at(g_vv_closed(opened), f)
            assert abs(closed_v - open_v) > 1e-12 * max(abs(closed_v), abs(open_v))

    def test_control_gain_unaffected_by_opening(self, built_200w):
        # The control-to-output gain is defined loop-open already, so zeroing
        # the compensator must not move it.
        plant = built_200w.plant
        opened = open_loop(plant)
        for f in (10.0, 81.0, 900.0):
            assert rel_err(at(g_vvc(plant), f), at(g_vvc(opened), f)) < 1e-13


class TestWithConstantPlant:
    """Scalar coefficient set small enough to verify by hand."""

    def _plant(self):
        from iackit.iac_lib import user_coeffs
        coeffs = user_coeffs(
            a_in=constant(2.0), b_in=constant(0.5), c_in=constant(0.25),
            a_out=constant(4.0), b_out=constant(1.0), c_out=constant(0.5),
            output_cap_included=True)
        from iackit.network import ResistiveLoad
        return PlantModel(coeffs=coeffs, load=ResistiveLoad(2.0),
                          control=control_chain(constant(3.0), sensor=0.1))

    def test_hand_solved_values(self):
        plant = self._plant()
        # y = 0.5, fb = 0.3
        assert at(g_vvc(plant), 1.0) == pytest.approx(4.0 / 1.5, rel=1e-14)
        assert at(z_out_unterminated(plant), 1.0) == pytest.approx(
            -1.0 / (1.0 + 4.0 * 0.3), rel=1e-14)
        gvv = 0.5 / (1.0 + 4.0 * 0.3 + 0.5)
        assert at(g_vv_closed(plant), 1.0) == pytest.approx(gvv, rel=1e-14)
        zin = 1.0 / (0.25 - (2.0 * 0.3 + 0.5) * gvv)
        assert at(z_in_closed(plant), 1.0) == pytest.approx(zin, rel=1e-14)
