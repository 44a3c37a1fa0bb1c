import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from iackit.freq_core import OPEN, OpenCircuitEvaluation
from iackit.network import (
    ConstantCurrentLoad, ConstantPowerLoad, Element, NetLoad,
    NonPositiveParameter, ResistiveLoad, TabulatedImpedance, TabulatedLoad,
    TabulatedOutOfRange, capacitor, impedance, inductor, input_filter,
    load_impedance, load_tabulated_csv, parallel_input_impedance, post_filter,
    resistor, resonance_freq, series, shunt_group,
)

from _helpers import at, rel_err


class TestElements:
    def test_resistor_impedance(self):
        assert at(impedance(resistor(4.7)), 123.0) == 4.7

    def test_inductor_impedance(self):
        v = at(impedance(inductor(38e-3, 0.5)), 10.0)
        assert v.real == pytest.approx(0.5, abs=1e-15)
        assert v.imag == pytest.approx(2.0 * math.pi * 10.0 * 38e-3, rel=1e-15)

    def test_capacitor_impedance(self):
        v = at(impedance(capacitor(100e-6)), 10.0)
        assert v.real == pytest.approx(0.0, abs=1e-15)
        assert v.imag == pytest.approx(-159.15494309189535, rel=1e-12)

    def test_capacitor_esr_adds_real_part(self):
        v = at(impedance(capacitor(100e-6, 0.05)), 10.0)
        assert v.real == pytest.approx(0.05, rel=1e-12)

    def test_validation(self):
        with pytest.raises(NonPositiveParameter):
            resistor(0.0)
        with pytest.raises(NonPositiveParameter):
            inductor(-1e-3)
        with pytest.raises(NonPositiveParameter):
            capacitor(float("nan"))
        with pytest.raises(ValueError):
            inductor(1e-3, -0.1)
        with pytest.raises(ValueError):
            Element("X", 1.0)

    def test_series_and_shunt_composition(self):
        net = series(resistor(1.0), resistor(2.0))
        assert at(impedance(net), 1.0) == 3.0
        net = shunt_group(resistor(2.0), resistor(2.0))
        assert at(impedance(net), 1.0) == pytest.approx(1.0, rel=1e-15)

    def test_empty_network_rejected(self):
        with pytest.raises(ValueError):
            series()
        with pytest.raises(ValueError):
            shunt_group()


class TestResonance:
    FROZEN = [
        (38e-3, 100e-6, 81.64476),
        (30e-3, 220e-6, 61.95098),
        (130e-6, 20400e-6, 97.73123),
        (1.0, 1.0, 0.1591549),
        (10e-6, 22e-6, 10730.224),
    ]

    @pytest.mark.parametrize("l_h, c_f, f_hz", FROZEN)
    def test_frozen_values(self, l_h, c_f, f_hz):
        assert resonance_freq(l_h, c_f) == pytest.approx(f_hz, rel=1e-6)

    def test_validation(self):
        with pytest.raises(NonPositiveParameter):
            resonance_freq(0.0, 1e-6)
        with pytest.raises(NonPositiveParameter):
            resonance_freq(1e-3, -1e-6)


class TestInputFilter:
    def test_output_impedance_hand_value(self):
        filt = input_filter(inductor(38e-3), capacitor(100e-6))
        v = at(filt.output_impedance, 10.0)
        assert v.real == pytest.approx(0.0, abs=1e-12)
        assert v.imag == pytest.approx(2.423974392594831, abs=1e-12)
        assert v.imag == pytest.approx(2.426, abs=3e-3)

    def test_undamped_peak_is_huge(self):
        filt = input_filter(inductor(38e-3), capacitor(100e-6))
        f0 = resonance_freq(38e-3, 100e-6)
        assert abs(at(filt.output_impedance, f0)) > 1e12

    def test_parasitics_damp_the_peak(self):
        filt = input_filter(inductor(38e-3, 0.5), capacitor(100e-6, 0.05))
        f0 = resonance_freq(38e-3, 100e-6)
        assert abs(at(filt.output_impedance, f0)) == pytest.approx(691.1386, rel=1e-3)

    def test_damping_leg_lowers_the_peak(self):
        plain = input_filter(inductor(30e-3, 0.5), capacitor(440e-6, 0.02))
        branch = shunt_group(capacitor(440e-6, 0.02),
                             series(resistor(2.2), capacitor(330e-9)))
        damped = input_filter(inductor(30e-3, 0.5), branch)
        f0 = resonance_freq(30e-3, 440e-6)
        assert abs(at(damped.output_impedance, f0)) <= abs(at(plain.output_impedance, f0))

    def test_series_element_must_be_inductor(self):
        with pytest.raises(ValueError):
            input_filter(resistor(1.0), capacitor(100e-6))


class TestPostFilter:
    def test_branch_impedances(self):
        filt = post_filter(inductor(10e-6, 5e-3), capacitor(22e-6, 5e-3))
        v = at(filt.z_output_parallel, 100.0)
        z_l = at(filt.z_inductor, 100.0)
        z_c = at(filt.z_capacitor, 100.0)
        assert rel_err(v, z_l * z_c / (z_l + z_c)) < 1e-12

    def test_without_converter_cap_input_side_is_inductor(self):
        filt = post_filter(inductor(10e-6), capacitor(22e-6))
        assert filt.z_input_parallel is filt.z_inductor
        assert filt.z_source_cap is OPEN
        with pytest.raises(OpenCircuitEvaluation):
            filt.z_source_cap.eval(1j)

    def test_with_converter_cap(self):
        z_cap = impedance(capacitor(47e-6, 5e-3))
        filt = post_filter(inductor(10e-6), capacitor(22e-6), z_converter_cap=z_cap)
        assert filt.z_source_cap is z_cap
        v = at(filt.z_input_parallel, 1000.0)
        expected = at(filt.z_inductor, 1000.0) * at(z_cap, 1000.0) / (
            at(filt.z_inductor, 1000.0) + at(z_cap, 1000.0))
        assert rel_err(v, expected) < 1e-12

    def test_element_kind_checks(self):
        with pytest.raises(ValueError):
            post_filter(capacitor(10e-6), capacitor(22e-6))
        with pytest.raises(ValueError):
            post_filter(inductor(10e-6), inductor(22e-6))


class TestLoads:
    def test_resistive(self):
        assert at(load_impedance(ResistiveLoad(2.2)), 50.0) == 2.2

    def test_constant_power_is_negative_incremental(self):
        z = load_impedance(ConstantPowerLoad(v_out=20.0, p_out=400.0 / 2.2))
        assert at(z, 1.0) == pytest.approx(-2.2, rel=1e-15)

    def test_constant_current_is_open(self):
        assert load_impedance(ConstantCurrentLoad()) is OPEN

    def test_net_load(self):
        z = load_impedance(NetLoad(series(resistor(1.0), inductor(1e-3))))
        v = at(z, 100.0)
        assert v.real == pytest.approx(1.0, abs=1e-15)
        assert v.imag == pytest.approx(2.0 * math.pi * 0.1, rel=1e-12)

    def test_load_validation(self):
        with pytest.raises(NonPositiveParameter):
            ResistiveLoad(0.0)
        with pytest.raises(NonPositiveParameter):
            ConstantPowerLoad(v_out=-1.0, p_out=10.0)
        with pytest.raises(NonPositiveParameter):
            ConstantPowerLoad(v_out=10.0, p_out=0.0)

    def test_two_converter_input_parallel(self):
        z = parallel_input_impedance(
            load_impedance(ConstantPowerLoad(20.0, 400.0 / 55.0)),
            load_impedance(ConstantPowerLoad(20.0, 400.0 / 55.0)))
        assert at(z, 1.0) == pytest.approx(-27.5, rel=1e-12)


class TestTabulated:
    def _table(self, **kw):
        return TabulatedLoad(np.array([10.0, 100.0]),
                             np.array([1.0 + 1.0j, 3.0 + 3.0j]), **kw)

    def test_log_frequency_interpolation(self):
        z = load_impedance(self._table())
        mid = at(z, math.sqrt(10.0 * 100.0))
        assert mid == pytest.approx(2.0 + 2.0j, abs=1e-12)

    def test_endpoints_exact(self):
        z = load_impedance(self._table())
        assert at(z, 10.0) == pytest.approx(1.0 + 1.0j, abs=1e-14)
        assert at(z, 100.0) == pytest.approx(3.0 + 3.0j, abs=1e-14)

    def test_conjugate_for_negative_imaginary_s(self):
        z = load_impedance(self._table())
        upper = complex(z.eval(2j * math.pi * 31.0))
        lower = complex(z.eval(-2j * math.pi * 31.0))
        assert lower == pytest.approx(np.conj(upper), abs=1e-14)

    def test_out_of_range_raises(self):
        z = load_impedance(self._table())
        with pytest.raises(TabulatedOutOfRange):
            at(z, 5.0)
        with pytest.raises(TabulatedOutOfRange):
            at(z, 200.0)

    def test_extrapolation_clamps(self):
        z = load_impedance(self._table(extrapolate=True))
        assert at(z, 5.0) == pytest.approx(1.0 + 1.0j, abs=1e-12)
        assert at(z, 500.0) == pytest.approx(3.0 + 3.0j, abs=1e-12)

    def test_table_validation(self):
        with pytest.raises(ValueError):
            TabulatedLoad(np.array([10.0]), np.array([1.0 + 0j]))
        with pytest.raises(ValueError):
            TabulatedLoad(np.array([10.0, 5.0]), np.array([1.0, 2.0]))
        with pytest.raises(NonPositiveParameter):
            TabulatedLoad(np.array([0.0, 10.0]), np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            TabulatedLoad(np.array([1.0, 10.0]), np.array([1.0, 2.0, 3.0]))

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text("freq_hz,real_ohm,imag_ohm\n10,1,1\n100,3,3\n")
        load = load_tabulated_csv(path)
        assert at(load_impedance(load), 10.0) == pytest.approx(1.0 + 1.0j)

    def test_csv_header_is_strict(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text("freq_hz,re_ohm,im_ohm\n10,1,1\n100,3,3\n")
        with pytest.raises(ValueError):
            load_tabulated_csv(path)

    def test_csv_column_count(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text("freq_hz,real_ohm,imag_ohm\n10,1\n")
        with pytest.raises(ValueError):
            load_tabulated_csv(path)


def _element_nets():
    pos = st.floats(min_value=1e-6, max_value=1e3)
    small = st.floats(min_value=0.0, max_value=10.0)
    leaf = st.one_of(
        pos.map(resistor),
        st.tuples(pos, small).map(lambda a: inductor(a[0], a[1])),
        st.tuples(pos, small).map(lambda a: capacitor(a[0], a[1])),
    )
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.lists(sub, min_size=2, max_size=3).map(lambda p: series(*p)),
            st.lists(sub, min_size=2, max_size=3).map(lambda p: shunt_group(*p)),
        ),
        max_leaves=6,
    )


class TestPassivity:
    @given(_element_nets(), st.floats(min_value=1e-2, max_value=1e6))
    @settings(max_examples=80, deadline=None)
    def test_passive_networks_never_supply_power(self, net, f):
        v = complex(impedance(net).eval(2j * math.pi * f))
        assume(np.isfinite(v.real) and np.isfinite(v.imag))
        assert v.real >= -1e-9 * max(1.0, abs(v))
