"""Independent per-frequency circuit solver.

The composition tables and canonical transfer functions are closed-form
eliminations of one small linear circuit.  This module re-solves that circuit
numerically, frequency by frequency, straight from the port-wiring equations:
the two converter current balances, the modulator summing, Kirchhoff balances
at the filter nodes, the control summing, and the port closures.  It shares
nothing with the closed-form route beyond the unprimed coefficient values and
the raw branch impedances, so agreement between the two routes validates the
algebra rather than repeating it.

Each frequency yields one dense 10x10 complex system solved by
partial-pivoting elimination (LAPACK via numpy).  Residuals are checked; a
singular or inconsistent system raises with the offending frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eiac import Structure, StructureSpec
from .freq_core import FreqExpr, reciprocal
from .iac_lib import CoeffSet
from .network import LoadModel, load_impedance
from .tf_canon import ControlChain

__all__ = [
    "CustomRatio",
    "InconsistentConfig",
    "OracleConfig",
    "SingularSystem",
    "UNKNOWNS",
    "extract_primed_coeffs",
    "extract_primed_coeffs_many",
    "solve_tf",
    "solve_tf_many",
    "system_condition",
]


class SingularSystem(ArithmeticError):
    """The circuit system was singular or numerically inconsistent."""

    def __init__(self, message: str, freq_hz: float | None = None) -> None:
        super().__init__(message)
        self.freq_hz = freq_hz


class InconsistentConfig(ValueError):
    """The oracle configuration contradicts itself."""


_N = 10
(_V_CONV_IN, _V_CONV_OUT, _V_IN_PORT, _V_OUT_PORT, _I_ABSORBED, _I_INJECTED,
 _I_IN_PORT, _I_OUT_PORT, _DUTY, _CTRL) = range(_N)

#: Unknown names, in solution-vector order.
UNKNOWNS = ("v_conv_in", "v_conv_out", "v_in_port", "v_out_port",
            "i_absorbed", "i_injected", "i_in_port", "i_out_port",
            "duty", "ctrl")

_RESIDUAL_LIMIT = 1e-10

_TF_READ = {
    "gvvc": _V_OUT_PORT,
    "zin": _V_IN_PORT,
    "zo_un": _V_OUT_PORT,
    "gvv": _V_OUT_PORT,
    "giio": _I_IN_PORT,
}


@dataclass(frozen=True)
class CustomRatio:
    """Caller-defined response ratio.

    stimulus is one of "control", "in_voltage", "in_current", "out_current";
    numerator/denominator name unknowns from ``UNKNOWNS`` (denominator None
    means the unit stimulus itself).  load_connected keeps the load relation
    at the output port; feedback_closed keeps the voltage loop in the control
    summing.
    """

    stimulus: str
    numerator: str
    denominator: str | None = None
    load_connected: bool = True
    feedback_closed: bool = True

    def __post_init__(self) -> None:
        if self.stimulus not in ("control", "in_voltage", "in_current",
                                 "out_current"):
            raise InconsistentConfig(f"unknown stimulus {self.stimulus!r}")
        if self.numerator not in UNKNOWNS:
            raise InconsistentConfig(f"unknown response {self.numerator!r}")
        if self.denominator is not None and self.denominator not in UNKNOWNS:
            raise InconsistentConfig(f"unknown response {self.denominator!r}")


@dataclass(frozen=True, eq=False)
class OracleConfig:
    """Everything the circuit solver needs, in unprimed form."""

    coeffs: CoeffSet
    spec: StructureSpec
    control: ControlChain
    load: LoadModel
    z_clc_cap: FreqExpr | None = None

    def __post_init__(self) -> None:
        has_post = self.spec.variant in (Structure.BOTH_FILTERS, Structure.POST_ONLY)
        if has_post and self.coeffs.output_cap_included:
            raise InconsistentConfig(
                "a post-filter structure needs the output capacitor kept as a "
                "separate branch, not absorbed")
        if not has_post and not self.coeffs.output_cap_included:
            raise InconsistentConfig(
                "without a post-filter the output capacitor must be absorbed")
        has_input = self.spec.variant in (Structure.BOTH_FILTERS, Structure.INPUT_ONLY)
        if self.z_clc_cap is not None and not has_input:
            raise InconsistentConfig(
                "a second source-side capacitor requires an input filter")


def _assemble_wiring(cfg: OracleConfig, s: np.ndarray) -> np.ndarray:
    """Rows 0..6: converter balances, modulator, and filter-node Kirchhoff."""
    count = s.shape[0]
    a = np.zeros((count, _N, _N), dtype=np.complex128)
    c = cfg.coeffs
    gm = cfg.spec.modulator_tf.eval(s)
    has_input = cfg.spec.variant in (Structure.BOTH_FILTERS, Structure.INPUT_ONLY)
    has_post = cfg.spec.variant in (Structure.BOTH_FILTERS, Structure.POST_ONLY)

    # Absorbed-current balance at the converter input terminals.
    a[:, 0, _I_ABSORBED] = 1.0
    a[:, 0, _DUTY] = -c.a_in.eval(s)
    a[:, 0, _V_CONV_OUT] = c.b_in.eval(s)
    a[:, 0, _V_CONV_IN] = -c.c_in.eval(s)
    # Injected-current balance at the converter output terminals.
    a[:, 1, _I_INJECTED] = 1.0
    a[:, 1, _DUTY] = -c.a_out.eval(s)
    a[:, 1, _V_CONV_OUT] = c.b_out.eval(s)
    a[:, 1, _V_CONV_IN] = -c.c_out.eval(s)
    # Modulator: duty = gm * (ctrl + internal feedforward terms).
    a[:, 2, _DUTY] = 1.0
    a[:, 2, _CTRL] = -gm

    if has_input:
        ff = cfg.spec.internal_ff
        a[:, 2, _I_ABSORBED] = -gm * ff.absorbed_current.eval(s)
        a[:, 2, _V_CONV_IN] = a[:, 2, _V_CONV_IN] - gm * ff.input_voltage.eval(s)
        y_series = 1.0 / cfg.spec.input_filter.z_inductor.eval(s)
        y_shunt = 1.0 / cfg.spec.input_filter.z_capacitor.eval(s)
        y_extra = 0.0
        if cfg.z_clc_cap is not None:
            # The extra capacitor hangs at the source port; the sensed port
            # current includes its branch.
            y_extra = reciprocal(cfg.z_clc_cap).eval(s)
        # Converter-side filter node.
        a[:, 3, _I_ABSORBED] = 1.0
        a[:, 3, _V_IN_PORT] = -y_series
        a[:, 3, _V_CONV_IN] = a[:, 3, _V_CONV_IN] + y_series + y_shunt
        # Source node.
        a[:, 4, _I_IN_PORT] = 1.0
        a[:, 4, _V_IN_PORT] = -(y_series + y_extra)
        a[:, 4, _V_CONV_IN] = a[:, 4, _V_CONV_IN] + y_series
    else:
        # No input filter: the converter input terminals are the port.
        a[:, 3, _V_IN_PORT] = 1.0
        a[:, 3, _V_CONV_IN] = -1.0
        a[:, 4, _I_IN_PORT] = 1.0
        a[:, 4, _I_ABSORBED] = -1.0

    if has_post:
        post = cfg.spec.post_filter
        y_choke = 1.0 / post.z_inductor.eval(s)
        y_shunt_out = 1.0 / post.z_capacitor.eval(s)
        y_conv_cap = reciprocal(post.z_source_cap).eval(s)
        # Converter output node (output capacitor plus choke).
        a[:, 5, _I_INJECTED] = 1.0
        a[:, 5, _V_CONV_OUT] = -(y_choke + y_conv_cap)
        a[:, 5, _V_OUT_PORT] = y_choke
        # Load-side node.
        a[:, 6, _I_OUT_PORT] = 1.0
        a[:, 6, _V_CONV_OUT] = -y_choke
        a[:, 6, _V_OUT_PORT] = y_choke + y_shunt_out
    else:
        # No post-filter: injected current goes straight to the port.
        a[:, 5, _I_OUT_PORT] = 1.0
        a[:, 5, _I_INJECTED] = -1.0
        a[:, 6, _V_OUT_PORT] = 1.0
        a[:, 6, _V_CONV_OUT] = -1.0
    return a


def _control_summing(cfg: OracleConfig, a: np.ndarray, s: np.ndarray,
                     closed: bool) -> None:
    """Row 7: ctrl = (feedback) + feedforward terms (+ stimulus in rhs)."""
    ch = cfg.control
    a[:, 7, _CTRL] = 1.0
    a[:, 7, _I_OUT_PORT] = -ch.ff_out_current.eval(s)
    a[:, 7, _V_IN_PORT] = -ch.ff_in_voltage.eval(s)
    a[:, 7, _I_IN_PORT] = -ch.ff_in_current.eval(s)
    if closed:
        a[:, 7, _V_OUT_PORT] = ch.sensor.eval(s) * ch.compensator.eval(s)


def _load_row(cfg: OracleConfig, a: np.ndarray, s: np.ndarray) -> None:
    """Row 9: output current follows the load admittance."""
    y_load = reciprocal(load_impedance(cfg.load)).eval(s)
    a[:, 9, _I_OUT_PORT] = 1.0
    a[:, 9, _V_OUT_PORT] = -y_load


def _assemble_named(cfg: OracleConfig, which: str, s: np.ndarray):
    a = _assemble_wiring(cfg, s)
    b = np.zeros((s.shape[0], _N), dtype=np.complex128)
    _control_summing(cfg, a, s, closed=which != "gvvc")
    if which == "gvvc":
        b[:, 7] = 1.0
    # Input-port closure.
    if which == "gvv":
        a[:, 8, _V_IN_PORT] = 1.0
        b[:, 8] = 1.0
    elif which == "zin":
        a[:, 8, _I_IN_PORT] = 1.0
        b[:, 8] = 1.0
    else:
        a[:, 8, _V_IN_PORT] = 1.0  # stiff source: no port-voltage perturbation
    # Output-port closure.
    if which in ("zo_un", "giio"):
        a[:, 9, _I_OUT_PORT] = 1.0  # unit extraction, load disconnected
        b[:, 9] = 1.0
    else:
        _load_row(cfg, a, s)
    return a, b


def _assemble_custom(cfg: OracleConfig, ratio: CustomRatio, s: np.ndarray):
    a = _assemble_wiring(cfg, s)
    b = np.zeros((s.shape[0], _N), dtype=np.complex128)
    _control_summing(cfg, a, s, closed=ratio.feedback_closed)
    if ratio.stimulus == "control":
        b[:, 7] = 1.0
    if ratio.stimulus == "in_voltage":
        a[:, 8, _V_IN_PORT] = 1.0
        b[:, 8] = 1.0
    elif ratio.stimulus == "in_current":
        a[:, 8, _I_IN_PORT] = 1.0
        b[:, 8] = 1.0
    else:
        a[:, 8, _V_IN_PORT] = 1.0
    if ratio.stimulus == "out_current":
        a[:, 9, _I_OUT_PORT] = 1.0
        b[:, 9] = 1.0
    elif ratio.load_connected:
        _load_row(cfg, a, s)
    else:
        a[:, 9, _I_OUT_PORT] = 1.0
    return a, b


def _solve_checked(a: np.ndarray, b: np.ndarray, freq_hz: np.ndarray) -> np.ndarray:
    try:
        x = np.linalg.solve(a, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        # Locate the offender for the report.
        for k in range(a.shape[0]):
            try:
                np.linalg.solve(a[k], b[k])
            except np.linalg.LinAlgError:
                raise SingularSystem(
                    f"singular circuit system at {freq_hz[k]:.6g} Hz",
                    freq_hz=float(freq_hz[k])) from None
        raise SingularSystem("singular circuit system") from None
    residual = np.einsum("nij,nj->ni", a, x) - b
    # Backward-error scaling: a residual is only alarming relative to what
    # the matrix magnitudes could produce, not to the rhs alone.
    scale = (np.linalg.norm(a, axis=(1, 2)) * np.linalg.norm(x, axis=1)
             + np.linalg.norm(b, axis=1))
    rel = np.linalg.norm(residual, axis=1) / scale
    worst = int(np.argmax(rel))
    if rel[worst] > _RESIDUAL_LIMIT:
        raise SingularSystem(
            f"circuit solve residual {rel[worst]:.3e} exceeds "
            f"{_RESIDUAL_LIMIT:.0e} at {freq_hz[worst]:.6g} Hz",
            freq_hz=float(freq_hz[worst]))
    return x


def _s_of(freq_hz: np.ndarray) -> np.ndarray:
    return 2j * math.pi * np.asarray(freq_hz, dtype=float)


def solve_tf_many(cfg: OracleConfig, which, freq_hz) -> np.ndarray:
    """Vectorized ``solve_tf`` over an array of frequencies."""
    freqs = np.asarray(freq_hz, dtype=float)
    s = _s_of(freqs)
    if isinstance(which, CustomRatio):
        a, b = _assemble_custom(cfg, which, s)
        x = _solve_checked(a, b, freqs)
        num = x[:, UNKNOWNS.index(which.numerator)]
        if which.denominator is None:
            return num
        return num / x[:, UNKNOWNS.index(which.denominator)]
    if which not in _TF_READ:
        raise InconsistentConfig(f"unknown transfer function {which!r}")
    a, b = _assemble_named(cfg, which, s)
    x = _solve_checked(a, b, freqs)
    return x[:, _TF_READ[which]]


def solve_tf(cfg: OracleConfig, which, freq_hz: float) -> complex:
    """One canonical response at one frequency, solved from the circuit.

    ``which`` is "gvvc", "zin", "zo_un", "gvv", "giio", or a ``CustomRatio``.
    """
    return complex(solve_tf_many(cfg, which, np.asarray([freq_hz]))[0])


def extract_primed_coeffs_many(cfg: OracleConfig, freq_hz):
    """Primed coefficients from three pinned-port solves, vectorized.

    Returns (a_in, b_in, c_in, a_out, b_out, c_out) arrays.  Port variables
    are forced through ideal-source constraint rows (the port equations are
    replaced, not penalized).
    """
    freqs = np.asarray(freq_hz, dtype=float)
    s = _s_of(freqs)
    wiring = _assemble_wiring(cfg, s)
    responses = []
    for pin_index in (_CTRL, _V_OUT_PORT, _V_IN_PORT):
        a = wiring.copy()
        b = np.zeros((s.shape[0], _N), dtype=np.complex128)
        # Unit drive on one port variable, the other two grounded.
        a[:, 7, pin_index] = 1.0
        b[:, 7] = 1.0
        others = [k for k in (_CTRL, _V_OUT_PORT, _V_IN_PORT) if k != pin_index]
        a[:, 8, others[0]] = 1.0
        a[:, 9, others[1]] = 1.0
        x = _solve_checked(a, b, freqs)
        responses.append((x[:, _I_IN_PORT], x[:, _I_OUT_PORT]))
    (a_in, a_out), (b_in_neg, b_out_neg), (c_in, c_out) = responses
    return a_in, -b_in_neg, c_in, a_out, -b_out_neg, c_out


def extract_primed_coeffs(cfg: OracleConfig, freq_hz: float):
    """Six primed coefficients at one frequency, as complex scalars."""
    arrays = extract_primed_coeffs_many(cfg, np.asarray([freq_hz]))
    return tuple(complex(arr[0]) for arr in arrays)


def system_condition(cfg: OracleConfig, which, freq_hz: float) -> float:
    """Condition number of the assembled system at one frequency."""
    s = _s_of(np.asarray([freq_hz], dtype=float))
    if isinstance(which, CustomRatio):
        a, _ = _assemble_custom(cfg, which, s)
    else:
        if which not in _TF_READ:
            raise InconsistentConfig(f"unknown transfer function {which!r}")
        a, _ = _assemble_named(cfg, which, s)
    return float(np.linalg.cond(a[0]))
