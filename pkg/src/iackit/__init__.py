"""Frequency-domain composition toolkit for switching converter stages.

Small-signal converter models enter as injected/absorbed current
coefficients; input filters, output post-filters, and feedforward
compensations are folded in by closed-form composition, yielding canonical
transfer functions, terminal impedances, loop gains, and source/load
interaction ratios.  An independent per-frequency circuit solver provides a
second route used for validation throughout.
"""

from .config import (
    BuiltSystem,
    ConfigDoc,
    ParseError,
    ValidationError,
    build_system,
    parse_expression,
    parse_file,
    parse_quantity,
    parse_string,
    serialize,
)
from .eiac import (
    InternalFeedforward,
    Structure,
    StructureSpec,
    WrongCapFlag,
    WrongVariant,
    clc_extension,
    extend,
    extend_bare,
    extend_with_both_filters,
    extend_with_input_filter,
    extend_with_post_filter,
    zero_feedforward,
)
from .freq_core import (
    OPEN,
    AllZeroDenominator,
    Const,
    Delay,
    DivisionByZero,
    FreqExpr,
    FreqGrid,
    OpenCircuitEvaluation,
    SweepResult,
    add,
    constant,
    delay,
    div,
    mul,
    neg,
    parallel,
    poly_ratio,
    reciprocal,
    sweep,
)
from .iac_lib import (
    AlreadyAbsorbed,
    CoeffSet,
    Modulator,
    OperatingPoint,
    absorb_output_cap,
    buck_coeffs,
    modulator_gain,
    psfb_coeffs,
    transport_delay,
    user_coeffs,
)
from .mna_oracle import (
    CustomRatio,
    InconsistentConfig,
    OracleConfig,
    SingularSystem,
    extract_primed_coeffs,
    extract_primed_coeffs_many,
    solve_tf,
    solve_tf_many,
    system_condition,
)
from .network import (
    ConstantCurrentLoad,
    ConstantPowerLoad,
    Element,
    InputFilterModel,
    NetLoad,
    NonPositiveParameter,
    ParallelNet,
    PostFilterModel,
    ResistiveLoad,
    Series,
    TabulatedLoad,
    TabulatedOutOfRange,
    capacitor,
    impedance,
    inductor,
    input_filter,
    load_impedance,
    load_tabulated_csv,
    parallel_input_impedance,
    post_filter,
    resistor,
    resonance_freq,
    series,
    shunt_group,
)
from .stability import MarginReport, NyquistTrace, margins, nyquist, tmlg
from .validation import SuiteReport, run_equivalence_suite
from .tf_canon import (
    ControlChain,
    PlantModel,
    control_chain,
    g_iio_back_current,
    g_vv_closed,
    g_vvc,
    loop_gain,
    open_loop,
    pi_compensator,
    z_in_closed,
    z_out_terminated,
    z_out_unterminated,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
