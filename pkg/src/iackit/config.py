"""System description files: parse, validate, serialize, and build.

One INI document describes a complete setup: converter operating point and
topology, optional input filter and post-filter, load, modulator, control
chain, feedforward gains, and sweep grid.  The power structure is inferred
from which filter sections are present rather than declared, so a document
cannot contradict itself on that axis.

Scalar values accept SI magnitude suffixes (``38m``, ``220u``, ``5n``);
small frequency-domain expressions (``0.5/(1 + s/6ke3)`` style, spelled with
plain numbers, ``s``, arithmetic, ``delay(t)``, ``parallel(a, b)``) are
accepted where a key is documented as expression-valued.
"""

from __future__ import annotations

import ast
import configparser
import os
from dataclasses import dataclass, replace

from .eiac import InternalFeedforward, Structure, StructureSpec, clc_extension, extend
from .freq_core import (
    OPEN, Const, FreqExpr, FreqGrid, add, constant, delay, div, mul, neg,
    parallel, poly_ratio,
)
from .iac_lib import (
    CoeffSet, Modulator, OperatingPoint, absorb_output_cap, buck_coeffs,
    modulator_gain, psfb_coeffs, transport_delay, user_coeffs,
)
from .mna_oracle import OracleConfig
from .network import (
    ConstantCurrentLoad, ConstantPowerLoad, LoadModel, ResistiveLoad,
    capacitor, impedance, inductor, input_filter, load_tabulated_csv,
    post_filter, resistor, series, shunt_group,
)
from .tf_canon import ControlChain, PlantModel, control_chain, pi_compensator

__all__ = [
    "BuiltSystem",
    "ConfigDoc",
    "ControlSection",
    "ConverterSection",
    "FeedforwardSection",
    "InputFilterSection",
    "LoadSection",
    "ModulatorSection",
    "ParseError",
    "PostFilterSection",
    "SweepSection",
    "ValidationError",
    "build_system",
    "parse_expression",
    "parse_file",
    "parse_quantity",
    "parse_string",
    "serialize",
]


class ParseError(ValueError):
    """A value or document could not be read at all."""

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(ValueError):
    """A well-formed document violates a constraint at ``path``."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


_SI_SUFFIXES = {
    "T": 1e12, "G": 1e9, "M": 1e6, "k": 1e3,
    "m": 1e-3, "u": 1e-6, "n": 1e-9, "p": 1e-12, "f": 1e-15,
}


def parse_quantity(text: str) -> float:
    """Read a scalar with an optional case-sensitive SI magnitude suffix."""
    stripped = text.strip()
    try:
        return float(stripped)
    except ValueError:
        pass
    if stripped and stripped[-1] in _SI_SUFFIXES:
        try:
            return float(stripped[:-1]) * _SI_SUFFIXES[stripped[-1]]
        except ValueError:
            pass
    raise ParseError(f"cannot parse quantity {text!r}")


_S_VARIABLE = poly_ratio((0.0, 1.0), (1.0,))


def _numeric_literal(node: ast.expr) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _numeric_literal(node.operand)
        return -inner if isinstance(node.op, ast.USub) else inner
    raise ParseError("expected a plain numeric literal")


def _expr_from_ast(node: ast.expr) -> FreqExpr:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return constant(float(node.value))
    if isinstance(node, ast.Name):
        if node.id == "s":
            return _S_VARIABLE
        raise ParseError(f"unknown name {node.id!r} in expression")
    if isinstance(node, ast.UnaryOp):
        if isinstance(node.op, ast.USub):
            return neg(_expr_from_ast(node.operand))
        if isinstance(node.op, ast.UAdd):
            return _expr_from_ast(node.operand)
        raise ParseError("unsupported unary operator")
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            exponent = node.right
            if not (isinstance(exponent, ast.Constant)
                    and isinstance(exponent.value, int)
                    and 0 <= exponent.value <= 8):
                raise ParseError("exponent must be an integer in 0..8")
            base = _expr_from_ast(node.left)
            out: FreqExpr = constant(1.0)
            for _ in range(exponent.value):
                out = mul(out, base)
            return out
        left = _expr_from_ast(node.left)
        right = _expr_from_ast(node.right)
        if isinstance(node.op, ast.Add):
            return add(left, right)
        if isinstance(node.op, ast.Sub):
            return add(left, neg(right))
        if isinstance(node.op, ast.Mult):
            return mul(left, right)
        if isinstance(node.op, ast.Div):
            return div(left, right)
        raise ParseError("unsupported binary operator")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.keywords:
            raise ParseError("only delay(t) and parallel(a, b) calls are allowed")
        if node.func.id == "delay":
            if len(node.args) != 1:
                raise ParseError("delay takes exactly one argument")
            return delay(_numeric_literal(node.args[0]))
        if node.func.id == "parallel":
            if len(node.args) != 2:
                raise ParseError("parallel takes exactly two arguments")
            return parallel(_expr_from_ast(node.args[0]),
                            _expr_from_ast(node.args[1]))
        raise ParseError(f"unknown function {node.func.id!r}")
    raise ParseError("unsupported expression construct")


def parse_expression(text: str) -> FreqExpr:
    """Build a frequency-domain expression from its textual form."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as err:
        raise ParseError(f"bad expression {text!r}: {err.msg}") from None
    return _expr_from_ast(tree.body)


@dataclass(frozen=True)
class ConverterSection:
    topology: str
    f_sw: float
    v_g: float | None = None
    v_o: float | None = None
    d: float | str = "auto"
    i_l: float | str = "auto"
    l: float | None = None
    r_l: float = 0.0
    c_fo: tuple[float, ...] = ()
    esr: float = 0.0
    n: float = 1.0
    l_lk: float = 0.0
    a_i: str | None = None
    b_i: str | None = None
    c_i: str | None = None
    a_o: str | None = None
    b_o: str | None = None
    c_o: str | None = None
    output_cap_included: bool | None = None


@dataclass(frozen=True)
class InputFilterSection:
    l_i: float
    c_if: tuple[float, ...]
    r_li: float = 0.0
    esr_cif: float = 0.0
    r_d: float | None = None
    c_d: float | None = None
    c_i2: float | None = None


@dataclass(frozen=True)
class PostFilterSection:
    l_p: float
    c_p: float
    r_lp: float = 0.0
    esr_cp: float = 0.0


@dataclass(frozen=True)
class LoadSection:
    kind: str
    r_load: float | None = None
    p_o: float | None = None
    csv: str | None = None
    extrapolate: bool = False


@dataclass(frozen=True)
class ModulatorSection:
    n_r: float = 1.0
    t_d: float | str = 0.0


@dataclass(frozen=True)
class ControlSection:
    compensator: str = "pi"
    k_p: float | None = None
    t_i: float | None = None
    expr: str | None = None
    g_sv: float = 1.0
    g_adc: float = 1.0


@dataclass(frozen=True)
class FeedforwardSection:
    f_ii: str = "0"
    f_vi: str = "0"
    f_ig: str = "0"
    f_vg: str = "0"
    f_io: str = "0"


@dataclass(frozen=True)
class SweepSection:
    f_min: float
    f_max: float
    points_per_decade: int = 100


@dataclass(frozen=True)
class ConfigDoc:
    converter: ConverterSection
    load: LoadSection
    modulator: ModulatorSection
    control: ControlSection
    feedforward: FeedforwardSection
    sweep: SweepSection
    input_filter: InputFilterSection | None = None
    post_filter: PostFilterSection | None = None

    @property
    def structure(self) -> Structure:
        if self.input_filter is not None and self.post_filter is not None:
            return Structure.BOTH_FILTERS
        if self.input_filter is not None:
            return Structure.INPUT_ONLY
        if self.post_filter is not None:
            return Structure.POST_ONLY
        return Structure.BARE


_KNOWN_SECTIONS = ("converter", "input_filter", "post_filter", "load",
                   "modulator", "control", "feedforward", "sweep")


class _SectionReader:
    """Pop-by-key view over one section; leftovers are unknown keys."""

    _MISSING = object()

    def __init__(self, name: str, pairs: dict[str, str]) -> None:
        self.name = name
        self.pairs = dict(pairs)

    def raw(self, key: str, default=None):
        return self.pairs.pop(key, default)

    def require(self, key: str) -> str:
        value = self.pairs.pop(key, self._MISSING)
        if value is self._MISSING:
            raise ValidationError(f"{self.name}.{key}", "required key missing")
        return value

    def quantity(self, key: str, default=_MISSING) -> float:
        value = self.pairs.pop(key, self._MISSING)
        if value is self._MISSING:
            if default is self._MISSING:
                raise ValidationError(f"{self.name}.{key}", "required key missing")
            return default
        try:
            return parse_quantity(value)
        except ParseError as err:
            raise ParseError(f"{self.name}.{key}: {err}") from None

    def quantity_list(self, key: str, default=_MISSING) -> tuple[float, ...]:
        value = self.pairs.pop(key, self._MISSING)
        if value is self._MISSING:
            if default is self._MISSING:
                raise ValidationError(f"{self.name}.{key}", "required key missing")
            return default
        try:
            return tuple(parse_quantity(part) for part in value.split(","))
        except ParseError as err:
            raise ParseError(f"{self.name}.{key}: {err}") from None

    def quantity_or_auto(self, key: str, default: float | str) -> float | str:
        value = self.pairs.pop(key, self._MISSING)
        if value is self._MISSING:
            return default
        if value.strip() == "auto":
            return "auto"
        try:
            return parse_quantity(value)
        except ParseError as err:
            raise ParseError(f"{self.name}.{key}: {err}") from None

    def boolean(self, key: str, default=_MISSING):
        value = self.pairs.pop(key, self._MISSING)
        if value is self._MISSING:
            if default is self._MISSING:
                raise ValidationError(f"{self.name}.{key}", "required key missing")
            return default
        lowered = value.strip().lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ValidationError(f"{self.name}.{key}", f"not a boolean: {value!r}")

    def integer(self, key: str, default=_MISSING) -> int:
        value = self.pairs.pop(key, self._MISSING)
        if value is self._MISSING:
            if default is self._MISSING:
                raise ValidationError(f"{self.name}.{key}", "required key missing")
            return default
        try:
            return int(value.strip())
        except ValueError:
            raise ValidationError(f"{self.name}.{key}", f"not an integer: {value!r}") from None

    def finish(self) -> None:
        if self.pairs:
            key = sorted(self.pairs)[0]
            raise ValidationError(f"{self.name}.{key}", "unknown key")


def _read_converter(sect: _SectionReader) -> ConverterSection:
    topology = sect.require("topology").strip()
    if topology not in ("buck", "psfb", "user"):
        raise ValidationError("converter.topology", f"unknown topology {topology!r}")
    f_sw = sect.quantity("f_sw")
    if f_sw <= 0.0:
        raise ValidationError("converter.f_sw", "switching frequency must be positive")
    common = dict(
        v_g=sect.quantity("v_g", None),
        v_o=sect.quantity("v_o", None),
        d=sect.quantity_or_auto("d", "auto"),
        i_l=sect.quantity_or_auto("i_l", "auto"),
        l=sect.quantity("l", None),
        r_l=sect.quantity("r_l", 0.0),
        c_fo=sect.quantity_list("c_fo", ()),
        esr=sect.quantity("esr", 0.0),
        n=sect.quantity("n", 1.0),
        l_lk=sect.quantity("l_lk", 0.0),
    )
    if topology == "user":
        exprs = {key: sect.require(key).strip()
                 for key in ("a_i", "b_i", "c_i", "a_o", "b_o", "c_o")}
        flag = sect.boolean("output_cap_included")
        out = ConverterSection(topology=topology, f_sw=f_sw, **common,
                               **exprs, output_cap_included=flag)
    else:
        out = ConverterSection(topology=topology, f_sw=f_sw, **common)
        for field_name in ("v_g", "v_o", "l"):
            if common[field_name] is None:
                raise ValidationError(f"converter.{field_name}", "required key missing")
        if topology == "buck" and common["n"] != 1.0:
            raise ValidationError("converter.n", "a buck stage has no turns ratio")
    sect.finish()
    if isinstance(out.d, float) and not 0.0 < out.d < 1.0:
        raise ValidationError("converter.d", "duty cycle must sit strictly inside (0, 1)")
    return out


def _read_input_filter(sect: _SectionReader) -> InputFilterSection:
    out = InputFilterSection(
        l_i=sect.quantity("l_i"),
        c_if=sect.quantity_list("c_if"),
        r_li=sect.quantity("r_li", 0.0),
        esr_cif=sect.quantity("esr_cif", 0.0),
        r_d=sect.quantity("r_d", None),
        c_d=sect.quantity("c_d", None),
        c_i2=sect.quantity("c_i2", None),
    )
    sect.finish()
    if (out.r_d is None) != (out.c_d is None):
        raise ValidationError("input_filter.r_d",
                              "damping needs both r_d and c_d or neither")
    if out.l_i <= 0.0 or any(c <= 0.0 for c in out.c_if):
        raise ValidationError("input_filter.l_i", "element values must be positive")
    return out


def _read_post_filter(sect: _SectionReader) -> PostFilterSection:
    out = PostFilterSection(
        l_p=sect.quantity("l_p"),
        c_p=sect.quantity("c_p"),
        r_lp=sect.quantity("r_lp", 0.0),
        esr_cp=sect.quantity("esr_cp", 0.0),
    )
    sect.finish()
    if out.l_p <= 0.0 or out.c_p <= 0.0:
        raise ValidationError("post_filter.l_p", "element values must be positive")
    return out


def _read_load(sect: _SectionReader) -> LoadSection:
    kind = sect.require("kind").strip()
    if kind not in ("resistive", "cpl", "constant_current", "tabulated"):
        raise ValidationError("load.kind", f"unknown load kind {kind!r}")
    out = LoadSection(
        kind=kind,
        r_load=sect.quantity("r_load", None),
        p_o=sect.quantity("p_o", None),
        csv=(sect.raw("csv") or None),
        extrapolate=sect.boolean("extrapolate", False),
    )
    sect.finish()
    if kind == "resistive" and (out.r_load is None or out.r_load <= 0.0):
        raise ValidationError("load.r_load", "resistive load needs r_load > 0")
    if kind == "cpl" and (out.p_o is None or out.p_o <= 0.0):
        raise ValidationError("load.p_o", "constant-power load needs p_o > 0")
    if kind == "tabulated" and not out.csv:
        raise ValidationError("load.csv", "tabulated load needs a csv path")
    return out


def _read_modulator(sect: _SectionReader) -> ModulatorSection:
    raw_td = sect.raw("t_d")
    if raw_td is None:
        t_d: float | str = 0.0
    elif raw_td.strip() == "eq24":
        t_d = "eq24"
    else:
        try:
            t_d = parse_quantity(raw_td)
        except ParseError as err:
            raise ParseError(f"modulator.t_d: {err}") from None
        if t_d < 0.0:
            raise ValidationError("modulator.t_d", "delay must be nonnegative")
    out = ModulatorSection(n_r=sect.quantity("n_r", 1.0), t_d=t_d)
    sect.finish()
    if out.n_r <= 0.0:
        raise ValidationError("modulator.n_r", "carrier amplitude must be positive")
    return out


def _read_control(sect: _SectionReader) -> ControlSection:
    compensator = (sect.raw("compensator") or "pi").strip()
    if compensator not in ("pi", "expression"):
        raise ValidationError("control.compensator",
                              f"unknown compensator {compensator!r}")
    out = ControlSection(
        compensator=compensator,
        k_p=sect.quantity("k_p", None),
        t_i=sect.quantity("t_i", None),
        expr=(sect.raw("expr") or None),
        g_sv=sect.quantity("g_sv", 1.0),
        g_adc=sect.quantity("g_adc", 1.0),
    )
    sect.finish()
    if compensator == "pi" and (out.k_p is None or out.t_i is None):
        raise ValidationError("control.k_p", "pi compensator needs k_p and t_i")
    if compensator == "expression" and not out.expr:
        raise ValidationError("control.expr", "expression compensator needs expr")
    return out


def _read_feedforward(sect: _SectionReader) -> FeedforwardSection:
    out = FeedforwardSection(
        f_ii=(sect.raw("f_ii") or "0").strip(),
        f_vi=(sect.raw("f_vi") or "0").strip(),
        f_ig=(sect.raw("f_ig") or "0").strip(),
        f_vg=(sect.raw("f_vg") or "0").strip(),
        f_io=(sect.raw("f_io") or "0").strip(),
    )
    sect.finish()
    return out


def _read_sweep(sect: _SectionReader, f_sw: float) -> SweepSection:
    out = SweepSection(
        f_min=sect.quantity("f_min", 1.0),
        f_max=sect.quantity("f_max", f_sw / 2.0),
        points_per_decade=sect.integer("points_per_decade", 100),
    )
    sect.finish()
    if out.f_min <= 0.0 or out.f_max <= out.f_min:
        raise ValidationError("sweep.f_min", "need 0 < f_min < f_max")
    if out.points_per_decade < 1:
        raise ValidationError("sweep.points_per_decade", "must be at least 1")
    return out


def _is_zero_text(expr_text: str) -> bool:
    built = parse_expression(expr_text)
    return isinstance(built, Const) and built.value == 0.0


def parse_string(text: str) -> ConfigDoc:
    """Parse and validate one system description document."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ParseError(str(err), line=getattr(err, "lineno", None)) from None
    for name in cp.sections():
        if name not in _KNOWN_SECTIONS:
            raise ValidationError(name, "unknown section")
    if not cp.has_section("converter"):
        raise ValidationError("converter", "required section missing")
    if not cp.has_section("load"):
        raise ValidationError("load", "required section missing")

    def reader(name: str) -> _SectionReader:
        pairs = dict(cp.items(name)) if cp.has_section(name) else {}
        return _SectionReader(name, pairs)

    converter = _read_converter(reader("converter"))
    doc = ConfigDoc(
        converter=converter,
        load=_read_load(reader("load")),
        modulator=_read_modulator(reader("modulator")),
        control=_read_control(reader("control")),
        feedforward=_read_feedforward(reader("feedforward")),
        sweep=_read_sweep(reader("sweep"), converter.f_sw),
        input_filter=(_read_input_filter(reader("input_filter"))
                      if cp.has_section("input_filter") else None),
        post_filter=(_read_post_filter(reader("post_filter"))
                     if cp.has_section("post_filter") else None),
    )
    if doc.input_filter is None:
        for key in ("f_ii", "f_vi"):
            if not _is_zero_text(getattr(doc.feedforward, key)):
                raise ValidationError(
                    f"feedforward.{key}",
                    "modulator-side feedforward needs an input filter")
    if doc.load.kind == "cpl" and doc.converter.v_o is None:
        raise ValidationError("load.p_o", "constant-power load needs converter v_o")
    # Exercise expression keys now so errors surface at parse time.
    for key in ("f_ii", "f_vi", "f_ig", "f_vg", "f_io"):
        try:
            parse_expression(getattr(doc.feedforward, key))
        except ParseError as err:
            raise ParseError(f"feedforward.{key}: {err}") from None
    if doc.control.compensator == "expression":
        try:
            parse_expression(doc.control.expr)
        except ParseError as err:
            raise ParseError(f"control.expr: {err}") from None
    if doc.converter.topology == "user":
        for key in ("a_i", "b_i", "c_i", "a_o", "b_o", "c_o"):
            try:
                parse_expression(getattr(doc.converter, key))
            except ParseError as err:
                raise ParseError(f"converter.{key}: {err}") from None
    return doc


def parse_file(path) -> ConfigDoc:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_string(handle.read())


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(repr(v) for v in value)
    return str(value)


def serialize(doc: ConfigDoc) -> str:
    """Canonical textual form; ``parse_string`` inverts it exactly."""
    lines: list[str] = []

    def section(name: str, pairs) -> None:
        lines.append(f"[{name}]")
        for key, value in pairs:
            if value is None or value == ():
                continue
            lines.append(f"{key} = {_fmt(value)}")
        lines.append("")

    conv = doc.converter
    section("converter", [
        ("topology", conv.topology), ("f_sw", conv.f_sw),
        ("v_g", conv.v_g), ("v_o", conv.v_o), ("d", conv.d), ("i_l", conv.i_l),
        ("l", conv.l), ("r_l", conv.r_l), ("c_fo", conv.c_fo), ("esr", conv.esr),
        ("n", conv.n), ("l_lk", conv.l_lk),
        ("a_i", conv.a_i), ("b_i", conv.b_i), ("c_i", conv.c_i),
        ("a_o", conv.a_o), ("b_o", conv.b_o), ("c_o", conv.c_o),
        ("output_cap_included", conv.output_cap_included),
    ])
    if doc.input_filter is not None:
        fil = doc.input_filter
        section("input_filter", [
            ("l_i", fil.l_i), ("r_li", fil.r_li), ("c_if", fil.c_if),
            ("esr_cif", fil.esr_cif), ("r_d", fil.r_d), ("c_d", fil.c_d),
            ("c_i2", fil.c_i2),
        ])
    if doc.post_filter is not None:
        post = doc.post_filter
        section("post_filter", [
            ("l_p", post.l_p), ("r_lp", post.r_lp),
            ("c_p", post.c_p), ("esr_cp", post.esr_cp),
        ])
    section("load", [
        ("kind", doc.load.kind), ("r_load", doc.load.r_load),
        ("p_o", doc.load.p_o), ("csv", doc.load.csv),
        ("extrapolate", doc.load.extrapolate),
    ])
    section("modulator", [("n_r", doc.modulator.n_r), ("t_d", doc.modulator.t_d)])
    ctl = doc.control
    section("control", [
        ("compensator", ctl.compensator), ("k_p", ctl.k_p), ("t_i", ctl.t_i),
        ("expr", ctl.expr), ("g_sv", ctl.g_sv), ("g_adc", ctl.g_adc),
    ])
    ff = doc.feedforward
    section("feedforward", [
        ("f_ii", ff.f_ii), ("f_vi", ff.f_vi), ("f_ig", ff.f_ig),
        ("f_vg", ff.f_vg), ("f_io", ff.f_io),
    ])
    section("sweep", [
        ("f_min", doc.sweep.f_min), ("f_max", doc.sweep.f_max),
        ("points_per_decade", doc.sweep.points_per_decade),
    ])
    return "\n".join(lines)


@dataclass(frozen=True, eq=False)
class BuiltSystem:
    """Everything derived from one document, ready to evaluate."""

    doc: ConfigDoc
    op: OperatingPoint | None
    coeffs: CoeffSet
    spec: StructureSpec
    primed: CoeffSet
    control: ControlChain
    load: LoadModel
    plant: PlantModel
    oracle: OracleConfig
    grid: FreqGrid


def _build_load(doc: ConfigDoc, base_dir) -> LoadModel:
    sect = doc.load
    if sect.kind == "resistive":
        return ResistiveLoad(sect.r_load)
    if sect.kind == "cpl":
        return ConstantPowerLoad(v_out=doc.converter.v_o, p_out=sect.p_o)
    if sect.kind == "constant_current":
        return ConstantCurrentLoad()
    path = sect.csv
    if not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    return load_tabulated_csv(path, extrapolate=sect.extrapolate)


def _resolved_duty(doc: ConfigDoc) -> float | None:
    conv = doc.converter
    if isinstance(conv.d, float):
        return conv.d
    if conv.v_g is not None and conv.v_o is not None:
        duty = conv.v_o / (conv.n * conv.v_g)
        if not 0.0 < duty < 1.0:
            raise ValidationError("converter.d",
                                  f"auto duty {duty:.4g} falls outside (0, 1)")
        return duty
    return None


def build_system(doc: ConfigDoc, base_dir=".") -> BuiltSystem:
    """Turn one validated document into evaluable model objects."""
    conv = doc.converter
    structure = doc.structure
    has_input = structure in (Structure.BOTH_FILTERS, Structure.INPUT_ONLY)
    has_post = structure in (Structure.BOTH_FILTERS, Structure.POST_ONLY)
    load = _build_load(doc, base_dir)

    z_out_cap = (impedance(capacitor(sum(conv.c_fo), esr_ohm=conv.esr))
                 if conv.c_fo else OPEN)

    op: OperatingPoint | None = None
    if conv.topology in ("buck", "psfb"):
        duty = _resolved_duty(doc)
        i_l = conv.i_l
        if i_l == "auto":
            if isinstance(load, ResistiveLoad):
                i_l = conv.v_o / load.r_ohm
            elif isinstance(load, ConstantPowerLoad):
                i_l = load.p_out / conv.v_o
            else:
                raise ValidationError(
                    "converter.i_l",
                    "auto inductor current needs a resistive or constant-power load")
        op = OperatingPoint(v_in=conv.v_g, v_out=conv.v_o, duty=duty,
                            i_inductor=i_l, turns_ratio=conv.n,
                            f_switch=conv.f_sw)
        if conv.topology == "buck":
            raw = buck_coeffs(op, inductance=conv.l, series_ohm=conv.r_l)
        else:
            raw = psfb_coeffs(op, inductance=conv.l, series_ohm=conv.r_l,
                              leakage_h=conv.l_lk)
    else:
        raw = user_coeffs(
            a_in=parse_expression(conv.a_i), b_in=parse_expression(conv.b_i),
            c_in=parse_expression(conv.c_i), a_out=parse_expression(conv.a_o),
            b_out=parse_expression(conv.b_o), c_out=parse_expression(conv.c_o),
            output_cap_included=conv.output_cap_included)

    if has_post:
        if raw.output_cap_included:
            raise ValidationError(
                "converter.output_cap_included",
                "a post-filter needs the output capacitor kept separate")
        coeffs = raw
    else:
        coeffs = raw if raw.output_cap_included \
            else absorb_output_cap(raw, z_out_cap)

    t_d = doc.modulator.t_d
    if t_d == "eq24":
        duty_for_delay = _resolved_duty(doc)
        if duty_for_delay is None:
            raise ValidationError("modulator.t_d",
                                  "derived transport delay needs a duty cycle")
        t_d = transport_delay(duty_for_delay, conv.f_sw)
    mod_tf = modulator_gain(Modulator(carrier_amplitude=doc.modulator.n_r,
                                      delay_s=t_d))

    fil = None
    z_clc = None
    if has_input:
        sect = doc.input_filter
        main_branch = capacitor(sum(sect.c_if), esr_ohm=sect.esr_cif)
        if sect.r_d is not None:
            branch = shunt_group(main_branch,
                                 series(resistor(sect.r_d), capacitor(sect.c_d)))
        else:
            branch = main_branch
        fil = input_filter(inductor(sect.l_i, series_ohm=sect.r_li), branch)
        if sect.c_i2 is not None:
            z_clc = impedance(capacitor(sect.c_i2))

    post = None
    if has_post:
        sect = doc.post_filter
        post = post_filter(inductor(sect.l_p, series_ohm=sect.r_lp),
                           capacitor(sect.c_p, esr_ohm=sect.esr_cp),
                           z_converter_cap=z_out_cap)

    ff = doc.feedforward
    internal = None
    if has_input:
        internal = InternalFeedforward(
            absorbed_current=parse_expression(ff.f_ii),
            input_voltage=parse_expression(ff.f_vi))

    spec = StructureSpec(variant=structure, modulator_tf=mod_tf,
                         input_filter=fil, post_filter=post,
                         internal_ff=internal)

    if doc.control.compensator == "pi":
        comp = pi_compensator(doc.control.k_p, doc.control.t_i)
    else:
        comp = parse_expression(doc.control.expr)
    chain = control_chain(
        comp, sensor=doc.control.g_sv, adc_chain=doc.control.g_adc,
        ff_in_current=parse_expression(ff.f_ig),
        ff_in_voltage=parse_expression(ff.f_vg),
        ff_out_current=parse_expression(ff.f_io))

    primed = extend(coeffs, spec)
    if z_clc is not None:
        primed = clc_extension(primed, z_clc)

    plant = PlantModel(coeffs=primed, load=load, control=chain)
    oracle = OracleConfig(coeffs=coeffs, spec=spec, control=chain, load=load,
                          z_clc_cap=z_clc)
    grid = FreqGrid(doc.sweep.f_min, doc.sweep.f_max,
                    doc.sweep.points_per_decade)
    return BuiltSystem(doc=doc, op=op, coeffs=coeffs, spec=spec, primed=primed,
                       control=chain, load=load, plant=plant, oracle=oracle,
                       grid=grid)
