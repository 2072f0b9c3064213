"""Experiment configuration: a sectioned ``key = value`` text file.

Example::

    [experiment]
    plant = pendulum
    variant = fnt-m1

    [gains]
    m = 0.6
    r = 5/3        # fractions are accepted

Every key has a documented default; unknown sections or keys are errors.
Per-subsystem gains take either one value (broadcast) or one value per
state. :func:`format_config` writes a fully resolved file that parses back
to an equal config.
"""

from __future__ import annotations

import configparser
import copy
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .approximator import RbfNetwork
from .core_math import SwitchBoundaries, SwitchForm
from .expr import ExpressionError, StateFunction, TimeFunction
from .gains import DEFAULT_VECTOR_GAINS, VECTOR_GAINS, ControllerVariant, FilterGains, GainSet, _stretch, broadcast
from .plant import PendulumParams, PlantModel, ReferenceSignal, chain_model, oracle_model, pendulum_model


class ConfigError(ValueError):
    """Invalid configuration text or values."""


PLANTS = ("pendulum", "oracle", "chain")


def _parse_number(text: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return float(Fraction(text.replace(" ", "")))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a number: {text!r}") from None


def _split(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _fmt_number(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class Key:
    kind: str
    default: Any
    help: str = ""


# kind: number | numbers | int | bool | text | choice | variant | time_expr | state_exprs | pair
SCHEMA: dict[str, dict[str, Key]] = {
    "experiment": {
        "name": Key("text", "run", "output file stem"),
        "plant": Key("choice", "pendulum", "pendulum | oracle | chain"),
        "variant": Key("variant", "fnt-m1", "fnt-m1..fnt-m3s, fxt-m4..fxt-m6s"),
        "dt": Key("number", 1e-3, "integration step [s]"),
        "horizon": Key("number", 20.0, "simulated time [s]"),
        "decimation": Key("int", 10, "log every k-th step"),
        "band": Key("number", 0.05, "settling band on |zeta1| [rad]"),
        "window": Key("pair", (5.0, 20.0), "metrics window t0, t1 [s]; defaults to the last 3/4 of the horizon"),
        "composite": Key("bool", True, "prediction errors feed the neural laws"),
        "switching": Key("bool", True, "false freezes every switch indicator at 1"),
    },
    "plant": {
        "order": Key("int", 2, "chain plant order (pendulum and oracle are 2nd order)"),
        "g_e": Key("number", 9.81),
        "m_c": Key("number", 1.0),
        "m_a": Key("number", 0.1),
        "l_a": Key("number", 0.5),
        "rho0": Key("numbers", (-0.1, 0.0), "initial state"),
        "disturbance": Key("time_expr", "0.1*sin(2*t)", "d_n(t), acting on the last state"),
    },
    "reference": {
        "amplitude": Key("number", 0.2),
        "frequency": Key("number", 1.0),
    },
    "gains": {
        **{name: Key("numbers", DEFAULT_VECTOR_GAINS[name]) for name in VECTOR_GAINS},
        "m": Key("number", 0.6),
        "r": Key("number", 5.0 / 3.0),
        "g_floor": Key("number", 0.05),
        "H": Key("state_exprs", ("1",), "known bound shapes H_i(rho1..rhoi)"),
    },
    "filter": {
        "omega": Key("number", 50.0),
        "l1": Key("number", 1.0),
        "l2": Key("number", 1.0),
        "m_f": Key("number", 0.6),
        "r_f": Key("number", None, "defaults to 1 (fnt) or 5/3 (fxt)"),
    },
    "rbf": {
        "lower": Key("number", -0.25),
        "upper": Key("number", 0.25),
        "nodes": Key("int", 11, "centers per dimension"),
        "width": Key("number", 2.0),
    },
    "switch": {
        "c1": Key("numbers", (0.25,)),
        "c2": Key("numbers", (0.35,)),
        "order": Key("int", None, "smoothness order; defaults to the plant order"),
        "form": Key("choice", "squared", "squared | absolute"),
    },
}

CHOICES = {("experiment", "plant"): PLANTS, ("switch", "form"): ("squared", "absolute")}


def _convert(section: str, key: str, kind: str, raw: str):
    """Text -> value for one key; raises ValueError with a readable message."""
    if kind == "number":
        return _parse_number(raw)
    if kind == "numbers":
        parts = _split(raw)
        if not parts:
            raise ValueError("expected one or more numbers")
        return tuple(_parse_number(p) for p in parts)
    if kind == "pair":
        parts = _split(raw)
        if len(parts) != 2:
            raise ValueError("expected two numbers 't0, t1'")
        return tuple(_parse_number(p) for p in parts)
    if kind == "int":
        value = _parse_number(raw)
        if value != int(value):
            raise ValueError("expected an integer")
        return int(value)
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError("expected true or false")
    if kind == "text":
        return raw.strip()
    if kind == "choice":
        value = raw.strip().lower()
        allowed = CHOICES[(section, key)]
        if value not in allowed:
            raise ValueError(f"expected one of {', '.join(allowed)}")
        return value
    if kind == "variant":
        return ControllerVariant.from_label(raw).label
    if kind == "time_expr":
        TimeFunction(raw)
        return raw.strip()
    if kind == "state_exprs":
        parts = _split(raw)
        if not parts:
            raise ValueError("expected one or more expressions")
        return tuple(parts)
    raise AssertionError(kind)


def _format(kind: str, value) -> str:
    if value is None:
        return ""
    if kind in ("number",):
        return _fmt_number(value)
    if kind in ("numbers", "pair"):
        return ", ".join(_fmt_number(v) for v in value)
    if kind == "bool":
        return "true" if value else "false"
    if kind == "state_exprs":
        return ", ".join(value)
    return str(value)


@dataclass
class ExperimentConfig:
    """Resolved configuration: ``values[section][key]``.

    ``defaulted`` names the ``section.key`` entries that were not in the file.
    """

    values: dict[str, dict[str, Any]]
    defaulted: frozenset[str] = field(default=frozenset(), compare=False)

    def __getitem__(self, dotted: str):
        section, key = dotted.split(".", 1)
        return self.values[section][key]

    # convenience views -------------------------------------------------
    @property
    def name(self) -> str:
        return self["experiment.name"]

    @property
    def variant(self) -> ControllerVariant:
        return ControllerVariant.from_label(self["experiment.variant"])

    @property
    def dt(self) -> float:
        return self["experiment.dt"]

    @property
    def horizon(self) -> float:
        return self["experiment.horizon"]

    @property
    def n(self) -> int:
        return plant_order(self.values)

    def with_value(self, dotted: str, raw: str) -> "ExperimentConfig":
        """A copy with one key replaced by the parsed ``raw`` text; revalidated."""
        try:
            section, key = dotted.split(".", 1)
            entry = SCHEMA[section][key]
        except (ValueError, KeyError):
            raise ConfigError(f"unknown parameter {dotted!r}; use section.key, e.g. gains.beta_z") from None
        try:
            value = _convert(section, key, entry.kind, raw)
        except (ValueError, ExpressionError) as exc:
            raise ConfigError(f"{dotted}: {exc}") from None
        values = copy.deepcopy(self.values)
        values[section][key] = value
        return _finish(values, self.defaulted - {dotted})

    # builders -----------------------------------------------------------
    def reference(self) -> ReferenceSignal:
        return ReferenceSignal(self["reference.amplitude"], self["reference.frequency"])

    def plant(self) -> PlantModel:
        kind = self["experiment.plant"]
        dist = TimeFunction(self["plant.disturbance"])
        if kind == "pendulum":
            p = PendulumParams(self["plant.g_e"], self["plant.m_c"], self["plant.m_a"], self["plant.l_a"])
            return pendulum_model(p, dist)
        if kind == "oracle":
            return oracle_model(dist)
        base = chain_model(self.n)
        return PlantModel(base.n, base.h, base.g, base.d[:-1] + (dist,), name="chain")

    def gains(self) -> GainSet:
        n = self.n
        g = self.values["gains"]
        vec = {name: broadcast(g[name], n, name) for name in VECTOR_GAINS}
        sw = self.values["switch"]
        order = sw["order"] if sw["order"] is not None else n
        form = SwitchForm(sw["form"])
        c1 = broadcast(sw["c1"], n, "c1")
        c2 = broadcast(sw["c2"], n, "c2")
        switch = tuple(SwitchBoundaries(c1[i], c2[i], order, form) for i in range(n))
        H = tuple(None if expr == "1" else StateFunction(expr, n) for expr in _state_exprs(g["H"], n))
        f = self.values["filter"]
        return GainSet(
            n=n,
            **vec,
            m=g["m"],
            r=g["r"],
            g_floor=g["g_floor"],
            filter=FilterGains(f["omega"], f["l1"], f["l2"], f["m_f"], f["r_f"]),
            switch=switch,
            H=H,
        )

    def networks(self) -> list[RbfNetwork]:
        """Subsystem i uses the grid restricted to its first i states."""
        rb = self.values["rbf"]
        return [
            RbfNetwork.grid([rb["lower"]] * (i + 1), [rb["upper"]] * (i + 1), rb["nodes"], rb["width"])
            for i in range(self.n)
        ]

    def rho0(self) -> tuple[float, ...]:
        return tuple(self["plant.rho0"])


def plant_order(values) -> int:
    if values["experiment"]["plant"] == "chain":
        return values["plant"]["order"]
    return 2


def _state_exprs(exprs, n: int) -> tuple[str, ...]:
    if len(exprs) == 1:
        return tuple(exprs) * n
    return tuple(exprs)


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.match(r"\[(.+)\]", stripped)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return no
            continue
        if key is not None and current == section and re.match(rf"{re.escape(key)}\s*[=:]", stripped):
            return no
    return None


def _where(text: str, section: str, key: str | None = None) -> str:
    line = _line_of(text, section, key)
    return f"line {line}: " if line else ""


def parse_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(
        interpolation=None,
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
        delimiters=("=",),
        empty_lines_in_values=False,
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"line {exc.lineno}: key outside any [section]") from None
    except configparser.ParsingError as exc:
        lines = ", ".join(str(no) for no, _ in exc.errors)
        raise ConfigError(f"line {lines}: cannot parse, expected 'key = value'") from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(f"line {exc.lineno}: {exc.message if hasattr(exc, 'message') else exc}") from None
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    values: dict[str, dict[str, Any]] = {}
    defaulted = set()
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{_where(text, section)}unknown section [{section}]")
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"{_where(text, section, key)}unknown key {key!r} in section [{section}]")
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, entry in keys.items():
            if parser.has_option(section, key) and parser.get(section, key).strip() != "":
                raw = parser.get(section, key)
                try:
                    values[section][key] = _convert(section, key, entry.kind, raw)
                except (ValueError, ExpressionError) as exc:
                    raise ConfigError(f"{_where(text, section, key)}{section}.{key}: {exc}") from None
            else:
                values[section][key] = entry.default
                defaulted.add(f"{section}.{key}")
    return _finish(values, frozenset(defaulted))


def _finish(values, defaulted: frozenset) -> ExperimentConfig:
    """Resolve order-dependent defaults, then validate."""
    n = plant_order(values)
    if n < 1:
        raise ConfigError("plant.order must be >= 1")
    g = values["gains"]
    for name in VECTOR_GAINS:
        if f"gains.{name}" in defaulted:
            default = DEFAULT_VECTOR_GAINS[name]
            g[name] = _stretch(default, n) if isinstance(default, tuple) else (float(default),) * n
    if "experiment.window" in defaulted:
        # last three quarters of the run; (5, 20) for the default horizon
        h = values["experiment"]["horizon"]
        values["experiment"]["window"] = (0.25 * h, h)
    if "plant.rho0" in defaulted:
        values["plant"]["rho0"] = _stretch((-0.1, 0.0), n)
    cfg = ExperimentConfig(values, defaulted)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    v = cfg.values
    n = cfg.n
    ex = v["experiment"]

    def positive(dotted, value):
        if not value > 0:
            raise ConfigError(f"{dotted} must be positive")

    positive("experiment.dt", ex["dt"])
    positive("experiment.horizon", ex["horizon"])
    positive("experiment.band", ex["band"])
    if ex["decimation"] < 1:
        raise ConfigError("experiment.decimation must be >= 1")
    t0, t1 = ex["window"]
    if not 0 <= t0 < t1 <= ex["horizon"]:
        raise ConfigError("experiment.window must satisfy 0 <= t0 < t1 <= horizon")
    g = v["gains"]
    if not 0.5 < g["m"] < 1.0:
        raise ConfigError("m must lie in (1/2, 1)")
    if not g["r"] > 1.0:
        raise ConfigError("r must be greater than 1")
    positive("gains.g_floor", g["g_floor"])
    for name in VECTOR_GAINS:
        vals = g[name]
        if len(vals) not in (1, n):
            raise ConfigError(f"gains.{name} needs 1 or {n} values, got {len(vals)}")
        for x in vals:
            if name == "beta_z" and x == 0:
                continue
            if not x > 0:
                raise ConfigError(f"gains.{name} must be positive")
    exprs = g["H"]
    if len(exprs) not in (1, n):
        raise ConfigError(f"gains.H needs 1 or {n} expressions")
    for i, text in enumerate(_state_exprs(exprs, n)):
        try:
            fn = StateFunction(text, n)
        except ExpressionError as exc:
            raise ConfigError(f"gains.H: {exc}") from None
        if fn.max_index() > i + 1:
            raise ConfigError(f"gains.H: H{i + 1} may only use rho1..rho{i + 1}")
        if fn.constant is not None and not fn.constant > 0:
            raise ConfigError("gains.H must be positive")
    f = v["filter"]
    for key in ("omega", "l1", "l2"):
        positive(f"filter.{key}", f[key])
    if not 0 < f["m_f"] < 1:
        raise ConfigError("filter.m_f must lie in (0, 1)")
    if f["r_f"] is not None and not f["r_f"] >= 1:
        raise ConfigError("filter.r_f must be >= 1")
    rb = v["rbf"]
    if not rb["lower"] < rb["upper"]:
        raise ConfigError("rbf.lower must be below rbf.upper")
    if rb["nodes"] < 1:
        raise ConfigError("rbf.nodes must be >= 1")
    positive("rbf.width", rb["width"])
    sw = v["switch"]
    for key in ("c1", "c2"):
        if len(sw[key]) not in (1, n):
            raise ConfigError(f"switch.{key} needs 1 or {n} values")
    c1 = broadcast(sw["c1"], n)
    c2 = broadcast(sw["c2"], n)
    for a, b in zip(c1, c2):
        if not 0 < a < b:
            raise ConfigError("switch boundaries need 0 < c1 < c2")
    if sw["order"] is not None and sw["order"] < 1:
        raise ConfigError("switch.order must be >= 1")
    if len(v["plant"]["rho0"]) != n:
        raise ConfigError(f"plant.rho0 needs {n} values")
    if ex["plant"] == "pendulum":
        for key in ("g_e", "m_c", "m_a", "l_a"):
            positive(f"plant.{key}", v["plant"][key])


def parse_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def format_config(cfg: ExperimentConfig, prefix: str = "", mark_defaults: bool = True) -> str:
    """Fully resolved config text; each line starts with ``prefix``."""
    out = []
    for section, keys in SCHEMA.items():
        out.append(f"{prefix}[{section}]")
        for key, entry in keys.items():
            value = cfg.values[section][key]
            if value is None:
                continue
            line = f"{prefix}{key} = {_format(entry.kind, value)}"
            if mark_defaults and f"{section}.{key}" in cfg.defaulted:
                line += "  # default"
            out.append(line)
    return "\n".join(out) + "\n"


def strip_prefix(text: str, prefix: str = "# ") -> str:
    """Recover config text from prefixed header lines."""
    lines = []
    for line in text.splitlines():
        if line.startswith(prefix):
            lines.append(line[len(prefix):])
    return "\n".join(lines) + "\n"
