"""Controller variants and the full set of design constants."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

from .core_math import SwitchBoundaries, SwitchForm
from .learning import Timing


class NeuralForm(enum.Enum):
    SQUARED_NORM = "squared"
    NORM_PLUS_EPS = "norm+1"
    NORM = "norm"


_METHOD_NUMBER = {
    (Timing.FNT, NeuralForm.SQUARED_NORM): 1,
    (Timing.FNT, NeuralForm.NORM_PLUS_EPS): 2,
    (Timing.FNT, NeuralForm.NORM): 3,
    (Timing.FXT, NeuralForm.SQUARED_NORM): 4,
    (Timing.FXT, NeuralForm.NORM_PLUS_EPS): 5,
    (Timing.FXT, NeuralForm.NORM): 6,
}
_BY_NUMBER = {v: k for k, v in _METHOD_NUMBER.items()}


@dataclass(frozen=True)
class ControllerVariant:
    """One of the twelve control laws: timing x neural form x sharing.

    Labels are ``fnt-m1`` .. ``fnt-m3``, ``fxt-m4`` .. ``fxt-m6`` with an
    ``s`` suffix for the single-learning-parameter versions (``fxt-m5s``).
    """

    timing: Timing
    neural_form: NeuralForm
    shared: bool = False

    @property
    def method(self) -> int:
        return _METHOD_NUMBER[(self.timing, self.neural_form)]

    @property
    def label(self) -> str:
        return f"{self.timing.value}-m{self.method}{'s' if self.shared else ''}"

    @property
    def title(self) -> str:
        return f"Method {self.method}{'-single' if self.shared else ''}"

    @classmethod
    def from_label(cls, label: str) -> "ControllerVariant":
        text = label.strip().lower()
        try:
            timing_txt, rest = text.split("-")
            timing = Timing(timing_txt)
            shared = rest.endswith("s")
            number = int(rest[1:-1] if shared else rest[1:])
            if not rest.startswith("m"):
                raise ValueError
            t, form = _BY_NUMBER[number]
        except (ValueError, KeyError):
            raise ValueError(f"unknown variant {label!r}; expected e.g. fnt-m1, fnt-m2s, fxt-m6") from None
        if t is not timing:
            raise ValueError(f"variant {label!r}: methods 1-3 are fnt, methods 4-6 are fxt")
        return cls(timing, form, shared)

    @classmethod
    def all(cls) -> list["ControllerVariant"]:
        return [
            cls(_BY_NUMBER[k][0], _BY_NUMBER[k][1], shared)
            for k in range(1, 7)
            for shared in (False, True)
        ]


@dataclass(frozen=True)
class FilterGains:
    """Second-order command filter ``x'' = -2w sp(x') - w^2 sp(x - input)``.

    ``sp(v) = l1 |v|^m_f sign(v) + l2 |v|^r_f sign(v)``; ``r_f`` defaults to 1
    for finite-time timing and 5/3 for fixed-time timing.
    """

    omega: float = 50.0
    l1: float = 1.0
    l2: float = 1.0
    m_f: float = 0.6
    r_f: Optional[float] = None

    def resolved_r(self, timing: Timing) -> float:
        if self.r_f is not None:
            return self.r_f
        return 1.0 if timing is Timing.FNT else 5.0 / 3.0


# per-subsystem gain names (tuples of length n)
VECTOR_GAINS = (
    "k", "p", "gamma", "k1", "k2",
    "a", "mu", "kappa",
    "eta", "eta_d", "eta_N", "eta_dN", "eta_theta", "eta_thetaN",
    "beta_h", "beta_z", "beta_1", "beta_2",
    "delta_1", "delta_2", "delta_3", "delta_1N", "delta_2N", "delta_3N",
    "q_1", "q_2", "q_3", "q_1N", "q_2N", "q_3N",
    "r_1", "r_2",
)  # fmt: skip

DEFAULT_VECTOR_GAINS = {
    "k": (2.0, 4.0),
    "p": 0.5,
    "gamma": 1.0,
    "k1": 2.0,
    "k2": 4.0,
    "a": 1.0,
    "mu": 0.1,
    "kappa": 0.1,
    "eta": 0.1,
    "eta_d": 0.1,
    "eta_N": 0.1,
    "eta_dN": 0.1,
    "eta_theta": 0.1,
    "eta_thetaN": 0.1,
    "beta_h": 10.0,
    "beta_z": 1.0,
    "beta_1": 0.1,
    "beta_2": 0.1,
    "delta_1": 10.0,
    "delta_2": 0.1,
    "delta_3": 0.1,
    "delta_1N": 10.0,
    "delta_2N": 0.1,
    "delta_3N": 0.1,
    "q_1": 5.0,
    "q_2": 0.1,
    "q_3": 0.1,
    "q_1N": 5.0,
    "q_2N": 0.1,
    "q_3N": 0.1,
    "r_1": 5.0,
    "r_2": 1.0,
}


def broadcast(value, n: int, name: str = "value") -> tuple[float, ...]:
    """Scalar or 1-sequence -> n copies; longer sequences must have exactly n entries."""
    if isinstance(value, (int, float)):
        return (float(value),) * n
    vals = tuple(float(v) for v in value)
    if len(vals) == 1:
        return vals * n
    if len(vals) != n:
        raise ValueError(f"{name} needs 1 or {n} entries, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class GainSet:
    """All design constants for an order-n loop; per-subsystem entries are n-tuples."""

    n: int
    k: tuple[float, ...]
    p: tuple[float, ...]
    gamma: tuple[float, ...]
    k1: tuple[float, ...]
    k2: tuple[float, ...]
    a: tuple[float, ...]
    mu: tuple[float, ...]
    kappa: tuple[float, ...]
    eta: tuple[float, ...]
    eta_d: tuple[float, ...]
    eta_N: tuple[float, ...]
    eta_dN: tuple[float, ...]
    eta_theta: tuple[float, ...]
    eta_thetaN: tuple[float, ...]
    beta_h: tuple[float, ...]
    beta_z: tuple[float, ...]
    beta_1: tuple[float, ...]
    beta_2: tuple[float, ...]
    delta_1: tuple[float, ...]
    delta_2: tuple[float, ...]
    delta_3: tuple[float, ...]
    delta_1N: tuple[float, ...]
    delta_2N: tuple[float, ...]
    delta_3N: tuple[float, ...]
    q_1: tuple[float, ...]
    q_2: tuple[float, ...]
    q_3: tuple[float, ...]
    q_1N: tuple[float, ...]
    q_2N: tuple[float, ...]
    q_3N: tuple[float, ...]
    r_1: tuple[float, ...]
    r_2: tuple[float, ...]
    m: float = 0.6
    r: float = 5.0 / 3.0
    g_floor: float = 0.05
    filter: FilterGains = field(default_factory=FilterGains)
    switch: tuple[SwitchBoundaries, ...] = ()
    # known bound shapes H_i(rho); None means H_i = 1
    H: tuple[Optional[Callable[[Sequence[float]], float]], ...] = ()

    def __post_init__(self):
        for name in VECTOR_GAINS:
            vals = getattr(self, name)
            if len(vals) != self.n:
                raise ValueError(f"gain {name} needs {self.n} entries, got {len(vals)}")
            for v in vals:
                # beta_z = 0 is the composite-learning ablation
                if not (v > 0 or (name == "beta_z" and v == 0)):
                    raise ValueError(f"gain {name} must be positive, got {v}")
        if not 0.5 < self.m < 1.0:
            raise ValueError("m must lie in (1/2, 1)")
        if not self.r > 1.0:
            raise ValueError("r must be greater than 1")
        if not self.g_floor > 0:
            raise ValueError("g_floor must be positive")
        if not self.switch:
            object.__setattr__(self, "switch", tuple(SwitchBoundaries(0.25, 0.35, self.n) for _ in range(self.n)))
        if len(self.switch) != self.n:
            raise ValueError(f"need {self.n} switch boundaries, got {len(self.switch)}")
        if not self.H:
            object.__setattr__(self, "H", (None,) * self.n)
        if len(self.H) != self.n:
            raise ValueError(f"need {self.n} H functions, got {len(self.H)}")
        fg = self.filter
        if not (fg.omega > 0 and fg.l1 > 0 and fg.l2 > 0 and 0 < fg.m_f < 1):
            raise ValueError("filter needs omega, l1, l2 > 0 and 0 < m_f < 1")
        if fg.r_f is not None and not fg.r_f >= 1:
            raise ValueError("filter r_f must be >= 1")

    @classmethod
    def defaults(cls, n: int = 2, **overrides) -> "GainSet":
        values = {}
        for name in VECTOR_GAINS:
            if name in overrides:
                values[name] = broadcast(overrides.pop(name), n, name)
            else:
                default = DEFAULT_VECTOR_GAINS[name]
                values[name] = _stretch(default, n) if isinstance(default, tuple) else broadcast(default, n, name)
        return cls(n=n, **values, **overrides)

    def with_(self, **changes) -> "GainSet":
        for name in VECTOR_GAINS:
            if name in changes:
                changes[name] = broadcast(changes[name], self.n, name)
        return replace(self, **changes)


def _stretch(vals: tuple[float, ...], n: int) -> tuple[float, ...]:
    """Repeat the last entry (or truncate) to length n."""
    vals = tuple(float(v) for v in vals)
    return vals[:n] + (vals[-1],) * max(0, n - len(vals))


def switch_defaults(n: int, c1: float = 0.25, c2: float = 0.35, form: SwitchForm = SwitchForm.SQUARED):
    return tuple(SwitchBoundaries(c1, c2, n, form) for _ in range(n))
