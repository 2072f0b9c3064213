"""Strict-feedback plants and reference signals.

A plant of order n evolves as

    rho_i' = h_i(rho_1..rho_i) + g_i(rho_1..rho_i) * rho_{i+1} + d_i(t),   rho_{n+1} = u

The controller may only see ``g`` (known gains) and ``H`` (known bound
shapes); ``h`` and ``d`` stay private to the plant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

StateFn = Callable[[Sequence[float]], float]
TimeFn = Callable[[float], float]


def _zero_state(_rho) -> float:
    return 0.0


def _one_state(_rho) -> float:
    return 1.0


def _zero_time(_t) -> float:
    return 0.0


@dataclass(frozen=True)
class PlantModel:
    """``h``, ``g`` and ``H`` take the full state vector; entry i may only read rho[:i+1]."""

    n: int
    h: tuple[StateFn, ...]
    g: tuple[StateFn, ...]
    d: tuple[TimeFn, ...]
    H: tuple[StateFn, ...] = ()
    name: str = "plant"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("plant order must be >= 1")
        for label in ("h", "g", "d"):
            if len(getattr(self, label)) != self.n:
                raise ValueError(f"plant needs {self.n} {label} functions")
        if not self.H:
            object.__setattr__(self, "H", (_one_state,) * self.n)


def plant_rhs(model: PlantModel, rho: Sequence[float], u: float, t: float) -> list[float]:
    n = model.n
    if len(rho) != n:
        raise ValueError(f"state has {len(rho)} entries, plant order is {n}")
    out = []
    for i in range(n):
        nxt = rho[i + 1] if i + 1 < n else u
        out.append(model.h[i](rho) + model.g[i](rho) * nxt + model.d[i](t))
    return out


@dataclass(frozen=True)
class PendulumParams:
    g_e: float = 9.81
    m_c: float = 1.0
    m_a: float = 0.1
    l_a: float = 0.5

    def __post_init__(self):
        for k in ("g_e", "m_c", "m_a", "l_a"):
            if not getattr(self, k) > 0:
                raise ValueError(f"pendulum parameter {k} must be positive")


def pendulum_model(params: PendulumParams = PendulumParams(), disturbance: TimeFn = _zero_time) -> PlantModel:
    """Cart-pole inverted pendulum, state (angle, angular rate)."""
    g_e, m_c, m_a, l_a = params.g_e, params.m_c, params.m_a, params.l_a
    mt = m_c + m_a

    def denom(c: float) -> float:
        return l_a * (4.0 / 3.0 - m_a * c * c / mt)

    def h2(rho) -> float:
        s, c = math.sin(rho[0]), math.cos(rho[0])
        return (g_e * s - m_a * l_a * rho[1] ** 2 * c * s / mt) / denom(c)

    def g2(rho) -> float:
        c = math.cos(rho[0])
        return (c / mt) / denom(c)

    return PlantModel(
        n=2,
        h=(_zero_state, h2),
        g=(_one_state, g2),
        d=(_zero_time, disturbance),
        name="pendulum",
    )


def chain_model(n: int = 2) -> PlantModel:
    """Pure integrator chain; useful as a certain-dynamics reference."""
    return PlantModel(n=n, h=(_zero_state,) * n, g=(_one_state,) * n, d=(_zero_time,) * n, name="chain")


def oracle_model(disturbance: TimeFn = _zero_time) -> PlantModel:
    """Second-order chain with known mild nonlinearities."""
    return PlantModel(
        n=2,
        h=(lambda r: 0.1 * r[0] ** 2, lambda r: 0.1 * r[0] * r[1]),
        g=(_one_state, _one_state),
        d=(_zero_time, disturbance),
        name="oracle",
    )


@dataclass(frozen=True)
class ReferenceSignal:
    """``y_r = amplitude * sin(frequency * t)`` with its analytic derivative."""

    amplitude: float = 0.2
    frequency: float = 1.0

    def y(self, t: float) -> float:
        return self.amplitude * math.sin(self.frequency * t)

    def ydot(self, t: float) -> float:
        return self.amplitude * self.frequency * math.cos(self.frequency * t)


def empirical_bound(fn: StateFn, box: Sequence[tuple[float, float]], points: int = 101) -> float:
    """Sampled max of |fn| over a box; used to read off the bound constant tau_i."""
    axes = [np.linspace(lo, hi, points) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.column_stack([m.ravel() for m in mesh])
    return max(abs(fn(row)) for row in flat)
