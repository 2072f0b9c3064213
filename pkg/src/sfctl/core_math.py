"""Scalar building blocks shared by the controllers and the estimation models.

Fractional powers of negative numbers follow the odd-root convention, so
``signed_pow(-8, 0.6) == -(8 ** 0.6)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TANH_GAP_CONST = 0.2785

# absolute + relative slack used by the inequality checks
ABS_TOL = 1e-12
REL_TOL = 1e-9


def signed_pow(x: float, p: float) -> float:
    """Return ``sign(x) * |x|**p``."""
    if x > 0.0:
        return x**p
    if x < 0.0:
        return -((-x) ** p)
    return 0.0


def signed_pow_array(x: np.ndarray, p: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** p


def tanh_gap(W: float, eta: float) -> float:
    """|W| - W tanh(W/eta), which lies in [0, 0.2785 eta]."""
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta!r}")
    return abs(W) - W * math.tanh(W / eta)


def phi(lam: float, mu: float, kappa: float, m: float) -> float:
    """Smoothed finite-time feedback term.

    Behaves like ``|lam|**m * sign(lam)`` for large errors and like a
    ``lam**(1 + 2m)`` power near zero, so the term has no infinite gain at
    the origin.
    """
    if not (mu > 0.0 and kappa > 0.0):
        raise ValueError("mu and kappa must be positive")
    if lam == 0.0:
        return 0.0
    a = abs(lam)
    x = a ** (2.0 + 2.0 * m)
    mu2 = mu * mu
    ka2 = kappa * kappa
    core = math.sqrt((x + mu2 + ka2) / ((x + mu2) * (x + ka2)))
    return signed_pow(lam, 1.0 + 2.0 * m) * core


class SwitchForm(enum.Enum):
    SQUARED = "squared"
    ABSOLUTE = "absolute"


@dataclass(frozen=True)
class SwitchBoundaries:
    """Inner/outer radius of one state's neural working window."""

    c1: float
    c2: float
    n: int = 2
    form: SwitchForm = SwitchForm.SQUARED

    def __post_init__(self):
        if not 0.0 < self.c1 < self.c2:
            raise ValueError(f"switch boundaries need 0 < c1 < c2, got c1={self.c1}, c2={self.c2}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"switch order n must be a positive integer, got {self.n!r}")


def smooth_switch(rho: float, b: SwitchBoundaries) -> float:
    a = abs(rho)
    if a <= b.c1:
        return 1.0
    if a >= b.c2:
        return 0.0
    if b.form is SwitchForm.SQUARED:
        s = (rho * rho - b.c1 * b.c1) / (b.c2 * b.c2 - b.c1 * b.c1)
    else:
        s = (a - b.c1) / (b.c2 - b.c1)
    return math.cos(0.5 * math.pi * s**b.n) ** (b.n + 1)


def switch_indicator(rho_bar: Sequence[float], bounds: Sequence[SwitchBoundaries]) -> float:
    """Product of the per-state windows over the leading states ``rho_bar``."""
    if len(rho_bar) != len(bounds):
        raise ValueError(
            f"dimension mismatch: {len(rho_bar)} states but {len(bounds)} switch boundaries"
        )
    w = 1.0
    for rho, b in zip(rho_bar, bounds):
        w *= smooth_switch(rho, b)
        if w == 0.0:
            return 0.0
    return w


def _leq(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + ABS_TOL + REL_TOL * abs(rhs)


def lemma_bounds_check(values: Sequence[float], q: float) -> bool:
    """Check the sum-of-powers inequality for ``values`` at exponent ``q``.

    For ``0 < q <= 1``: ``(sum |x|)**q <= sum |x|**q``.
    For ``q > 1``:      ``p**(1-q) (sum |x|)**q <= sum |x|**q`` with ``p = len(values)``.
    """
    if not q > 0.0:
        raise ValueError("q must be positive")
    xs = np.abs(np.asarray(values, dtype=float))
    p = xs.size
    lhs = float(np.sum(xs)) ** q
    if q > 1.0:
        lhs *= p ** (1.0 - q)
    rhs = float(np.sum(xs**q))
    return _leq(lhs, rhs)


def tanh_gap_check(W: float, eta: float) -> bool:
    g = tanh_gap(W, eta)
    return _leq(0.0, g) and _leq(g, TANH_GAP_CONST * eta)


def young_check(u1: float, u2: float, s1: float, s2: float) -> bool:
    """Weighted Young inequality for two magnitudes."""
    a, b = abs(u1), abs(u2)
    s = s1 + s2
    lhs = a**s1 * b**s2
    rhs = s1 / s * a**s + s2 / s * b**s
    return _leq(lhs, rhs)


def phi_gap_check(lam: float, mu: float, kappa: float, m: float) -> bool:
    """``0 <= |lam|**(1+m) - lam*phi(lam) <= mu kappa / sqrt(mu^2 + kappa^2)``."""
    gap = abs(lam) ** (1.0 + m) - lam * phi(lam, mu, kappa, m)
    bound = mu * kappa / math.sqrt(mu * mu + kappa * kappa)
    return _leq(0.0, gap) and _leq(gap, bound)
