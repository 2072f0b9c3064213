"""Adaptive update laws.

Every law has the shape ``rate = gain * drive - leakage(value)``. The drive
pieces below are non-negative whenever the switch indicator lies in [0, 1];
the leakage is odd in the estimate so zero is an equilibrium of the
unforced law.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .core_math import signed_pow


class Timing(enum.Enum):
    FNT = "fnt"
    FXT = "fxt"


@dataclass(frozen=True)
class Leakage:
    decay1: float
    decay2: float
    m: float
    r: float = 1.0


def leakage_rate(value: float, drive: float, g: Leakage, mode: Timing) -> float:
    """``drive - decay1*value - decay2*value^m`` (FnT) or with ``value^r`` (FxT)."""
    if mode is Timing.FNT:
        linear = g.decay1 * value
    else:
        linear = g.decay1 * signed_pow(value, g.r)
    return drive - linear - g.decay2 * signed_pow(value, g.m)


def drive_L(w: float, lam: float, z: float, beta_z: float, psi_sq: float, a: float = 1.0, shared: bool = False) -> float:
    """Neural drive for the squared-norm laws.

    Per-subsystem: ``w (lam^2 + beta_z z^2) psi^T psi`` (the caller applies beta_h).
    Shared: the i-th summand ``w/(2a^2) (lam^2 + beta_z z^2) psi^T psi``; the caller
    sums over subsystems, then applies beta_h.
    """
    base = w * (lam * lam + beta_z * z * z) * psi_sq
    if shared:
        if not a > 0:
            raise ValueError("a must be positive")
        return base / (2.0 * a * a)
    return base


def drive_N(w: float, lam: float, z: float, beta_z: float, psi_h: float, eta_theta: float, eta_thetaN: float) -> float:
    return w * (
        lam * psi_h * math.tanh(lam * psi_h / eta_theta)
        + beta_z * z * psi_h * math.tanh(z * psi_h / eta_thetaN)
    )


def drive_tau(w: float, H: float, s: float, eta: float) -> float:
    hs = H * s
    return (1.0 - w) * hs * math.tanh(hs / eta)


def drive_d(s: float, eta_d: float) -> float:
    return s * math.tanh(s / eta_d)


@dataclass
class AdaptiveEstimates:
    """Current values of every adapted parameter.

    ``neural`` holds L-hat (squared-norm laws) or N-hat (norm laws): one entry
    per subsystem, or a single entry for the shared-parameter variants.
    """

    neural: list[float]
    tau_hat: list[float]
    tau_hat_N: list[float]
    d_hat: list[float]
    d_hat_N: list[float]

    @classmethod
    def zeros(cls, n: int, shared: bool) -> "AdaptiveEstimates":
        return cls([0.0] * (1 if shared else n), [0.0] * n, [0.0] * n, [0.0] * n, [0.0] * n)
