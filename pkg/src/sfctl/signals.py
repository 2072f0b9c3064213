"""Per-instant measured quantities shared by the control, learning and estimation laws."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .approximator import RbfNetwork, basis, psi_norm_sq
from .core_math import smooth_switch
from .gains import GainSet, NeuralForm


class ModelViolation(ArithmeticError):
    """A known control gain fell below the configured floor."""


@dataclass
class LoopSignals:
    """Everything the laws need at one instant, with 0-based subsystem index.

    ``psi_sq[i]`` is psi_i^T psi_i and ``psi_h[i]`` the norm variant in use;
    ``z`` are prediction errors rho - rho_hat.
    """

    rho: list[float]
    w: list[float]
    psi_sq: list[float]
    psi_h: list[float]
    zeta: list[float]
    lam: list[float]
    z: list[float]
    g: list[float]
    H: list[float]


def tracking_errors(rho: Sequence[float], y_r: float, rho_c: Sequence[Optional[float]]) -> list[float]:
    """zeta_1 = rho_1 - y_r, zeta_i = rho_i - rho_{i,c}; ``rho_c[0]`` is ignored."""
    if len(rho_c) != len(rho):
        raise ValueError("rho and rho_c must have the same length")
    return [rho[0] - y_r] + [rho[i] - rho_c[i] for i in range(1, len(rho))]


def lambda_errors(zeta: Sequence[float], sigma: Sequence[float]) -> list[float]:
    return [a - b for a, b in zip(zeta, sigma)]


def indicators(rho: Sequence[float], gains: GainSet) -> list[float]:
    """w_i for i = 1..n: running product of the per-state windows."""
    out = []
    w = 1.0
    for rho_j, b in zip(rho, gains.switch):
        if w != 0.0:
            w *= smooth_switch(rho_j, b)
        out.append(w)
    return out


def measure(
    rho: Sequence[float],
    rho_hat: Sequence[float],
    sigma: Sequence[float],
    rho_c: Sequence[Optional[float]],
    y_r: float,
    networks: Sequence[RbfNetwork],
    g_fns: Sequence[Callable[[Sequence[float]], float]],
    gains: GainSet,
    neural_form: NeuralForm,
    switching: bool = True,
) -> LoopSignals:
    n = gains.n
    w = indicators(rho, gains) if switching else [1.0] * n
    psi_sq, psi_h = [], []
    for i in range(n):
        sq = psi_norm_sq(basis(networks[i], rho[: i + 1]))
        psi_sq.append(sq)
        norm = sq**0.5
        psi_h.append(norm + 1.0 if neural_form is NeuralForm.NORM_PLUS_EPS else norm)
    zeta = tracking_errors(rho, y_r, rho_c)
    lam = lambda_errors(zeta, sigma)
    z = [a - b for a, b in zip(rho, rho_hat)]
    g = []
    for i, fn in enumerate(g_fns):
        gi = fn(rho)
        if not gi >= gains.g_floor:
            raise ModelViolation(f"control gain g{i + 1} = {gi:.6g} below floor {gains.g_floor} at rho = {list(rho)}")
        g.append(gi)
    H = [1.0 if fn is None else float(fn(rho)) for fn in gains.H]
    return LoopSignals(list(rho), w, psi_sq, psi_h, zeta, lam, z, g, H)
