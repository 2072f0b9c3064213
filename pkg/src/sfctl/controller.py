"""Backstepping control assembly: compensation signals, command filters,
virtual controls and the adaptive-parameter rates for all twelve variants.

Indices are 0-based in code: subsystem ``i`` here is subsystem ``i+1`` in
the usual 1-based notation. ``rho_c[i]`` is the filtered copy of
``alpha[i-1]`` (``rho_c[0]`` is unused).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .approximator import RbfNetwork
from .core_math import phi, signed_pow
from .gains import ControllerVariant, FilterGains, GainSet, NeuralForm
from .learning import AdaptiveEstimates, Leakage, Timing, drive_d, drive_L, drive_N, drive_tau, leakage_rate
from .observer import observer_adapt_rates, spem_rhs
from .signals import LoopSignals, ModelViolation, lambda_errors, measure, tracking_errors

__all__ = [
    "ControlOutput",
    "Controller",
    "FilterState",
    "ModelViolation",
    "command_filter_step",
    "compensation_rhs",
    "filter_rates",
    "lambda_errors",
    "tracking_errors",
    "virtual_control",
]


def compensation_rhs(
    sigma: Sequence[float],
    filter_gap: Sequence[float],
    g: Sequence[float],
    gains: GainSet,
    timing: Timing,
) -> list[float]:
    """Rates of the compensation signals.

    ``filter_gap[i]`` is ``rho_{i+1,c} - alpha_i`` (0-based); the last entry
    is ignored because the true input is not filtered.
    """
    n = len(sigma)
    m, r = gains.m, gains.r
    out = []
    for i in range(n):
        s = sigma[i]
        if timing is Timing.FNT:
            rate = -gains.k[i] * s - gains.gamma[i] * signed_pow(s, m)
        else:
            rate = -gains.k1[i] * signed_pow(s, m) - gains.k2[i] * signed_pow(s, r)
        if i + 1 < n:
            rate += g[i] * filter_gap[i] + g[i] * sigma[i + 1]
        if i > 0:
            rate -= g[i - 1] * sigma[i - 1]
        out.append(rate)
    return out


def virtual_control(
    i: int,
    sig: LoopSignals,
    est: AdaptiveEstimates,
    feedforward: float,
    variant: ControllerVariant,
    gains: GainSet,
) -> float:
    """alpha_i; ``feedforward`` is dy_r/dt for i = 0 and d(rho_{i,c})/dt otherwise."""
    n = gains.n
    if not 0 <= i < n:
        raise IndexError(f"subsystem index {i} out of range for order {n}")
    g_i = sig.g[i]
    if not g_i >= gains.g_floor:
        raise ModelViolation(f"control gain g{i + 1} = {g_i:.6g} below floor {gains.g_floor}")
    lam = sig.lam[i]
    w = sig.w[i]
    ph = phi(lam, gains.mu[i], gains.kappa[i], gains.m)
    if variant.timing is Timing.FNT:
        stab = -gains.k[i] * sig.zeta[i] - gains.p[i] * ph
    else:
        stab = -gains.k2[i] * signed_pow(lam, gains.r) - gains.k1[i] * ph
    coupling = -sig.g[i - 1] * sig.zeta[i - 1] if i > 0 else 0.0
    dist = est.d_hat[i] * math.tanh(lam / gains.eta_d[i])

    neural_est = est.neural[0 if variant.shared else i]
    if w == 0.0:
        neural = 0.0
    elif variant.neural_form is NeuralForm.SQUARED_NORM:
        a = gains.a[i]
        neural = w * lam / (2.0 * a * a) * neural_est * sig.psi_sq[i]
    else:
        psh = sig.psi_h[i]
        neural = w * neural_est * psh * math.tanh(psh * lam / gains.eta_theta[i])
    H = sig.H[i]
    robust = (1.0 - w) * est.tau_hat[i] * H * math.tanh(H * lam / gains.eta[i])
    return (stab + feedforward + coupling - dist - neural - robust) / g_i


def _satpow(x: float, fg: FilterGains, r_f: float) -> float:
    return fg.l1 * signed_pow(x, fg.m_f) + fg.l2 * signed_pow(x, r_f)


def filter_rates(rho_c: float, rho_c_dot: float, alpha_in: float, fg: FilterGains, r_f: float) -> tuple[float, float]:
    om = fg.omega
    acc = -2.0 * om * _satpow(rho_c_dot, fg, r_f) - om * om * _satpow(rho_c - alpha_in, fg, r_f)
    return rho_c_dot, acc


@dataclass(frozen=True)
class FilterState:
    rho_c: float = 0.0
    rho_c_dot: float = 0.0


def command_filter_step(fs: FilterState, alpha_in: float, fg: FilterGains, timing: Timing, dt: float) -> FilterState:
    """Advance one filter by ``dt`` with the input held constant (RK4)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    r_f = fg.resolved_r(timing)
    x, v = fs.rho_c, fs.rho_c_dot
    k1 = filter_rates(x, v, alpha_in, fg, r_f)
    k2 = filter_rates(x + 0.5 * dt * k1[0], v + 0.5 * dt * k1[1], alpha_in, fg, r_f)
    k3 = filter_rates(x + 0.5 * dt * k2[0], v + 0.5 * dt * k2[1], alpha_in, fg, r_f)
    k4 = filter_rates(x + dt * k3[0], v + dt * k3[1], alpha_in, fg, r_f)
    return FilterState(
        x + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        v + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
    )


@dataclass
class ControlOutput:
    """Control input plus every internal rate at one instant."""

    u: float
    alpha: list[float]
    signals: LoopSignals
    sigma_dot: list[float]
    # (d rho_c / dt, d^2 rho_c / dt^2) for levels 1..n-1
    filter_dot: list[tuple[float, float]]
    neural_dot: list[float]
    tau_dot: list[float]
    tau_N_dot: list[float]
    d_dot: list[float]
    d_N_dot: list[float]
    rho_hat_dot: list[float]


class Controller:
    """Evaluates one controller variant against measured plant states.

    ``g`` are the known control-gain functions of the plant. With
    ``composite=False`` the prediction errors are cut out of the neural
    learning laws (beta_z = 0); with ``switching=False`` the switch
    indicators are frozen at 1.
    """

    def __init__(
        self,
        variant: ControllerVariant,
        gains: GainSet,
        networks: Sequence[RbfNetwork],
        g: Sequence[Callable[[Sequence[float]], float]],
        composite: bool = True,
        switching: bool = True,
    ):
        if len(networks) != gains.n or len(g) != gains.n:
            raise ValueError(f"need {gains.n} networks and {gains.n} gain functions")
        for i, net in enumerate(networks):
            if net.dim != i + 1:
                raise ValueError(f"network for subsystem {i + 1} must take {i + 1} inputs, takes {net.dim}")
        self.variant = variant
        self.gains = gains if composite else gains.with_(beta_z=0.0)
        self.networks = tuple(networks)
        self.g = tuple(g)
        self.composite = composite
        self.switching = switching
        self.filter_r = gains.filter.resolved_r(variant.timing)
        g_ = self.gains
        n = g_.n
        j = n - 1  # shared law uses the last subsystem's learning gains
        self._leak_neural = [Leakage(g_.beta_1[i], g_.beta_2[i], g_.m, g_.r) for i in range(n)]
        self._leak_shared = Leakage(g_.beta_1[j], g_.beta_2[j], g_.m, g_.r)
        self._leak_tau = [Leakage(g_.delta_2[i], g_.delta_3[i], g_.m, g_.r) for i in range(n)]
        self._leak_d = [Leakage(g_.q_2[i], g_.q_3[i], g_.m, g_.r) for i in range(n)]

    @property
    def n(self) -> int:
        return self.gains.n

    def signals(self, state, y_r: float) -> LoopSignals:
        return measure(
            state.rho, state.rho_hat, state.sigma, state.rho_c, y_r,
            self.networks, self.g, self.gains, self.variant.neural_form, self.switching,
        )  # fmt: skip

    def alphas(self, state, y_r: float, yr_dot: float) -> tuple[list[float], LoopSignals]:
        sig = self.signals(state, y_r)
        alpha = []
        for i in range(self.n):
            ff = yr_dot if i == 0 else state.rho_c_dot[i]
            alpha.append(virtual_control(i, sig, state.estimates, ff, self.variant, self.gains))
        return alpha, sig

    def initial_filters(self, state, y_r: float, yr_dot: float) -> tuple[list[Optional[float]], list[Optional[float]]]:
        """Filter states matched to the virtual controls at the initial instant.

        alpha_i only depends on filters of level <= i, so they are filled in order.
        """
        rho_c = [None] + [0.0] * (self.n - 1)
        rho_c_dot = [None] + [0.0] * (self.n - 1)
        view = _FilterView(state, rho_c, rho_c_dot)
        for level in range(1, self.n):
            alpha, _ = self.alphas(view, y_r, yr_dot)
            rho_c[level] = alpha[level - 1]
        return rho_c, rho_c_dot

    def step(self, state, y_r: float, yr_dot: float) -> ControlOutput:
        n = self.n
        gains = self.gains
        variant = self.variant
        timing = variant.timing
        est = state.estimates
        alpha, sig = self.alphas(state, y_r, yr_dot)
        u = alpha[-1]

        gap = [state.rho_c[i + 1] - alpha[i] for i in range(n - 1)] + [0.0]
        sigma_dot = compensation_rhs(state.sigma, gap, sig.g, gains, timing)
        filter_dot = [
            filter_rates(state.rho_c[lv], state.rho_c_dot[lv], alpha[lv - 1], gains.filter, self.filter_r)
            for lv in range(1, n)
        ]

        squared = variant.neural_form is NeuralForm.SQUARED_NORM
        drives = []
        for i in range(n):
            if squared:
                drives.append(
                    drive_L(sig.w[i], sig.lam[i], sig.z[i], gains.beta_z[i], sig.psi_sq[i], gains.a[i], variant.shared)
                )
            else:
                drives.append(
                    drive_N(sig.w[i], sig.lam[i], sig.z[i], gains.beta_z[i], sig.psi_h[i],
                            gains.eta_theta[i], gains.eta_thetaN[i])
                )  # fmt: skip
        if variant.shared:
            neural_dot = [leakage_rate(est.neural[0], gains.beta_h[n - 1] * sum(drives), self._leak_shared, timing)]
        else:
            neural_dot = [
                leakage_rate(est.neural[i], gains.beta_h[i] * drives[i], self._leak_neural[i], timing)
                for i in range(n)
            ]

        tau_dot, d_dot, tau_N_dot, d_N_dot, rho_hat_dot = [], [], [], [], []
        for i in range(n):
            lam = sig.lam[i]
            tau_drive = gains.delta_1[i] * drive_tau(sig.w[i], sig.H[i], lam, gains.eta[i])
            tau_dot.append(leakage_rate(est.tau_hat[i], tau_drive, self._leak_tau[i], timing))
            d_drive = gains.q_1[i] * drive_d(lam, gains.eta_d[i])
            d_dot.append(leakage_rate(est.d_hat[i], d_drive, self._leak_d[i], timing))
            t_n, d_n = observer_adapt_rates(i, sig, est, variant, gains)
            tau_N_dot.append(t_n)
            d_N_dot.append(d_n)
            rho_hat_dot.append(spem_rhs(i, sig, est, u, variant, gains))

        return ControlOutput(
            u=u,
            alpha=alpha,
            signals=sig,
            sigma_dot=sigma_dot,
            filter_dot=filter_dot,
            neural_dot=neural_dot,
            tau_dot=tau_dot,
            tau_N_dot=tau_N_dot,
            d_dot=d_dot,
            d_N_dot=d_N_dot,
            rho_hat_dot=rho_hat_dot,
        )


class _FilterView:
    """A state proxy with substituted filter values (used for initialisation)."""

    def __init__(self, state, rho_c, rho_c_dot):
        self._state = state
        self.rho_c = rho_c
        self.rho_c_dot = rho_c_dot

    def __getattr__(self, name):
        return getattr(self._state, name)
