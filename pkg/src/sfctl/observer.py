"""Serial-parallel estimation models producing the prediction errors z_i = rho_i - rho_hat_i.

Only measured or internally estimated quantities enter here; the plant's
uncertain terms never do.
"""

from __future__ import annotations

import math

from .core_math import signed_pow
from .gains import ControllerVariant, GainSet, NeuralForm
from .learning import AdaptiveEstimates, Leakage, Timing, drive_d, drive_tau, leakage_rate
from .signals import LoopSignals


def _check_index(i: int, n: int):
    if not 0 <= i < n:
        raise IndexError(f"subsystem index {i} out of range for order {n}")


def spem_rhs(
    i: int,
    sig: LoopSignals,
    est: AdaptiveEstimates,
    u: float,
    variant: ControllerVariant,
    gains: GainSet,
) -> float:
    """d(rho_hat_i)/dt for 0-based subsystem ``i``."""
    n = gains.n
    _check_index(i, n)
    z = sig.z[i]
    w = sig.w[i]
    neural = est.neural[0 if variant.shared else i]
    if variant.neural_form is NeuralForm.SQUARED_NORM:
        a = gains.a[i]
        learn = w / (2.0 * a * a) * neural * z * sig.psi_sq[i]
    else:
        ph = sig.psi_h[i]
        learn = w * neural * ph * math.tanh(ph * z / gains.eta_thetaN[i])
    H = sig.H[i]
    robust = (1.0 - w) * est.tau_hat_N[i] * H * math.tanh(H * z / gains.eta_N[i])
    nxt = sig.rho[i + 1] if i + 1 < n else u
    if variant.timing is Timing.FNT:
        correction = gains.r_1[i] * z + gains.r_2[i] * signed_pow(z, gains.m)
    else:
        correction = gains.r_1[i] * signed_pow(z, gains.r) + gains.r_2[i] * signed_pow(z, gains.m)
    dist = est.d_hat_N[i] * math.tanh(z / gains.eta_dN[i])
    return learn + robust + sig.g[i] * nxt + correction + dist


def observer_adapt_rates(
    i: int,
    sig: LoopSignals,
    est: AdaptiveEstimates,
    variant: ControllerVariant,
    gains: GainSet,
) -> tuple[float, float]:
    """Rates of (tau_hat_N_i, d_hat_N_i)."""
    _check_index(i, gains.n)
    z = sig.z[i]
    timing = variant.timing
    tau = leakage_rate(
        est.tau_hat_N[i],
        gains.delta_1N[i] * drive_tau(sig.w[i], sig.H[i], z, gains.eta_N[i]),
        Leakage(gains.delta_2N[i], gains.delta_3N[i], gains.m, gains.r),
        timing,
    )
    d = leakage_rate(
        est.d_hat_N[i],
        gains.q_1N[i] * drive_d(z, gains.eta_dN[i]),
        Leakage(gains.q_2N[i], gains.q_3N[i], gains.m, gains.r),
        timing,
    )
    return tau, d
