import math

import pytest

from sfctl.gains import ControllerVariant, GainSet
from sfctl.learning import AdaptiveEstimates
from sfctl.observer import observer_adapt_rates, spem_rhs
from sfctl.signals import LoopSignals

SPEM_EXAMPLE = 0.451188643150958
TEN_TANH1 = 7.615941559557649


def signals(**kw):
    base = dict(
        rho=[0.0, 0.0], w=[1.0, 1.0], psi_sq=[1.0, 1.0], psi_h=[1.0, 1.0], zeta=[0.0, 0.0],
        lam=[0.0, 0.0], z=[0.0, 0.0], g=[1.0, 1.0], H=[1.0, 1.0],
    )  # fmt: skip
    base.update(kw)
    return LoopSignals(**base)


@pytest.mark.parametrize("variant", ControllerVariant.all(), ids=lambda v: v.label)
def test_perfect_prediction_reduces_to_known_part(variant):
    gains = GainSet.defaults(2)
    sig = signals(rho=[0.2, -0.3], g=[1.0, 1.4])
    est = AdaptiveEstimates.zeros(2, variant.shared)
    assert spem_rhs(0, sig, est, 2.5, variant, gains) == pytest.approx(-0.3)
    assert spem_rhs(1, sig, est, 2.5, variant, gains) == pytest.approx(1.4 * 2.5)
    assert observer_adapt_rates(0, sig, est, variant, gains) == (0.0, 0.0)


def test_spem_example_value():
    variant = ControllerVariant.from_label("fnt-m1")
    gains = GainSet.defaults(2, r_1=1.0, r_2=1.0)
    sig = signals(z=[0.1, 0.0], psi_sq=[2.0, 1.0], rho=[0.0, 0.0])
    est = AdaptiveEstimates([1.0, 0.0], [0.0] * 2, [0.0] * 2, [0.0] * 2, [0.0] * 2)
    assert spem_rhs(0, sig, est, 0.0, variant, gains) == pytest.approx(SPEM_EXAMPLE, rel=1e-13)


def test_robust_term_gated_inside_neural_region():
    variant = ControllerVariant.from_label("fxt-m5")
    gains = GainSet.defaults(2)
    est = AdaptiveEstimates([0.0, 0.0], [0.0] * 2, [3.0, 3.0], [0.0] * 2, [0.0] * 2)
    inside = spem_rhs(0, signals(z=[0.2, 0.0], w=[1.0, 1.0]), est, 0.0, variant, gains)
    outside = spem_rhs(0, signals(z=[0.2, 0.0], w=[0.0, 0.0]), est, 0.0, variant, gains)
    assert outside - inside == pytest.approx(3.0 * math.tanh(0.2 / 0.1))


def test_observer_tau_rate_example():
    variant = ControllerVariant.from_label("fnt-m1")
    # zero estimates make the leakage terms vanish
    gains = GainSet.defaults(2, eta_N=1.0, delta_1N=10.0)
    sig = signals(w=[0.0, 0.0], z=[1.0, 0.0])
    tau, _ = observer_adapt_rates(0, sig, AdaptiveEstimates.zeros(2, False), variant, gains)
    assert tau == pytest.approx(TEN_TANH1, rel=1e-14)
    sig = signals(w=[1.0, 1.0], z=[1.0, 0.0])
    tau, d = observer_adapt_rates(0, sig, AdaptiveEstimates.zeros(2, False), variant, gains)
    assert tau == 0.0 and d > 0.0


def test_fxt_correction_uses_both_powers():
    gains = GainSet.defaults(2)
    est = AdaptiveEstimates.zeros(2, False)
    sig = signals(z=[2.0, 0.0], w=[1.0, 1.0])
    fxt = spem_rhs(0, sig, est, 0.0, ControllerVariant.from_label("fxt-m4"), gains)
    fnt = spem_rhs(0, sig, est, 0.0, ControllerVariant.from_label("fnt-m1"), gains)
    assert fxt == pytest.approx(5.0 * 2.0 ** (5 / 3) + 2.0**0.6)
    assert fnt == pytest.approx(5.0 * 2.0 + 2.0**0.6)


def test_index_checks():
    v = ControllerVariant.from_label("fnt-m1")
    with pytest.raises(IndexError):
        spem_rhs(2, signals(), AdaptiveEstimates.zeros(2, False), 0.0, v, GainSet.defaults(2))
    with pytest.raises(IndexError):
        observer_adapt_rates(-1, signals(), AdaptiveEstimates.zeros(2, False), v, GainSet.defaults(2))
