import math

import numpy as np
import pytest

from sfctl.config import parse_config_text
from sfctl.controller import (
    Controller,
    FilterState,
    command_filter_step,
    compensation_rhs,
    filter_rates,
    virtual_control,
)
from sfctl.gains import ControllerVariant, FilterGains, GainSet
from sfctl.learning import AdaptiveEstimates, Timing
from sfctl.signals import LoopSignals, ModelViolation, lambda_errors, tracking_errors
from sfctl.sim import SystemState

ALPHA1_EXAMPLE = -0.2426243058372793

ALL = ControllerVariant.all()


def signals(**kw):
    base = dict(
        rho=[0.0, 0.0], w=[1.0, 1.0], psi_sq=[1.0, 1.0], psi_h=[1.0, 1.0], zeta=[0.0, 0.0],
        lam=[0.0, 0.0], z=[0.0, 0.0], g=[1.0, 1.0], H=[1.0, 1.0],
    )  # fmt: skip
    base.update(kw)
    return LoopSignals(**base)


def make_controller(label, **kw):
    cfg = parse_config_text(f"[experiment]\nvariant = {label}\n")
    plant = cfg.plant()
    return Controller(cfg.variant, cfg.gains(), cfg.networks(), plant.g, **kw)


def state(rho, rho_c2=0.0, rho_c2_dot=0.0, shared=False, rho_hat=None, sigma=(0.0, 0.0)):
    return SystemState(
        rho=list(rho),
        sigma=list(sigma),
        rho_c=[None, rho_c2],
        rho_c_dot=[None, rho_c2_dot],
        rho_hat=list(rho if rho_hat is None else rho_hat),
        estimates=AdaptiveEstimates.zeros(2, shared),
    )


def test_error_definitions():
    assert tracking_errors([0.2, 0.5], 0.2, [None, 0.5]) == [0.0, 0.0]
    assert tracking_errors([-0.1, 0.0], 0.0, [None, 0.0]) == [-0.1, 0.0]
    assert lambda_errors([0.2, -0.1], [0.05, 0.05]) == pytest.approx([0.15, -0.15])
    with pytest.raises(ValueError):
        tracking_errors([0.0, 0.0], 0.0, [None])


def test_compensation_examples():
    gains = GainSet.defaults(2)
    assert compensation_rhs([0.0, 0.0], [0.0, 0.0], [1.0, 1.0], gains, Timing.FNT) == [0.0, 0.0]
    assert compensation_rhs([0.0, 0.0], [0.1, 0.0], [1.0, 1.0], gains, Timing.FNT) == pytest.approx([0.1, 0.0])
    fxt = compensation_rhs([1.0, 0.0], [0.0, 0.0], [1.0, 1.0], gains, Timing.FXT)
    assert fxt == pytest.approx([-6.0, -1.0])


def test_virtual_control_zero_and_example():
    gains = GainSet.defaults(2)
    v = ControllerVariant.from_label("fnt-m1")
    est = AdaptiveEstimates.zeros(2, False)
    assert virtual_control(0, signals(), est, 0.0, v, gains) == 0.0
    sig = signals(zeta=[0.1, 0.0], lam=[0.1, 0.0])
    assert virtual_control(0, sig, est, 0.0, v, gains) == pytest.approx(ALPHA1_EXAMPLE, rel=1e-13)


@pytest.mark.parametrize("variant", ALL, ids=lambda v: v.label)
def test_neural_term_vanishes_outside_region(variant):
    gains = GainSet.defaults(2)
    est = AdaptiveEstimates([5.0] * (1 if variant.shared else 2), [2.0] * 2, [0.0] * 2, [0.0] * 2, [0.0] * 2)
    sig = signals(zeta=[0.3, 0.1], lam=[0.3, 0.1], w=[0.0, 0.0], psi_sq=[7.0, 7.0], psi_h=[3.0, 3.0])
    base = virtual_control(1, sig, est, 0.0, variant, gains)
    other = signals(zeta=[0.3, 0.1], lam=[0.3, 0.1], w=[0.0, 0.0], psi_sq=[1.0, 1.0], psi_h=[1.0, 1.0])
    assert virtual_control(1, other, est, 0.0, variant, gains) == base
    # robust estimate is fully active
    est.tau_hat[1] = 0.0
    assert virtual_control(1, sig, est, 0.0, variant, gains) - base == pytest.approx(2.0 * math.tanh(1.0))


def test_virtual_control_rejects_small_gain():
    gains = GainSet.defaults(2)
    v = ControllerVariant.from_label("fnt-m1")
    with pytest.raises(ModelViolation):
        virtual_control(1, signals(g=[1.0, 0.01]), AdaptiveEstimates.zeros(2, False), 0.0, v, gains)
    with pytest.raises(IndexError):
        virtual_control(2, signals(), AdaptiveEstimates.zeros(2, False), 0.0, v, gains)


@pytest.mark.parametrize("timing", list(Timing))
def test_filter_holds_equilibrium(timing):
    fg = FilterGains()
    fs = FilterState(0.3, 0.0)
    for _ in range(2000):
        fs = command_filter_step(fs, 0.3, fg, timing, 1e-3)
    assert fs.rho_c == pytest.approx(0.3, abs=1e-6)
    assert abs(fs.rho_c_dot) < 1e-6
    zero = FilterState(0.0, 0.0)
    assert command_filter_step(zero, 0.0, fg, timing, 1e-3) == zero


@pytest.mark.parametrize("timing", list(Timing))
def test_filter_tracks_ramp_slope(timing):
    fg = FilterGains()
    dt = 1e-3
    fs = FilterState(0.0, 0.0)
    for k in range(4000):
        fs = command_filter_step(fs, k * dt, fg, timing, dt)
    assert fs.rho_c_dot == pytest.approx(1.0, rel=0.01)


def test_filter_rates_and_step_validation():
    assert filter_rates(0.0, 0.0, 0.0, FilterGains(), 1.0) == (0.0, 0.0)
    with pytest.raises(ValueError):
        command_filter_step(FilterState(), 0.0, FilterGains(), Timing.FNT, 0.0)


@pytest.mark.parametrize("variant", ALL, ids=lambda v: v.label)
def test_equilibrium_gives_zero_input_and_rates(variant):
    ctrl = make_controller(variant.label)
    out = ctrl.step(state([0.0, 0.0], shared=variant.shared), 0.0, 0.0)
    assert out.u == 0.0
    rates = out.sigma_dot + out.neural_dot + out.tau_dot + out.tau_N_dot + out.d_dot + out.d_N_dot
    assert all(r == 0.0 for r in rates)
    assert all(f == (0.0, 0.0) for f in out.filter_dot)


@pytest.mark.parametrize("variant", ALL, ids=lambda v: v.label)
def test_initial_instant_of_regression_run(variant):
    ctrl = make_controller(variant.label)
    s = state([-0.1, 0.0], shared=variant.shared)
    s.rho_c, s.rho_c_dot = ctrl.initial_filters(s, 0.0, 0.2)
    out = ctrl.step(s, 0.0, 0.2)
    assert math.isfinite(out.u)
    assert abs(out.signals.zeta[0]) == pytest.approx(0.1)
    # matched filter: no initial gap between rho_2c and alpha_1
    assert s.rho_c[1] == pytest.approx(out.alpha[0], abs=1e-15)


def test_ablation_matches_zero_beta_z():
    a = make_controller("fnt-m1", composite=False)
    assert a.gains.beta_z == (0.0, 0.0)
    s = state([0.1, 0.05], rho_c2=0.02, rho_hat=[0.08, 0.0])
    s.estimates.neural[:] = [0.5, 0.7]
    full = make_controller("fnt-m1").step(s, 0.0, 0.2)
    cut = a.step(s, 0.0, 0.2)
    assert cut.u == full.u
    assert cut.neural_dot != full.neural_dot


@pytest.mark.parametrize("label", ["fnt-m1", "fxt-m6s"])
def test_control_is_continuous_across_switching_band(label):
    ctrl = make_controller(label)
    rhos = np.linspace(0.2, 0.4, 2001)
    us = []
    for r in rhos:
        s = state([r, 0.0], shared=ctrl.variant.shared)
        for est in (s.estimates.neural, s.estimates.tau_hat):
            est[:] = [1.0] * len(est)
        us.append(ctrl.step(s, 0.0, 0.0).u)
    jumps = np.abs(np.diff(us))
    # no step larger than a few times the typical increment
    assert jumps.max() < 5 * np.median(jumps) + 1e-9


def test_switching_can_be_frozen():
    ctrl = make_controller("fnt-m1", switching=False)
    out = ctrl.step(state([0.6, 0.0]), 0.0, 0.0)
    assert out.signals.w == [1.0, 1.0]
    out = make_controller("fnt-m1").step(state([0.6, 0.0]), 0.0, 0.0)
    assert out.signals.w == [0.0, 0.0]


def test_controller_shape_validation():
    cfg = parse_config_text("")
    nets = cfg.networks()
    with pytest.raises(ValueError):
        Controller(cfg.variant, cfg.gains(), nets[:1], cfg.plant().g)
    with pytest.raises(ValueError):
        Controller(cfg.variant, cfg.gains(), [nets[1], nets[1]], cfg.plant().g)
