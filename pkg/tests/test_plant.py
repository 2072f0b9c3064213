import math

import pytest

from sfctl.plant import (
    PendulumParams,
    PlantModel,
    ReferenceSignal,
    chain_model,
    empirical_bound,
    oracle_model,
    pendulum_model,
    plant_rhs,
)

# mpmath oracles for the default pendulum parameters
G2_AT_ZERO = 1.4634146341463414
H2_AT_01_0 = 1.5753912081738723


def test_pendulum_known_values():
    model = pendulum_model()
    assert model.g[1]([0.0, 0.0]) == pytest.approx(G2_AT_ZERO, rel=1e-14)
    assert model.h[1]([0.1, 0.0]) == pytest.approx(H2_AT_01_0, rel=1e-13)
    assert model.h[0]([0.3, 0.2]) == 0.0
    assert model.g[0]([0.3, 0.2]) == 1.0


def test_pendulum_rhs_at_rest():
    rates = plant_rhs(pendulum_model(), [0.0, 0.0], 0.0, 0.0)
    assert rates == [0.0, 0.0]


def test_pendulum_rhs_composition():
    model = pendulum_model(disturbance=lambda t: 0.5)
    rho, u = [0.1, -0.2], 1.5
    rates = plant_rhs(model, rho, u, 0.0)
    assert rates[0] == pytest.approx(-0.2)
    assert rates[1] == pytest.approx(model.h[1](rho) + model.g[1](rho) * u + 0.5, rel=1e-15)


def test_pendulum_parameter_validation():
    with pytest.raises(ValueError):
        PendulumParams(m_c=0.0)


def test_plant_shape_validation():
    with pytest.raises(ValueError):
        plant_rhs(chain_model(3), [0.0, 0.0], 0.0, 0.0)
    with pytest.raises(ValueError):
        PlantModel(2, (lambda r: 0.0,), (lambda r: 1.0,) * 2, (lambda t: 0.0,) * 2)
    with pytest.raises(ValueError):
        chain_model(0)


def test_chain_and_oracle():
    assert plant_rhs(chain_model(3), [1.0, 2.0, 3.0], 4.0, 0.0) == [2.0, 3.0, 4.0]
    rates = plant_rhs(oracle_model(), [1.0, 2.0], 3.0, 0.0)
    assert rates == pytest.approx([0.1 + 2.0, 0.2 + 3.0])


def test_reference_signal():
    ref = ReferenceSignal()
    assert ref.y(math.pi / 2) == pytest.approx(0.2)
    assert ref.ydot(0.0) == pytest.approx(0.2)
    h = 1e-6
    assert (ref.y(1 + h) - ref.y(1 - h)) / (2 * h) == pytest.approx(ref.ydot(1.0), rel=1e-8)


def test_empirical_bound_of_pendulum_drift():
    model = pendulum_model()
    box = [(-0.35, 0.35), (-1.0, 1.0)]
    tau2 = empirical_bound(model.h[1], box, points=41)
    assert 0 < tau2 < 10
    assert tau2 >= abs(model.h[1]([0.35, 0.0])) - 1e-12
