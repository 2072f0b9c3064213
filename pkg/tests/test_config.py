import pytest

from sfctl.config import ConfigError, format_config, parse_config, parse_config_text, strip_prefix
from sfctl.gains import ControllerVariant

MINIMAL = """
[experiment]
plant = pendulum
variant = fnt-m1
"""


def test_minimal_file_gets_documented_defaults():
    cfg = parse_config_text(MINIMAL)
    assert cfg.variant == ControllerVariant.from_label("fnt-m1")
    assert cfg.dt == 1e-3 and cfg.horizon == 20.0
    assert cfg["experiment.decimation"] == 10
    assert cfg.rho0() == (-0.1, 0.0)
    g = cfg.gains()
    assert g.k == (2.0, 4.0) and g.p == (0.5, 0.5) and g.gamma == (1.0, 1.0)
    assert g.k1 == (2.0, 2.0) and g.k2 == (4.0, 4.0)
    assert g.m == 0.6 and g.r == pytest.approx(5 / 3)
    assert g.a[1] == 1.0 and g.beta_h[1] == 10.0 and g.delta_1[1] == 10.0 and g.delta_1N[1] == 10.0
    assert [net.n_nodes for net in cfg.networks()] == [11, 121]
    assert "gains.k" in cfg.defaulted and "experiment.variant" not in cfg.defaulted


def test_m_out_of_range_is_rejected():
    with pytest.raises(ConfigError, match=r"m must lie in \(1/2, 1\)"):
        parse_config_text(MINIMAL + "[gains]\nm = 1.2\n")


def test_decimal_r_is_accepted():
    cfg = parse_config_text(MINIMAL + "[gains]\nr = 1.6667\n")
    assert cfg.gains().r == pytest.approx(1.6667)
    assert cfg.gains().r > 1


def test_fraction_syntax():
    cfg = parse_config_text("[gains]\nr = 5/3\n")
    assert cfg["gains.r"] == pytest.approx(5 / 3, rel=1e-15)


def test_echo_round_trip(tmp_path):
    text = MINIMAL + "[gains]\nk = 3, 5  # per subsystem\nbeta_z = 0\n[switch]\nform = absolute\n"
    cfg = parse_config_text(text)
    echo = format_config(cfg, prefix="# ")
    assert "# default" in echo
    again = parse_config_text(strip_prefix(echo))
    assert again == cfg
    path = tmp_path / "c.ini"
    path.write_text(format_config(cfg))
    assert parse_config(path) == cfg


@pytest.mark.parametrize(
    "text,pattern",
    [
        ("[experiment]\nvariant = fnt-m1\ncolour = red\n", "line 3: unknown key"),
        ("[experiment]\nvariant fnt-m1\n", "line 2"),
        ("variant = fnt-m1\n", "line 1"),
        ("[bogus]\nx = 1\n", "line 1: unknown section"),
        ("[experiment]\ndt = -1\n", "experiment.dt must be positive"),
        ("[experiment]\nvariant = fnt-m9\n", "line 2: experiment.variant"),
        ("[gains]\nk = 1, 2, 3\n", "gains.k needs 1 or 2 values"),
        ("[gains]\ngamma = 0\n", "gains.gamma must be positive"),
        ("[switch]\nc1 = 0.4\n", "c1 < c2"),
        ("[gains]\nH = 1 + rho2**2\n", "H1 may only use rho1"),
        ("[plant]\ndisturbance = import os\n", "line 2: plant.disturbance"),
        ("[plant]\nrho0 = 0.1\n", "plant.rho0 needs 2 values"),
        ("[experiment]\nwindow = 5, 30\n", "window"),
        ("[filter]\nm_f = 1.0\n", "m_f"),
    ],
)
def test_config_errors(text, pattern):
    with pytest.raises(ConfigError, match=pattern):
        parse_config_text(text)


def test_with_value_revalidates():
    cfg = parse_config_text(MINIMAL)
    assert cfg.with_value("gains.beta_z", "0")["gains.beta_z"] == (0.0,)
    assert "gains.beta_z" not in cfg.with_value("gains.beta_z", "0").defaulted
    with pytest.raises(ConfigError):
        cfg.with_value("gains.m", "0.4")
    with pytest.raises(ConfigError, match="unknown parameter"):
        cfg.with_value("gains.nope", "1")


def test_chain_plant_order_resizes_defaults():
    cfg = parse_config_text("[experiment]\nplant = chain\n[plant]\norder = 3\nrho0 = 0.1, 0, 0\n")
    assert cfg.n == 3
    assert cfg.gains().k == (2.0, 4.0, 4.0)
    assert cfg.plant().n == 3


def test_default_window_follows_horizon():
    assert parse_config_text("")["experiment.window"] == (5.0, 20.0)
    cfg = parse_config_text("[experiment]\nhorizon = 8\n")
    assert cfg["experiment.window"] == (2.0, 8.0)
    assert cfg.with_value("experiment.horizon", "4")["experiment.window"] == (1.0, 4.0)
