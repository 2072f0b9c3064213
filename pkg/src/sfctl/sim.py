"""Fixed-step closed-loop simulation, trajectory logs and run metrics.

The plant, compensation signals, command filters, estimation model and all
adaptive estimates form one ODE system integrated with classic RK4 at a
single step size. Metrics are computed on the full integration grid; the
CSV log is a decimated copy.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .config import ExperimentConfig, format_config
from .controller import ControlOutput, Controller, FilterState
from .gains import NeuralForm
from .learning import AdaptiveEstimates
from .plant import PlantModel, ReferenceSignal, plant_rhs
from .signals import ModelViolation

log = logging.getLogger(__name__)


class SimulationDiverged(ArithmeticError):
    """Non-finite value or model violation during a run; carries the partial log."""

    def __init__(self, message: str, log: Optional["TrajectoryLog"] = None, t: float = math.nan):
        super().__init__(message)
        self.log = log
        self.t = t


# ---------------------------------------------------------------------------
# state


@dataclass
class SystemState:
    """Plant states plus every controller-side dynamic state at time ``t``.

    ``rho_c[0]`` and ``rho_c_dot[0]`` are None (the first level has no filter).
    """

    rho: list[float]
    sigma: list[float]
    rho_c: list[Optional[float]]
    rho_c_dot: list[Optional[float]]
    rho_hat: list[float]
    estimates: AdaptiveEstimates
    t: float = 0.0

    @property
    def filters(self) -> list[FilterState]:
        return [FilterState(self.rho_c[i], self.rho_c_dot[i]) for i in range(1, len(self.rho))]

    @property
    def z(self) -> list[float]:
        return [a - b for a, b in zip(self.rho, self.rho_hat)]


class StateLayout:
    """Maps :class:`SystemState` to and from one flat vector."""

    def __init__(self, n: int, shared: bool, neural_name: str = "L_hat"):
        self.n = n
        self.shared = shared
        nn = 1 if shared else n
        sizes = [
            ("rho", n), ("sigma", n), ("rho_c", n - 1), ("rho_c_dot", n - 1), ("rho_hat", n),
            ("neural", nn), ("tau_hat", n), ("tau_hat_N", n), ("d_hat", n), ("d_hat_N", n),
        ]  # fmt: skip
        self.slices = {}
        pos = 0
        for name, size in sizes:
            self.slices[name] = slice(pos, pos + size)
            pos += size
        self.size = pos
        names = []
        for name, size in sizes:
            label = neural_name if name == "neural" else name
            if name == "neural" and shared:
                names.append(label)
                continue
            offset = 2 if name in ("rho_c", "rho_c_dot") else 1
            names.extend(f"{label}{j + offset}" for j in range(size))
        self.names = names

    def pack(self, s: SystemState) -> np.ndarray:
        e = s.estimates
        parts = (
            s.rho, s.sigma, s.rho_c[1:], s.rho_c_dot[1:], s.rho_hat,
            e.neural, e.tau_hat, e.tau_hat_N, e.d_hat, e.d_hat_N,
        )  # fmt: skip
        return np.array([v for part in parts for v in part], dtype=float)

    def unpack(self, x, t: float = 0.0) -> SystemState:
        v = x.tolist() if isinstance(x, np.ndarray) else list(x)
        sl = self.slices
        return SystemState(
            rho=v[sl["rho"]],
            sigma=v[sl["sigma"]],
            rho_c=[None] + v[sl["rho_c"]],
            rho_c_dot=[None] + v[sl["rho_c_dot"]],
            rho_hat=v[sl["rho_hat"]],
            estimates=AdaptiveEstimates(
                v[sl["neural"]], v[sl["tau_hat"]], v[sl["tau_hat_N"]], v[sl["d_hat"]], v[sl["d_hat_N"]]
            ),
            t=t,
        )


# ---------------------------------------------------------------------------
# integrator


def _check_finite(x: np.ndarray, names: Optional[Sequence[str]], where: str):
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        label = names[bad] if names is not None else f"component {bad}"
        raise FloatingPointError(f"non-finite {label} ({x[bad]}) {where}")


def rk4_step(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t: float,
    x: np.ndarray,
    dt: float,
    k1: Optional[np.ndarray] = None,
    names: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """One classic RK4 step; ``k1`` may be passed in if already evaluated at (t, x).

    Raises FloatingPointError naming the first non-finite component.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = np.asarray(x, dtype=float)
    if k1 is None:
        k1 = np.asarray(rhs(t, x), dtype=float)
    half = 0.5 * dt
    k2 = np.asarray(rhs(t + half, x + half * k1), dtype=float)
    k3 = np.asarray(rhs(t + half, x + half * k2), dtype=float)
    k4 = np.asarray(rhs(t + dt, x + dt * k3), dtype=float)
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_finite(out, names, f"after step from t={t:.6g}")
    return out


# ---------------------------------------------------------------------------
# closed loop


class ClosedLoop:
    """Plant + controller + reference as one ODE right-hand side."""

    def __init__(self, plant: PlantModel, controller: Controller, reference: ReferenceSignal):
        if plant.n != controller.n:
            raise ValueError("plant and controller orders differ")
        self.plant = plant
        self.controller = controller
        self.reference = reference
        neural_name = "L_hat" if controller.variant.neural_form is NeuralForm.SQUARED_NORM else "N_hat"
        self.layout = StateLayout(plant.n, controller.variant.shared, neural_name)

    def initial_state(self, rho0: Sequence[float]) -> np.ndarray:
        """Zero estimates and compensation, exact state-estimator start, matched filters."""
        n = self.plant.n
        if len(rho0) != n:
            raise ValueError(f"initial state needs {n} entries")
        shared = self.controller.variant.shared
        state = SystemState(
            rho=[float(v) for v in rho0],
            sigma=[0.0] * n,
            rho_c=[None] + [0.0] * (n - 1),
            rho_c_dot=[None] + [0.0] * (n - 1),
            rho_hat=[float(v) for v in rho0],
            estimates=AdaptiveEstimates.zeros(n, shared),
        )
        ref = self.reference
        state.rho_c, state.rho_c_dot = self.controller.initial_filters(state, ref.y(0.0), ref.ydot(0.0))
        return self.layout.pack(state)

    def evaluate(self, t: float, x: np.ndarray, state: Optional[SystemState] = None) -> tuple[np.ndarray, ControlOutput]:
        if state is None:
            state = self.layout.unpack(x, t)
        ref = self.reference
        out = self.controller.step(state, ref.y(t), ref.ydot(t))
        rho_dot = plant_rhs(self.plant, state.rho, out.u, t)
        # same order as StateLayout
        dx = np.array(
            rho_dot + out.sigma_dot + [f[0] for f in out.filter_dot] + [f[1] for f in out.filter_dot]
            + out.rho_hat_dot + out.neural_dot + out.tau_dot + out.tau_N_dot + out.d_dot + out.d_N_dot
        )  # fmt: skip
        return dx, out

    def rates(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.evaluate(t, x)[0]


# ---------------------------------------------------------------------------
# logs and metrics


@dataclass
class TrajectoryLog:
    """Column-oriented samples on a uniform time grid."""

    columns: list[str]
    data: np.ndarray
    header: list[str] = field(default_factory=list)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self["t"]

    def __len__(self) -> int:
        return self.data.shape[0]

    def to_csv(self) -> str:
        lines = [f"# {h}" if h else "#" for h in self.header]
        lines.append(",".join(self.columns))
        for row in self.data:
            lines.append(",".join(format(v, ".17g") for v in row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())

    @classmethod
    def read_csv(cls, path) -> "TrajectoryLog":
        header, rows, columns = [], [], None
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line.startswith("#"):
                    header.append(line[2:] if line.startswith("# ") else line[1:])
                elif columns is None:
                    columns = line.split(",")
                elif line:
                    rows.append([float(v) for v in line.split(",")])
        data = np.array(rows, dtype=float).reshape(-1, len(columns))
        return cls(columns, data, header)


@dataclass
class RunMetrics:
    rms_tracking_error: float
    max_abs_error: float
    settle_time: float  # inf when unsettled
    control_energy: float
    switch_activity: float
    max_abs_prediction_error: float
    band: float
    window: tuple[float, float]

    @property
    def settled(self) -> bool:
        return math.isfinite(self.settle_time)

    def as_dict(self) -> dict[str, float]:
        return {
            "rms_tracking_error": self.rms_tracking_error,
            "max_abs_error": self.max_abs_error,
            "settle_time": self.settle_time,
            "settled": self.settled,
            "control_energy": self.control_energy,
            "switch_activity": self.switch_activity,
            "max_abs_prediction_error": self.max_abs_prediction_error,
            "band": self.band,
            "window_start": self.window[0],
            "window_end": self.window[1],
        }

    def to_text(self) -> str:
        out = []
        for key, value in self.as_dict().items():
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif math.isinf(value):
                text = "inf"
            else:
                text = format(value, ".17g")
            out.append(f"{key}={text}")
        return "\n".join(out) + "\n"


def _trapz(y: np.ndarray, x: np.ndarray) -> float:
    if len(x) < 2:
        return 0.0
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def compute_metrics(log: TrajectoryLog, band: float = 0.05, window: tuple[float, float] = (5.0, 20.0)) -> RunMetrics:
    """Metrics from a log with columns t, zeta1, u, w<n> and z<i>N.

    The settle time is the first instant after which |zeta1| stays inside
    ``band`` through the end of the log (inf if the last sample is outside).
    """
    t = log.t
    t0, t1 = window
    mask = (t >= t0 - 1e-12) & (t <= t1 + 1e-12)
    if not np.any(mask):
        raise ValueError(f"metrics window [{t0}, {t1}] contains no samples")
    e = log["zeta1"]
    u = log["u"]
    w_cols = [c for c in log.columns if c.startswith("w")]
    z_cols = [c for c in log.columns if c.startswith("z") and c.endswith("N")]

    te, ew = t[mask], e[mask]
    if len(te) >= 2:
        rms = math.sqrt(_trapz(ew * ew, te) / (te[-1] - te[0]))
    else:
        rms = abs(float(ew[0]))
    outside = np.flatnonzero(np.abs(e) > band)
    if outside.size == 0:
        settle = float(t[0])
    elif outside[-1] == len(t) - 1:
        settle = math.inf
    else:
        settle = float(t[outside[-1] + 1])
    energy = _trapz(u * u, t)
    if w_cols:
        w = log[w_cols[-1]]
        activity = float(np.mean(w < 1.0))
    else:
        activity = 0.0
    if z_cols:
        zmax = max(float(np.max(np.abs(log[c][mask]))) for c in z_cols)
    else:
        zmax = 0.0
    return RunMetrics(
        rms_tracking_error=rms,
        max_abs_error=float(np.max(np.abs(ew))),
        settle_time=settle,
        control_energy=energy,
        switch_activity=activity,
        max_abs_prediction_error=zmax,
        band=band,
        window=(t0, t1),
    )


# ---------------------------------------------------------------------------
# experiments


def log_columns(n: int, shared: bool, neural_name: str) -> list[str]:
    cols = ["t"]
    cols += [f"rho{i + 1}" for i in range(n)]
    cols += ["zeta1"]
    cols += [f"lambda{i + 1}" for i in range(n)]
    cols += [f"sigma{i + 1}" for i in range(n)]
    cols += [f"w{i + 1}" for i in range(n)]
    cols += ["u"]
    cols += [neural_name] if shared else [f"{neural_name}{i + 1}" for i in range(n)]
    for name in ("tau_hat", "tau_hat_N", "d_hat", "d_hat_N"):
        cols += [f"{name}{i + 1}" for i in range(n)]
    cols += [f"z{i + 1}N" for i in range(n)]
    return cols


def _log_row(t: float, state: SystemState, out: ControlOutput) -> list[float]:
    sig = out.signals
    e = state.estimates
    return (
        [t] + state.rho + [sig.zeta[0]] + sig.lam + state.sigma + sig.w + [out.u]
        + e.neural + e.tau_hat + e.tau_hat_N + e.d_hat + e.d_hat_N + sig.z
    )  # fmt: skip


DENSE_COLUMNS_BASE = ("t", "zeta1", "u")


@dataclass
class RunResult:
    log: TrajectoryLog
    metrics: RunMetrics
    dense: TrajectoryLog
    config: Optional[ExperimentConfig] = None


def build_loop(cfg: ExperimentConfig) -> ClosedLoop:
    plant = cfg.plant()
    gains = cfg.gains()
    controller = Controller(
        cfg.variant,
        gains,
        cfg.networks(),
        plant.g,
        composite=cfg["experiment.composite"],
        switching=cfg["experiment.switching"],
    )
    return ClosedLoop(plant, controller, cfg.reference())


def simulate(
    loop: ClosedLoop,
    rho0: Sequence[float],
    dt: float,
    horizon: float,
    decimation: int = 10,
    header: Sequence[str] = (),
) -> tuple[TrajectoryLog, TrajectoryLog]:
    """Integrate from t = 0 to ``horizon``; returns (decimated log, dense log)."""
    n = loop.plant.n
    variant = loop.controller.variant
    neural_name = "L_hat" if variant.neural_form is NeuralForm.SQUARED_NORM else "N_hat"
    columns = log_columns(n, variant.shared, neural_name)
    dense_columns = list(DENSE_COLUMNS_BASE) + [f"w{i + 1}" for i in range(n)] + [f"z{i + 1}N" for i in range(n)]
    steps = int(round(horizon / dt))
    if steps < 1:
        raise ValueError("horizon must cover at least one step")
    names = loop.layout.names
    rows: list[list[float]] = []
    dense = np.empty((steps + 1, len(dense_columns)))

    def partial():
        return TrajectoryLog(columns, np.array(rows, dtype=float).reshape(-1, len(columns)), list(header))

    try:
        x = loop.initial_state(rho0)
    except ModelViolation as exc:
        raise SimulationDiverged(str(exc), partial(), 0.0) from None
    for k in range(steps + 1):
        t = k * dt
        try:
            state = loop.layout.unpack(x, t)
            dx, out = loop.evaluate(t, x, state)
            _check_finite(dx, names, f"in rates at t={t:.6g}")
            if not math.isfinite(out.u):
                raise FloatingPointError(f"non-finite control input u at t={t:.6g}")
        except (FloatingPointError, ModelViolation, OverflowError, ZeroDivisionError) as exc:
            raise SimulationDiverged(str(exc), partial(), t) from None
        sig = out.signals
        dense[k] = [t, sig.zeta[0], out.u, *sig.w, *sig.z]
        if k % decimation == 0:
            rows.append(_log_row(t, state, out))
        if k == steps:
            break
        try:
            x = rk4_step(loop.rates, t, x, dt, k1=dx, names=names)
        except (FloatingPointError, ModelViolation, OverflowError, ZeroDivisionError) as exc:
            raise SimulationDiverged(str(exc), partial(), t) from None
    return partial(), TrajectoryLog(dense_columns, dense)


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    loop = build_loop(cfg)
    header = format_config(cfg).splitlines()
    log.info("running %s (%s) for %.3g s at dt=%.3g", cfg.name, cfg.variant.label, cfg.horizon, cfg.dt)
    traj, dense = simulate(loop, cfg.rho0(), cfg.dt, cfg.horizon, cfg["experiment.decimation"], header)
    metrics = compute_metrics(dense, cfg["experiment.band"], tuple(cfg["experiment.window"]))
    return RunResult(traj, metrics, dense, cfg)


# ---------------------------------------------------------------------------
# comparisons

METRIC_NAMES = (
    "rms_tracking_error",
    "max_abs_error",
    "settle_time",
    "control_energy",
    "switch_activity",
    "max_abs_prediction_error",
)


def _plant_signature(cfg: ExperimentConfig):
    keys = ["experiment.plant"] + [f"plant.{k}" for k in ("order", "g_e", "m_c", "m_a", "l_a", "disturbance")]
    return tuple(cfg[k] for k in keys)


def _reference_signature(cfg: ExperimentConfig):
    return (cfg["reference.amplitude"], cfg["reference.frequency"])


@dataclass
class Comparison:
    labels: list[str]
    results: list[RunResult]

    def metric(self, name: str) -> list[float]:
        return [getattr(r.metrics, name) for r in self.results]

    def ranks(self, name: str) -> list[int]:
        """1 = best (smallest); ties share the better rank."""
        vals = self.metric(name)
        return [1 + sum(1 for other in vals if other < v) for v in vals]

    def table(self) -> str:
        width = max(12, *(len(lbl) for lbl in self.labels))
        head = f"{'metric':<26}" + "".join(f"{lbl:>{width + 2}}" for lbl in self.labels)
        lines = [head]
        for name in METRIC_NAMES:
            vals = self.metric(name)
            lines.append(f"{name:<26}" + "".join(f"{_short(v):>{width + 2}}" for v in vals))
        lines.append("")
        lines.append("ranking (1 = smallest)")
        lines.append(head)
        for name in METRIC_NAMES:
            lines.append(f"{name:<26}" + "".join(f"{r:>{width + 2}}" for r in self.ranks(name)))
        return "\n".join(lines) + "\n"


def _short(v: float) -> str:
    if math.isinf(v):
        return "unsettled"
    return f"{v:.6g}"


def compare_runs(configs: Sequence[ExperimentConfig], labels: Optional[Sequence[str]] = None) -> Comparison:
    if len(configs) < 2:
        raise ValueError("compare_runs needs at least two configs")
    first = configs[0]
    for cfg in configs[1:]:
        if _plant_signature(cfg) != _plant_signature(first):
            raise ValueError(f"config {cfg.name!r} uses a different plant than {first.name!r}")
        if _reference_signature(cfg) != _reference_signature(first):
            raise ValueError(f"config {cfg.name!r} uses a different reference than {first.name!r}")
    if labels is None:
        labels = _unique_labels(configs)
    results = [run_experiment(cfg) for cfg in configs]
    return Comparison(list(labels), results)


def _unique_labels(configs: Sequence[ExperimentConfig]) -> list[str]:
    labels = []
    for i, cfg in enumerate(configs):
        label = cfg.name if cfg.name != "run" else cfg.variant.label
        if label in labels:
            label = f"{label}#{i + 1}"
        labels.append(label)
    return labels
