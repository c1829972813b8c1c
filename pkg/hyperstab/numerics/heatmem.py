"""Heat equation with memory under time-varying distributed feedback.

  v_t = v_xx - w + U(v) + d(t),   v(t, 0) = v(t, 1) = 0,
  w_t = -beta w + eta v + eps U(w),
  U(z) = -K psi(t)^n z,

stacked as X = [v; w] and integrated in the form X' + A X + K psi^n B_eps X = d.
"""

import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from hyperstab.config.constants import (
    FIGURE_MAX_SLICES, LOG_FLOOR, MIN_SNAPSHOT_DENSITY, REFORMULATION_DT_MAX, REFORMULATION_TOL,
    SWEEP_COMPARISON_POINTS, SWEEP_COMPARISON_START, SWEEP_ORDER_TOL,
)
from hyperstab.config.settings import get_settings
from hyperstab.errors import InsufficientSamplesError, PreconditionError
from hyperstab.models.experiment import (
    HeatMemoryExperiment, OrderingViolation, ReformulationPoint, ReformulationReport,
    SweepCurve, SweepReport,
)
from hyperstab.models.problem import EvolutionProblem, SimulationOptions, SpatialPattern
from hyperstab.models.schedule import PsiKind, PsiSchedule
from hyperstab.models.trajectory import Trajectory
from hyperstab.numerics import figures
from hyperstab.numerics.operators import (
    build_B_epsilon, build_memory_operator, build_v_block_control,
)
from hyperstab.numerics.solver import default_dt_max, simulate
from hyperstab.numerics.timescale import gain_profile
from hyperstab.utils.logger import get_logger

logger = get_logger(__name__)

_MODULE = "heatmem"

HEAT_MEMORY_LABEL = "heat_memory"
V_ONLY_LABEL = "heat_memory_v_only_control"

_dir_locks: dict[str, threading.Lock] = {}
_dir_locks_guard = threading.Lock()


def _directory_lock(path: Path) -> threading.Lock:
    key = str(path.resolve())
    with _dir_locks_guard:
        return _dir_locks.setdefault(key, threading.Lock())


def assemble(exp: HeatMemoryExperiment, *, v_only_control: bool = False) -> EvolutionProblem:
    """Closed-loop problem; d(t) enters the v-block only.

    With v_only_control the feedback acts on v alone (B = diag(I, 0)), the
    setting in which w has the exponential-kernel representation.
    """
    geom = exp.geometry
    b_op = build_v_block_control(geom) if v_only_control else build_B_epsilon(geom)
    return EvolutionProblem(
        a_op=build_memory_operator(geom),
        b_op=b_op,
        gain=exp.gain,
        schedule=PsiSchedule(kind=PsiKind.AFFINE, n=exp.n),
        disturbance=exp.disturbance.model_copy(update={"pattern": SpatialPattern.FIRST_COMPONENT}),
        initial_state=np.concatenate([exp.initial_v(), exp.initial_w()]),
        horizon=exp.horizon,
        block_size=geom.n_points,
        label=V_ONLY_LABEL if v_only_control else HEAT_MEMORY_LABEL,
    )


def run_experiment(
    exp: HeatMemoryExperiment,
    options: SimulationOptions | None = None,
    *,
    v_only_control: bool = False,
) -> Trajectory:
    """Assemble and integrate; uncertified configurations run but are tagged."""
    options = (options or SimulationOptions()).model_copy(update={"allow_uncertified": True})
    return simulate(assemble(exp, v_only_control=v_only_control), options)


def reformulation_options(
    exp: HeatMemoryExperiment, options: SimulationOptions | None = None
) -> SimulationOptions:
    """Options for the v-only run behind the memory check; dt_max is capped at REFORMULATION_DT_MAX."""
    options = options or SimulationOptions()
    dt_max = min(options.dt_max or default_dt_max(exp.horizon), REFORMULATION_DT_MAX)
    return options.model_copy(update={"dt_max": dt_max})


def split_state(exp: HeatMemoryExperiment, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = exp.geometry.n_points
    return states[..., :n], states[..., n:]


def v_log10_norms(exp: HeatMemoryExperiment, traj: Trajectory) -> np.ndarray:
    """log10 ||v(t, .)||_2 (discrete L2 on the grid), clamped at the log floor."""
    v, _ = split_state(exp, traj.states)
    norms = np.sqrt(exp.geometry.h * np.sum(v**2, axis=1))
    with np.errstate(divide="ignore"):
        logs = np.log10(norms)
    return np.maximum(logs, LOG_FLOOR)


def verify_memory_reformulation(
    exp: HeatMemoryExperiment,
    traj: Trajectory,
    check_times: list[float],
    tolerance: float = REFORMULATION_TOL,
) -> ReformulationReport:
    """Compare integrated w with e^{-beta t} w0 + eta int_0^t e^{-beta(t-s)} v(s) ds."""
    if traj.label != V_ONLY_LABEL:
        raise PreconditionError(
            f"trajectory '{traj.label}' was not produced with v-only control",
            module=_MODULE, operation="verify_memory_reformulation",
        )
    gaps = np.diff(traj.times)
    if gaps.size == 0 or float(np.max(gaps)) > 1.0 / MIN_SNAPSHOT_DENSITY:
        raise InsufficientSamplesError(
            f"snapshot spacing must not exceed {1.0 / MIN_SNAPSHOT_DENSITY:g}",
            module=_MODULE, operation="verify_memory_reformulation",
        )

    geom = exp.geometry
    v, w = split_state(exp, traj.states)
    w0 = exp.initial_w()
    points: list[ReformulationPoint] = []
    for t_requested in check_times:
        k = int(np.argmin(np.abs(traj.times - t_requested)))
        t_k = float(traj.times[k])
        if k == 0:
            memory = np.zeros_like(w0)
        else:
            s = traj.times[: k + 1]
            kernel = np.exp(-geom.beta * (t_k - s))
            memory = trapezoid(kernel[:, None] * v[: k + 1], s, axis=0)
        reconstructed = np.exp(-geom.beta * t_k) * w0 + geom.eta_mem * memory
        scale = max(float(np.linalg.norm(w[k])), float(np.linalg.norm(reconstructed)))
        discrepancy = 0.0 if scale == 0.0 else float(np.linalg.norm(reconstructed - w[k])) / scale
        points.append(ReformulationPoint(t_requested=t_requested, t_snapshot=t_k, discrepancy=discrepancy))

    report = ReformulationReport(points=points, tolerance=tolerance)
    logger.info("memory_reformulation_checked", max_discrepancy=report.max_discrepancy,
                passed=report.passed)
    return report


def _comparison_grid(horizon: float, comparison_times: list[float] | None) -> np.ndarray:
    if comparison_times is not None:
        return np.asarray(sorted(comparison_times), dtype=float)
    start = min(SWEEP_COMPARISON_START, horizon)
    return np.linspace(start, horizon, SWEEP_COMPARISON_POINTS)


def run_n_sweep(
    base: HeatMemoryExperiment,
    n_values: list[int],
    options: SimulationOptions | None = None,
    comparison_times: list[float] | None = None,
    max_workers: int | None = None,
) -> SweepReport:
    """Simulate psi^n for each n and check log||v|| is nonincreasing in n."""
    if not n_values or any(n < 1 for n in n_values):
        raise PreconditionError(f"n values must be a nonempty list of integers >= 1, got {n_values}",
                                module=_MODULE, operation="run_n_sweep")
    n_sorted = sorted(set(n_values))
    experiments = [base.model_copy(update={"n": n}) for n in n_sorted]
    workers = max_workers or get_settings().max_workers

    with ThreadPoolExecutor(max_workers=workers) as pool:
        trajectories = list(pool.map(lambda e: run_experiment(e, options), experiments))

    grid = _comparison_grid(base.horizon, comparison_times)
    curves: list[SweepCurve] = []
    columns: list[np.ndarray] = []
    for n, exp, traj in zip(n_sorted, experiments, trajectories):
        logs = v_log10_norms(exp, traj)
        curves.append(SweepCurve(n=n, times=traj.times.tolist(), log10_norms=logs.tolist()))
        columns.append(np.interp(grid, traj.times, logs))
    table = np.column_stack(columns)

    violations: list[OrderingViolation] = []
    for i, t in enumerate(grid):
        for j in range(len(n_sorted) - 1):
            excess = table[i, j + 1] - table[i, j]
            if excess > SWEEP_ORDER_TOL:
                violations.append(OrderingViolation(
                    t=float(t), n_low=n_sorted[j], n_high=n_sorted[j + 1], excess=float(excess),
                ))

    if violations:
        logger.warning("sweep_ordering_violations", count=len(violations))
    logger.info("n_sweep_finished", n_values=n_sorted, comparison_points=len(grid))
    return SweepReport(
        n_values=n_sorted,
        comparison_times=grid.tolist(),
        curves=curves,
        comparison=table.tolist(),
        violations=violations,
    )


def _slice_indices(count: int, max_slices: int = FIGURE_MAX_SLICES) -> np.ndarray:
    stride = max(1, int(np.ceil(count / max_slices)))
    indices = np.arange(0, count, stride)
    if indices[-1] != count - 1:
        indices = np.append(indices, count - 1)
    return indices


def _surface_frame(exp: HeatMemoryExperiment, times: np.ndarray, values: np.ndarray, column: str) -> pd.DataFrame:
    """Long format (t, x, value) including the Dirichlet boundary zeros."""
    x = exp.geometry.x_with_boundary
    padded = np.pad(values, ((0, 0), (1, 1)))
    return pd.DataFrame({
        "t": np.repeat(times, x.size),
        "x": np.tile(x, times.size),
        column: padded.reshape(-1),
    })


def emit_figures_data(
    exp: HeatMemoryExperiment,
    traj: Trajectory,
    out_dir: str | Path | None = None,
    html: bool = False,
) -> dict[str, Path]:
    """Write the state surface, control surface and log-norm datasets plus a gnuplot script."""
    target = Path(out_dir or exp.output_dir or ".")
    indices = _slice_indices(traj.times.size)
    times = traj.times[indices]
    v, _ = split_state(exp, traj.states[indices])
    gains = exp.gain * np.array([gain_profile(PsiSchedule(n=exp.n), float(t)) for t in times])
    control = -gains[:, None] * v

    surface = _surface_frame(exp, times, v, "v")
    control_frame = _surface_frame(exp, times, control, "u")
    log_frame = pd.DataFrame({"t": traj.times, "log10_norm_v": v_log10_norms(exp, traj)})

    files = {
        "state_surface": target / "fig1_state_surface.csv",
        "control_surface": target / "fig2_control.csv",
        "log_norm": target / "fig3_log_norm.csv",
        "gnuplot": target / "figures.gp",
    }
    with _directory_lock(target):
        target.mkdir(parents=True, exist_ok=True)
        surface.to_csv(files["state_surface"], index=False, float_format="%.10e")
        control_frame.to_csv(files["control_surface"], index=False, float_format="%.10e")
        log_frame.to_csv(files["log_norm"], index=False, float_format="%.10e")
        files["gnuplot"].write_text(figures.gnuplot_script(), encoding="utf-8")
        if html:
            files.update(figures.write_html_figures(surface, control_frame, log_frame, target))

    logger.info("figures_written", directory=str(target), slices=int(times.size))
    return files
