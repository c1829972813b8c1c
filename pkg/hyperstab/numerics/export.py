"""CSV/JSON writers for trajectories, snapshots, sweeps and reports."""

import json
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel

from hyperstab.models.experiment import HeatMemoryExperiment, SweepReport
from hyperstab.models.trajectory import Trajectory

_FLOAT_FORMAT = "%.10e"


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> Path:
    """Columns t,normX,V,controlMag."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    traj.to_dataframe().to_csv(path, index=False, float_format=_FLOAT_FORMAT)
    return path


def write_state_snapshots(
    exp: HeatMemoryExperiment,
    traj: Trajectory,
    directory: str | Path,
    indices: list[int] | np.ndarray | None = None,
) -> list[Path]:
    """state_<k>.csv with x,v,w columns on the interior grid."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n = exp.geometry.n_points
    if indices is None:
        indices = range(traj.times.size)
    paths = []
    for k in indices:
        frame = pd.DataFrame({
            "x": exp.geometry.x,
            "v": traj.states[k, :n],
            "w": traj.states[k, n:],
        })
        path = directory / f"state_{k}.csv"
        frame.to_csv(path, index=False, float_format=_FLOAT_FORMAT)
        paths.append(path)
    return paths


def sweep_frame(report: SweepReport) -> pd.DataFrame:
    """Long format (t, n, log10_norm_v) on the comparison grid."""
    table = np.asarray(report.comparison)
    times = np.asarray(report.comparison_times)
    return pd.DataFrame({
        "t": np.repeat(times, len(report.n_values)),
        "n": np.tile(report.n_values, times.size),
        "log10_norm_v": table.reshape(-1),
    })


def write_sweep_csv(report: SweepReport, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sweep_frame(report).to_csv(path, index=False, float_format=_FLOAT_FORMAT)
    return path


def write_json(payload: BaseModel | dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else payload
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return path
