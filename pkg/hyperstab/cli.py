"""Command-line front end.

  hyperstab <command> [--config PATH] [--out DIR] [--set key=value ...]
            [--seed N] [--dt-max DT] [--scheme be|cn] [--html] [--log-level LEVEL]

Exit status: 0 success, 1 audit failure (bound, ordering or oracle check),
2 usage/config error or refused certification.
"""

import argparse
import json
import sys
import types
import typing
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from hyperstab.config.settings import get_settings
from hyperstab.errors import (
    CertificationError, ConfigError, DimensionError, DomainError, HyperstabError,
    InsufficientSamplesError, PreconditionError,
)
from hyperstab.models.problem import EvolutionProblem
from hyperstab.models.run_config import Command, ProblemKind, RunConfig, RunSettings
from hyperstab.numerics import figures
from hyperstab.numerics.certify import audit_trajectory, fit_rate
from hyperstab.numerics.export import (
    sweep_frame, write_json, write_state_snapshots, write_sweep_csv, write_trajectory_csv,
)
from hyperstab.numerics.heatmem import (
    assemble, emit_figures_data, reformulation_options, run_experiment, run_n_sweep,
    verify_memory_reformulation,
)
from hyperstab.numerics.operators import dump_operator, make_operator
from hyperstab.numerics.solver import gain_condition, simulate
from hyperstab.numerics.timescale import lemma1_check, log_tau_grid
from hyperstab.utils.logger import get_logger, setup_logging
from hyperstab.utils.run_storage import SUMMARY_NAME, RunStorage

logger = get_logger(__name__)

_MODULE = "cli"
_USAGE_ERRORS = (ConfigError, PreconditionError, CertificationError, DimensionError, DomainError)
REFORMULATION_CHECK_TIMES = (0.5, 1.0, 2.0)


# ----------------------------------------------------------------------
# Parsing and config resolution
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperstab",
        description="Closed-loop simulation and decay/ISS certificate checking "
                    "for hyperexponential time-varying feedback.",
    )
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--config", help="JSON config (or a previous run's manifest.json)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="dotted-key override, repeatable")
    parser.add_argument("--seed", type=int, help="disturbance seed")
    parser.add_argument("--dt-max", type=float, help="maximum time step")
    parser.add_argument("--scheme", choices=["be", "cn"])
    parser.add_argument("--html", action="store_true", help="also render Plotly HTML figures")
    parser.add_argument("--log-level", default=None)
    return parser


def _nested_model(annotation) -> type[BaseModel] | None:
    if isinstance(annotation, type) and issubclass(annotation, BaseModel):
        return annotation
    if isinstance(annotation, types.UnionType) or typing.get_origin(annotation) is typing.Union:
        models = [a for a in typing.get_args(annotation) if isinstance(a, type) and issubclass(a, BaseModel)]
        return models[0] if len(models) == 1 else None
    return None


def valid_keys(model: type[BaseModel], prefix: str = "") -> list[str]:
    """Dotted leaf keys accepted by --set."""
    keys: list[str] = []
    for name, field in model.model_fields.items():
        nested = _nested_model(field.annotation)
        if nested is not None:
            keys.extend(valid_keys(nested, f"{prefix}{name}."))
        else:
            keys.append(f"{prefix}{name}")
    return keys


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply key=value overrides to a nested config dict (unknown keys rejected)."""
    allowed = set(valid_keys(RunSettings))
    for item in overrides:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"override '{item}' is not of the form key=value",
                              module=_MODULE, operation="dispatch")
        if key not in allowed:
            raise ConfigError(
                f"unknown override key '{key}'; valid keys: {', '.join(sorted(allowed))}",
                module=_MODULE, operation="dispatch",
            )
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]
        node[parts[-1]] = _parse_value(raw)
    return data


def resolve_settings(run: RunConfig) -> RunSettings:
    """Config file + overrides + flags -> validated settings."""
    data: dict = {}
    if run.config_path:
        path = Path(run.config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}", module=_MODULE, operation="dispatch")
        try:
            data = RunStorage.load_config(path)
        except (ValueError, UnicodeDecodeError) as e:
            raise ConfigError(f"cannot parse config {path}: {e}", module=_MODULE, operation="dispatch") from e

    base = RunSettings.model_validate(data).model_dump(mode="json")
    flags: list[str] = []
    if run.seed is not None:
        flags += [f"heat_memory.disturbance.seed={run.seed}", f"scalar.disturbance.seed={run.seed}"]
    if run.dt_max is not None:
        flags.append(f"solver.dt_max={run.dt_max}")
    if run.scheme is not None:
        flags.append(f'solver.scheme="{run.scheme}"')
    if run.html:
        flags.append("html=true")
    resolved = apply_overrides(base, list(run.overrides) + flags)
    return RunSettings.model_validate(resolved)


# ----------------------------------------------------------------------
# Problem construction
# ----------------------------------------------------------------------

def build_problem(settings: RunSettings) -> EvolutionProblem:
    if settings.problem == ProblemKind.HEAT_MEMORY:
        return assemble(settings.heat_memory)
    scalar = settings.scalar
    return EvolutionProblem(
        a_op=make_operator([[scalar.a]], label="A"),
        b_op=make_operator([[scalar.b]], label="B"),
        gain=scalar.gain,
        schedule=scalar.schedule,
        disturbance=scalar.disturbance,
        initial_state=[scalar.x0],
        horizon=scalar.horizon,
        label="scalar",
    )


def _run(settings: RunSettings, problem: EvolutionProblem):
    options = settings.solver.model_copy(update={"allow_uncertified": True})
    return simulate(problem, options)


# ----------------------------------------------------------------------
# Command handlers: each returns (status, summary, output files, certified)
# ----------------------------------------------------------------------

def _lemma_check(settings: RunSettings, out: Path):
    grid = log_tau_grid(settings.lemma.tau_min, settings.lemma.tau_max, settings.lemma.tau_points)
    rows, pairs, rejected = [], [], []
    for a, alpha in settings.lemma.pairs:
        try:
            report = lemma1_check(a, alpha, grid)
        except PreconditionError as e:
            rejected.append({"a": a, "alpha": alpha, "reason": e.detail})
            continue
        pairs.append({"a": a, "alpha": alpha, "r": report.r, "passed": report.passed,
                      "violations": len(report.violations)})
        rows += [{"a": a, "alpha": alpha, **p.model_dump()} for p in report.points]
    margins = out / "lemma_margins.csv"
    pd.DataFrame(rows, columns=["a", "alpha", "tau", "left", "right", "margin", "passed"]).to_csv(
        margins, index=False, float_format="%.12e")
    status = 0 if all(p["passed"] for p in pairs) else 1
    return status, {"pairs": pairs, "rejected": rejected}, [margins], None


def _simulate(settings: RunSettings, out: Path):
    problem = build_problem(settings)
    traj = _run(settings, problem)
    files = [write_trajectory_csv(traj, out / "trajectory.csv"),
             dump_operator(problem.a_op, out / "operator_A.mtx"),
             dump_operator(problem.b_op, out / "operator_B.mtx")]
    if settings.write_states and settings.problem == ProblemKind.HEAT_MEMORY:
        files += write_state_snapshots(settings.heat_memory, traj, out / "states")
    summary = {"certified": traj.certified, "steps": traj.steps, "rejected_steps": traj.rejected_steps,
               "dt_max": traj.dt_max, "final_norm": float(traj.norms[-1])}
    return 0, summary, files, traj.certified


def _certify(settings: RunSettings, out: Path):
    problem = build_problem(settings)
    traj = _run(settings, problem)
    certificate = audit_trajectory(traj, problem)
    path = write_json(certificate, out / "certificate.json")
    return (0 if certificate.passed else 1), {"certificate": certificate.model_dump(
        mode="json", exclude={"times", "bounds", "residuals"})}, [path], True


def _rate_fit(settings: RunSettings, out: Path):
    problem = build_problem(settings)
    traj = _run(settings, problem)
    fit = fit_rate(traj, settings.fit.window)
    path = write_json(fit, out / "rate_fit.json")
    return 0, {"rate_fit": fit.model_dump(mode="json")}, [path], traj.certified


def _require_heat_memory(settings: RunSettings, operation: str) -> None:
    if settings.problem != ProblemKind.HEAT_MEMORY:
        raise ConfigError(f"requires problem = heat_memory, got {settings.problem.value}",
                          module=_MODULE, operation=operation)


def _heat_memory(settings: RunSettings, out: Path):
    _require_heat_memory(settings, "heat-memory")
    exp = settings.heat_memory
    traj = run_experiment(exp, settings.solver)
    files = [write_trajectory_csv(traj, out / "trajectory.csv")]
    files += list(emit_figures_data(exp, traj, out, html=settings.html).values())
    if settings.write_states:
        files += write_state_snapshots(exp, traj, out / "states")

    status = 0
    summary: dict = {"certified": traj.certified, "certificate": None, "rate_fit": None,
                     "reformulation": None}
    if traj.certified:
        certificate = audit_trajectory(traj, assemble(exp))
        files.append(write_json(certificate, out / "certificate.json"))
        summary["certificate"] = certificate.model_dump(mode="json", exclude={"times", "bounds", "residuals"})
        status = max(status, 0 if certificate.passed else 1)
        try:
            summary["rate_fit"] = fit_rate(traj, settings.fit.window).model_dump(mode="json")
        except InsufficientSamplesError as e:
            summary["rate_fit"] = {"error": str(e)}

    if settings.check_reformulation:
        variant = run_experiment(exp, reformulation_options(exp, settings.solver), v_only_control=True)
        check_times = [t for t in REFORMULATION_CHECK_TIMES if t <= exp.horizon]
        report = verify_memory_reformulation(exp, variant, check_times)
        summary["reformulation"] = report.model_dump(mode="json")
        status = max(status, 0 if report.passed else 1)
    return status, summary, files, traj.certified


def _sweep_n(settings: RunSettings, out: Path):
    _require_heat_memory(settings, "sweep-n")
    exp = settings.heat_memory
    start = min(settings.sweep.comparison_start, exp.horizon)
    grid = np.linspace(start, exp.horizon, settings.sweep.comparison_points).tolist()
    report = run_n_sweep(exp, settings.sweep.n_values, settings.solver, comparison_times=grid)
    files = [write_sweep_csv(report, out / "fig4_sweep.csv")]
    script = out / "fig4_sweep.gp"
    script.write_text(figures.sweep_gnuplot_script(report.n_values), encoding="utf-8")
    files.append(script)
    if settings.html:
        files.append(figures.write_sweep_html(sweep_frame(report), out))
    summary = {"sweep": report.model_dump(mode="json", exclude={"curves"}), "ordered": report.ordered}
    return (0 if report.ordered else 1), summary, files, exp.certified


_HANDLERS = {
    Command.LEMMA_CHECK: _lemma_check,
    Command.SIMULATE: _simulate,
    Command.CERTIFY: _certify,
    Command.RATE_FIT: _rate_fit,
    Command.HEAT_MEMORY: _heat_memory,
    Command.SWEEP_N: _sweep_n,
}


def dispatch(run: RunConfig) -> int:
    """Run one command; every numeric result lands in the output directory.

    summary.json and manifest.json are written even when resolution or the
    command fails; a config that never resolved is recorded as {}.
    """
    out = Path(run.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    resolved: dict = {}
    files: list[Path] = []
    certified = None
    status = 2
    try:
        settings = resolve_settings(run)
        resolved = settings.model_dump(mode="json")
        if run.command != Command.LEMMA_CHECK:
            certified = gain_condition(build_problem(settings)).satisfied
        status, summary, files, certified = _HANDLERS[run.command](settings, out)
        summary_path = write_json({"command": run.command.value, "exit_status": status, **summary},
                                  out / SUMMARY_NAME)
        files = [*files, summary_path]
    except (HyperstabError, ValidationError) as e:
        status = 1 if isinstance(e, HyperstabError) and not isinstance(e, _USAGE_ERRORS) else 2
        write_json({"command": run.command.value, "exit_status": status, "error": str(e)}, out / SUMMARY_NAME)
        raise
    finally:
        RunStorage.write_manifest(
            out, run.command.value, resolved, RunStorage.content_hash(resolved), status,
            [str(Path(f).relative_to(out)) for f in files], certified,
        )
    logger.info("command_finished", command=run.command.value, status=status, out=str(out))
    return status


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    app = get_settings()
    setup_logging(args.log_level or app.log_level)
    run = RunConfig(
        command=Command(args.command),
        config_path=args.config,
        output_dir=args.out or str(Path(app.output_dir) / args.command),
        overrides=args.overrides,
        seed=args.seed,
        dt_max=args.dt_max,
        scheme=args.scheme,
        html=args.html,
    )
    try:
        return dispatch(run)
    except ValidationError as e:
        print(f"error: {_MODULE}.dispatch: invalid configuration ({run.config_path or 'defaults'}): {e}", file=sys.stderr)
        return 2
    except HyperstabError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2 if isinstance(e, _USAGE_ERRORS) else 1


if __name__ == "__main__":
    raise SystemExit(main())
