from __future__ import annotations

import logging
import sys
from contextlib import contextmanager
from dataclasses import asdict, replace
from pathlib import Path
from typing import Callable, Iterator, List, Optional, TypeVar

import typer

try:  # newer typer vendors click and raises its own exception classes
    from typer import _click as click
except ImportError:  # pragma: no cover
    import click

from eigenfactors.backend import build_problem, centered_hessian_error_probe, optimize
from eigenfactors.checks import CheckConfig, run_accuracy_sweep, run_all, run_sweep
from eigenfactors.config import Settings
from eigenfactors.errors import (
    ConfigError,
    DegeneratePlaneError,
    DomainError,
    FormatError,
    InvalidArgumentError,
    MetricUndefinedError,
    NotPositiveDefiniteError,
    OptimizationFailedError,
)
from eigenfactors.evaluate import evaluate_trajectory
from eigenfactors.lie.se3 import generators
from eigenfactors.models import RunManifest
from eigenfactors.report import ReportWriter
from eigenfactors.storage import (
    RunStore,
    accuracy_csv,
    bench_csv,
    evaluation_csv,
    format_trajectory,
    load_dataset,
    load_trajectory,
    save_dataset,
    save_trajectory,
    trace_csv,
)
from eigenfactors.synth import generate as generate_dataset
from eigenfactors.utils import utc_now_iso, write_text

logger = logging.getLogger("eigenfactors")

app = typer.Typer(no_args_is_help=True, add_completion=False)

T = TypeVar("T")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4

STATUS_EXIT = {
    "converged": EXIT_OK,
    "max_iters": EXIT_NOT_CONVERGED,
    "stalled": EXIT_NOT_CONVERGED,
    "failed": EXIT_NUMERICAL,
}

ConfigOption = typer.Option(None, "--config", help="YAML file overriding the packaged defaults")


@app.callback()
def _main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
) -> None:
    level = logging.DEBUG if verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")


def _fail(code: int, message: str) -> typer.Exit:
    typer.echo(f"error: {message}", err=True)
    return typer.Exit(code=code)


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Translate library errors into the stable exit codes."""
    try:
        yield
    except FileNotFoundError as exc:
        raise _fail(EXIT_IO, f"file not found: {exc.filename or exc}")
    except (FormatError, OSError) as exc:
        raise _fail(EXIT_IO, str(exc))
    except (ConfigError, InvalidArgumentError) as exc:
        raise _fail(EXIT_USAGE, str(exc))
    except (
        DegeneratePlaneError,
        DomainError,
        MetricUndefinedError,
        NotPositiveDefiniteError,
        OptimizationFailedError,
    ) as exc:
        raise _fail(EXIT_NUMERICAL, str(exc))


def _settings(config: Optional[Path]) -> Settings:
    return Settings.load(config)


def _parse_values(values: str, cast: Callable[[str], T] = int) -> List[T]:
    try:
        parsed = [cast(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgumentError(f"--values must be comma-separated numbers, got {values!r}") from None
    if not parsed:
        raise InvalidArgumentError("--values needs at least one entry")
    return parsed


def _overrides(**kwargs: object) -> dict:
    return {k: v for k, v in kwargs.items() if v is not None}


def _run_id() -> str:
    return utc_now_iso().replace(":", "").replace("-", "").split(".")[0]


@app.command()
def generate(
    out: Path = typer.Option(..., "--out", help="Dataset file to write"),
    n_poses: Optional[int] = typer.Option(None, "--poses", help="Number of poses H"),
    n_planes: Optional[int] = typer.Option(None, "--planes", help="Number of planes M"),
    points: Optional[int] = typer.Option(None, "--points", help="Points per plane per pose N"),
    sigma: Optional[float] = typer.Option(None, "--sigma", help="Point-to-plane noise [m]"),
    perturb_trans: Optional[float] = typer.Option(None, "--perturb-trans", help="Perturbation [m]"),
    perturb_rot: Optional[float] = typer.Option(None, "--perturb-rot", help="Perturbation [deg]"),
    seed: Optional[int] = typer.Option(None, "--seed", help="World seed"),
    config: Optional[Path] = ConfigOption,
) -> None:
    """Generate a synthetic plane world with a perturbed initial trajectory."""
    with _exit_codes():
        settings = _settings(config)
        spec = replace(
            settings.world,
            **_overrides(
                n_poses=n_poses,
                n_planes=n_planes,
                points_per_plane=points,
                point_noise_sigma=sigma,
                perturb_trans=perturb_trans,
                perturb_rot=perturb_rot,
                seed=seed,
            ),
        )
        dataset = generate_dataset(spec)
        save_dataset(out, dataset)
    typer.echo(f"dataset: {out}")
    typer.echo(f"poses: {spec.n_poses} planes: {spec.n_planes} points/plane: {spec.points_per_plane}")


@app.command("optimize")
def optimize_cmd(
    in_path: Path = typer.Option(..., "--in", help="Dataset file"),
    out: Path = typer.Option(..., "--out", help="Trajectory file to write"),
    trace: Optional[Path] = typer.Option(None, "--trace", help="Trace CSV (default: <out>.trace.csv)"),
    mode: Optional[str] = typer.Option(None, "--mode", help="centered|plain"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Relative cost decrease tolerance"),
    max_iters: Optional[int] = typer.Option(None, "--max-iters", help="Iteration limit"),
    gauge: Optional[str] = typer.Option(None, "--gauge", help="reanchor|fixed"),
    config: Optional[Path] = ConfigOption,
) -> None:
    """Refine the dataset's initial trajectory."""
    with _exit_codes():
        settings = _settings(config)
        cfg = replace(
            settings.optimizer,
            **_overrides(mode=mode, cost_tolerance=tol, max_iters=max_iters, gauge=gauge),
        )
        dataset = load_dataset(in_path)
        report = optimize(build_problem(dataset, config=cfg))
        logger.info("%s: %s after %d iterations", in_path, report.status, report.iterations)
        trace_path = trace or out.with_name(out.name + ".trace.csv")
        save_trajectory(out, report.trajectory)
        write_text(trace_path, trace_csv(report.trace))
    typer.echo(f"status: {report.status}")
    typer.echo(f"iterations: {report.iterations}")
    typer.echo(f"cost: {report.cost!r}")
    code = STATUS_EXIT[report.status]
    if code != EXIT_OK:
        raise _fail(code, f"optimization ended with status '{report.status}'")


@app.command()
def evaluate(
    ref: Path = typer.Option(..., "--ref", help="Reference trajectory file"),
    est: Path = typer.Option(..., "--est", help="Estimated trajectory file"),
    dataset_path: Path = typer.Option(..., "--dataset", help="Dataset whose clouds form the map"),
    radius: Optional[float] = typer.Option(None, "--radius", help="Neighbourhood radius [m]"),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV file (default: stdout)"),
    config: Optional[Path] = ConfigOption,
) -> None:
    """Relative pose error and map quality of an estimated trajectory."""
    with _exit_codes():
        settings = _settings(config)
        reference = load_trajectory(ref)
        estimate = load_trajectory(est)
        dataset = load_dataset(dataset_path)
        row = evaluate_trajectory(
            dataset,
            reference,
            estimate,
            radius if radius is not None else settings.evaluation.radius,
            settings.evaluation.min_neighbors,
        )
        content = evaluation_csv(row)
        if out is not None:
            write_text(out, content)
    if out is None:
        typer.echo(content, nl=False)


@app.command("check-derivatives")
def check_derivatives(
    seed: Optional[int] = typer.Option(None, "--seed", help="First trial seed"),
    trials: Optional[int] = typer.Option(None, "--trials", help="Random states per check"),
    out: Optional[Path] = typer.Option(None, "--out", help="Also write the markdown report here"),
    corrupt_generator: Optional[int] = typer.Option(
        None, "--corrupt-generator", hidden=True, help="Scale generator i (1..6) in the analytic path"
    ),
    config: Optional[Path] = ConfigOption,
) -> None:
    """Compare analytic gradients and Hessian blocks with finite differences."""
    with _exit_codes():
        settings = _settings(config)
        check_cfg: CheckConfig = replace(settings.checks, **_overrides(seed=seed, trials=trials))
        gens = None
        if corrupt_generator is not None:
            if not 1 <= corrupt_generator <= 6:
                raise InvalidArgumentError("--corrupt-generator must be in 1..6")
            gens = generators()
            gens[corrupt_generator - 1] *= 1.5
        checks = run_all(check_cfg, gens)
        writer = ReportWriter()
        markdown = writer.checks_to_markdown(checks)
        if out is not None:
            writer.write(out, markdown)
    typer.echo(markdown)
    if not all(c.passed for c in checks):
        raise _fail(EXIT_NUMERICAL, "derivative check above threshold")


@app.command()
def bench(
    sweep: str = typer.Option(
        "poses", "--sweep", help="poses|points|planes; with --metric rpe also sigma|perturb-trans|perturb-rot"
    ),
    values: str = typer.Option("16,64,256", "--values", help="Comma-separated sweep values"),
    metric: str = typer.Option("time", "--metric", help="time|rpe"),
    repeats: int = typer.Option(3, "--repeats", help="Runs per value (median reported)"),
    iterations: int = typer.Option(3, "--iterations", help="Optimizer iterations per run"),
    trials: int = typer.Option(3, "--trials", help="Worlds averaged per value (--metric rpe)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="World seed"),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV file (default: stdout)"),
    config: Optional[Path] = ConfigOption,
) -> None:
    """Sweep one world dimension, timing iterations or measuring trajectory error."""
    with _exit_codes():
        settings = _settings(config)
        base = replace(settings.world, **_overrides(seed=seed))
        if metric == "time":
            rows = run_sweep(sweep, _parse_values(values), base, settings.optimizer, repeats, iterations)
            content = bench_csv(rows)
        elif metric == "rpe":
            points = run_accuracy_sweep(sweep, _parse_values(values, float), base, settings.optimizer, trials)
            content = accuracy_csv(points)
        else:
            raise InvalidArgumentError(f"--metric must be time or rpe, got {metric!r}")
        if out is not None:
            write_text(out, content)
    if out is None:
        typer.echo(content, nl=False)


@app.command("probe-hessian")
def probe_hessian(
    values: str = typer.Option("2,5,10,20", "--values", help="Trajectory lengths to probe"),
    trials: int = typer.Option(10, "--trials", help="Datasets averaged per length"),
    seed: Optional[int] = typer.Option(None, "--seed", help="First dataset seed"),
    config: Optional[Path] = ConfigOption,
) -> None:
    """Relative gap between the exact centered Hessian and its block-diagonal form."""
    with _exit_codes():
        settings = _settings(config)
        spec = replace(settings.world, **_overrides(seed=seed))
        rows = centered_hessian_error_probe(spec, _parse_values(values), trials)
    typer.echo("n_poses,relative_difference")
    for H, value in rows:
        typer.echo(f"{H},{value!r}")


@app.command()
def pipeline(
    out_dir: Path = typer.Option(..., "--out-dir", help="Directory for all run artifacts"),
    seed: Optional[int] = typer.Option(None, "--seed", help="World seed"),
    sigma: Optional[float] = typer.Option(None, "--sigma", help="Point-to-plane noise [m]"),
    mode: Optional[str] = typer.Option(None, "--mode", help="centered|plain"),
    config: Optional[Path] = ConfigOption,
) -> None:
    """Generate, optimize and evaluate in one run."""
    with _exit_codes():
        settings = _settings(config)
        spec = replace(settings.world, **_overrides(seed=seed, point_noise_sigma=sigma))
        cfg = replace(settings.optimizer, **_overrides(mode=mode))
        store = RunStore(out_dir)
        manifest = RunManifest(
            run_id=_run_id(),
            out_dir=str(out_dir),
            created_at=utc_now_iso(),
            command="pipeline",
            spec=asdict(spec),
            config=asdict(cfg),
            status="running",
        )
        store.save_manifest(manifest)
        logger.info("run %s started in %s", manifest.run_id, out_dir)

        dataset = generate_dataset(spec)
        save_dataset(store.base_dir / "dataset.json", dataset)
        report = optimize(build_problem(dataset, config=cfg))
        radius, min_nb = settings.evaluation.radius, settings.evaluation.min_neighbors
        initial_row = evaluate_trajectory(dataset, dataset.gt_trajectory, dataset.initial_trajectory, radius, min_nb)
        final_row = evaluate_trajectory(dataset, dataset.gt_trajectory, report.trajectory, radius, min_nb)

        artifacts = {
            "gt.txt": format_trajectory(dataset.gt_trajectory),
            "initial.txt": format_trajectory(dataset.initial_trajectory),
            "optimized.txt": format_trajectory(report.trajectory),
            "trace.csv": trace_csv(report.trace),
            "evaluation_initial.csv": evaluation_csv(initial_row),
            "evaluation_optimized.csv": evaluation_csv(final_row),
            "report.md": ReportWriter().run_to_markdown(report, initial_row, final_row),
        }
        for name, content in artifacts.items():
            store.save_artifact(name, content)
        manifest.status = report.status
        manifest.artifacts = ["dataset.json", *artifacts]
        manifest.meta = {
            "iterations": report.iterations,
            "final_cost": report.cost,
            "initial_cost": report.trace[0].cost,
        }
        store.save_manifest(manifest)
        logger.info("run %s finished: %s", manifest.run_id, report.status)
    typer.echo(f"run_id: {manifest.run_id}")
    typer.echo(f"status: {report.status}")
    typer.echo(f"rpe_trans: {initial_row.rpe_trans:.4e} -> {final_row.rpe_trans:.4e}")
    typer.echo(f"rpe_rot: {initial_row.rpe_rot:.4e} -> {final_row.rpe_rot:.4e}")
    code = STATUS_EXIT[report.status]
    if code != EXIT_OK:
        raise _fail(code, f"optimization ended with status '{report.status}'")


def main() -> None:
    """Console entry point; click usage errors exit with code 1."""
    try:
        code = app(standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    sys.exit(code or EXIT_OK)


if __name__ == "__main__":
    main()
