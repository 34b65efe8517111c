"""Command-line entry points: benchmarks, data validation, live sessions.

Exit codes: 0 success, 2 usage or configuration error, 1 runtime error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .bench import TaskFamilySpec, emit_report, run_benchmark
from .box import Box
from .ensemble import Schedule
from .gp import FitConfig
from .minimize import OptimizerConfig
from .session import (
    InvalidObservationError,
    OutOfBoxError,
    Session,
    SessionConfig,
    StopRule,
)
from .tasks import load_task
from .transforms import source_normalize


@click.group()
def main():
    """Transfer-learning Bayesian optimization for machine parameters."""


def _fail_usage(message: str):
    raise click.UsageError(message)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--trials", type=int, default=None, help="Override the config trial count.")
@click.option("--iterations", type=int, default=None, help="Override the config iterations.")
def bench(config_path: Path, out_dir: Path, seed, trials, iterations):
    """Run the synthetic strategy comparison and write CSV/JSON reports."""
    if not config_path.is_file():
        _fail_usage(f"config file not found: {config_path}")
    try:
        doc = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        _fail_usage(f"config is not valid JSON: {exc}")
    try:
        family = TaskFamilySpec.from_dict(doc.get("family", {}))
        kwargs = dict(
            strategies=tuple(doc.get("strategies", ["random", "vanilla_bo", "ours"])),
            iterations=iterations or int(doc.get("iterations", 10)),
            trials=trials or int(doc.get("trials", 10)),
            seed=seed if seed is not None else int(doc.get("seed", 0)),
            threshold_fraction=float(doc.get("threshold_fraction", 0.05)),
            kernel_family=doc.get("kernel_family", "se+matern25"),
            weight_samples=int(doc.get("weight_samples", 100)),
        )
        if "fit" in doc:
            kwargs["fit"] = FitConfig(
                **{k: tuple(v) if isinstance(v, list) else v for k, v in doc["fit"].items()}
            )
        if "optimizer" in doc:
            kwargs["optimizer"] = OptimizerConfig.from_dict(doc["optimizer"])
    except (KeyError, TypeError, ValueError) as exc:
        _fail_usage(f"invalid benchmark config: {exc}")
    try:
        report = run_benchmark(family, **kwargs)
    except ValueError as exc:
        _fail_usage(str(exc))
    csv_path, json_path = emit_report(report, out_dir)
    click.echo(f"wrote {csv_path}")
    click.echo(f"wrote {json_path}")
    for name in report.strategies:
        reached = report.trials_reaching_threshold(name)
        mean_final = report.curve_stats(name)[0][-1]
        click.echo(
            f"{name}: final mean best {mean_final:.6g}, "
            f"{reached}/{report.trials} trials within threshold {report.threshold:.6g}"
        )


@main.group()
def data():
    """Task data utilities."""


@data.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path(path_type=Path))
def validate(paths):
    """Parse task files and preview their normalization."""
    for path in paths:
        try:
            task = load_task(path)
        except (ValueError, FileNotFoundError, OSError) as exc:
            _fail_usage(str(exc))
        click.echo(f"{path}: task_id={task.task_id} n={task.n_dims} N={task.n_points}")
        click.echo(
            f"  y range [{task.outputs.min():.6g}, {task.outputs.max():.6g}]"
        )
        if task.n_points >= 2:
            _, t = source_normalize(task)
            click.echo(f"  optimum x^ = {np.array2string(t.input_shift, precision=6)}")
            click.echo(f"  range dx  = {np.array2string(t.input_scale, precision=6)}")
            click.echo(f"  mean mu   = {t.output_mean:.6g}")
            click.echo(f"  std sigma = {t.output_std:.6g}")
        else:
            click.echo("  (single observation; no normalization preview)")


def _parse_box(box_json: str) -> Box:
    try:
        doc = json.loads(box_json)
        return Box.from_dict(doc)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        _fail_usage(f"invalid --box: {exc}")


def _print_suggestion(x, names, box, suggested_start):
    kind = "start point" if suggested_start else "suggestion"
    click.echo(f"next {kind}:")
    for name, value, lo, hi in zip(names, x, box.x_min, box.x_max):
        click.echo(f"  {name} = {value:.6g}   (box [{lo:g}, {hi:g}])")


def _read_observation(session, x_suggested):
    """One line of operator input; returns (x, y, failure) or None to stop."""
    line = click.prompt(
        "measured y ('fail' for cut interruption, 'at x1,..,xn <y|fail>', 'stop')",
        type=str,
    ).strip()
    if line.lower() == "stop":
        return None
    x = x_suggested
    if line.lower().startswith("at "):
        try:
            _, coords, value = line.split(None, 2)
            x = np.array([float(v) for v in coords.split(",")])
        except ValueError:
            click.echo("could not parse override; expected: at 1.0,2.0 0.35")
            return _read_observation(session, x_suggested)
        line = value.strip()
    if line.lower() == "fail":
        return x, None, True
    try:
        return x, float(line), False
    except ValueError:
        click.echo("could not parse y; enter a number, 'fail' or 'stop'")
        return _read_observation(session, x_suggested)


@main.command("session")
@click.option("--sources", "source_paths", multiple=True, required=True,
              type=click.Path(path_type=Path))
@click.option("--box", "box_json", required=True, help='e.g. {"x_min": [0], "x_max": [10]}')
@click.option("--seed", type=int, default=0)
@click.option("--kernel", "kernel_family", default="se+matern25")
@click.option("--max-iterations", type=int, default=20)
@click.option("--threshold", type=float, default=None, help="Stop when best y <= threshold.")
@click.option("--serve", is_flag=True, help="Launch the HTTP service instead.")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("tlbo-sessions"))
@click.option("--static-dir", type=click.Path(path_type=Path), default=None,
              help="Directory with the built web console.")
def session_run(source_paths, box_json, seed, kernel_family, max_iterations,
                threshold, serve, host, port, data_dir, static_dir):
    """Interactive terminal ask/tell loop over stored source tasks."""
    if serve:
        import uvicorn

        from .service import create_app

        app = create_app(data_dir, static_dir=static_dir)
        uvicorn.run(app, host=host, port=port)
        return
    box = _parse_box(box_json)
    try:
        sources = [load_task(p) for p in source_paths]
    except (ValueError, FileNotFoundError, OSError) as exc:
        _fail_usage(str(exc))
    config = SessionConfig(
        box=box,
        kernel_family=kernel_family,
        seed=seed,
        stop=StopRule(max_iterations=max_iterations, quality_threshold=threshold),
    )
    try:
        session = Session.create(sources, config)
    except ValueError as exc:
        _fail_usage(str(exc))
    names = [f"x{i + 1}" for i in range(box.n_dims)]
    click.echo(f"session over {len(sources)} source task(s); box dimension {box.n_dims}")
    while session.phase != "stopped":
        if session.phase in ("await_init_1", "await_init_2"):
            x = session.suggest_start()
            _print_suggestion(x, names, box, suggested_start=True)
        else:
            x, diag = session.ask()
            _print_suggestion(x, names, box, suggested_start=False)
            click.echo(
                f"  weights={np.array2string(np.asarray(diag['weights']), precision=3)}"
            )
        parsed = _read_observation(session, x)
        if parsed is None:
            break
        x_obs, y, failure = parsed
        try:
            session.tell(x_obs, y, failure=failure)
        except OutOfBoxError as exc:
            click.echo(f"rejected: {exc}")
            continue
        except InvalidObservationError as exc:
            click.echo(f"rejected: {exc}")
            continue
        record = session.history[-1]
        best = session.best_so_far()
        click.echo(
            f"recorded y={record['y']:.6g}{' (failure penalty)' if record['failure'] else ''}"
            f"; best so far {best[1]:.6g}; {session.n_observations} observation(s)"
        )
    if session.phase == "stopped":
        click.echo("stop rule satisfied")
    best = session.best_so_far()
    if best is not None:
        click.echo(f"best: y={best[1]:.6g} at {np.array2string(best[0], precision=6)}")


def run():
    try:
        main(standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except Exception as exc:  # runtime failure
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    run()
