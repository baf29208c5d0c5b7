import logging
import sys
from functools import wraps
from typing import Optional

import click

from .config import Config, build_run_config, parse_grid, parse_seeds
from .exceptions import ConfigError, ExperientialError
from .harness import compute_stats, export_model, rank_seeds, run_experiment, run_phase1, run_sweep

logger = logging.getLogger(__name__)

RUN_OPTIONS = ("agent", "games", "seed", "cs", "lm", "sr", "cu", "ea", "sc", "ss", "tu", "tc",
               "frame_cap", "run_id", "window", "render", "load_model", "save_model", "log", "trace", "event_log")


def run_options(f):
    """Hyper-parameter and run flags; every flag left out keeps the config file value"""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="key=value config file"),
        click.option("--agent", type=click.Choice(["automated", "random", "model"])),
        click.option("--games", type=int),
        click.option("--seed", type=int, help="Master seed; omit for an uncontrolled seed"),
        click.option("--cs", type=int, help="Context size"),
        click.option("--lm", type=int, help="Learning mode: 0 none, 1 positive, 2 both"),
        click.option("--sr/--no-sr", default=None, help="Feedback flags in the state"),
        click.option("--cu/--no-cu", default=None, help="Score by U*C instead of U"),
        click.option("--ea/--no-ea", default=None, help="One-hot action encoding"),
        click.option("--sc", type=int, help="Minimum key experience count"),
        click.option("--ss", type=float, help="Minimum key similarity"),
        click.option("--tu", type=str, help="Minimum transition utility, or None"),
        click.option("--tc", type=int, help="Minimum transition count"),
        click.option("--frame-cap", type=int),
        click.option("--run-id", type=str),
        click.option("--window", type=int, help="Sliding window in games"),
        click.option("--render/--no-render", default=None, help="Log every frame as text at debug level"),
        click.option("--load-model", type=click.Path(dir_okay=False)),
        click.option("--save-model", type=click.Path(dir_okay=False)),
        click.option("--log", type=click.Path(dir_okay=False), help="Game log (JSON lines)"),
        click.option("--trace", type=click.Path(dir_okay=False), help="Decision traces (JSON lines)"),
        click.option("--event-log", type=click.Path(dir_okay=False), help="Recorded transitions (JSON lines)"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def handle_errors(f):
    """Usage errors exit 2, other failures are logged and exit 1"""
    @wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ConfigError as e:
            raise click.UsageError(str(e))
        except (ExperientialError, OSError) as e:
            logger.error(f"{f.__name__} failed: {e}")
            raise click.ClickException(str(e))
    return wrapper


def make_config(config_path: Optional[str], kwargs):
    return build_run_config(config_path, {key: kwargs.get(key) for key in RUN_OPTIONS})


@click.command()
@run_options
@click.option("--summary", type=click.Path(dir_okay=False), help="Write the run summary here")
@handle_errors
def run(config_path, summary, **kwargs):
    """Play N games against one persistent model"""
    config = make_config(config_path, kwargs)
    result, _ = run_experiment(config)
    text = result.model_dump_json(indent=2)
    if summary:
        with open(summary, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    click.echo(text)


@click.command()
@run_options
@click.option("--grid", "grid_items", multiple=True, help="Axis as key=v1,v2 (repeatable)")
@click.option("--grid-file", type=click.Path(dir_okay=False), help="key=v1,v2 lines")
@click.option("--seeds", default="41", show_default=True, help="Comma-separated master seeds")
@click.option("--jobs", type=int, default=lambda: Config.SWEEP_JOBS, help="Parallel runs")
@click.option("--out", type=click.Path(dir_okay=False), help="CSV output (stdout if omitted)")
@click.option("--log-dir", type=click.Path(file_okay=False), help="Per-run game logs and curves")
@click.option("--seed-report", type=click.Path(dir_okay=False), help="Best/median/worst seed per cell (CSV)")
@handle_errors
def sweep(config_path, grid_items, grid_file, seeds, jobs, out, log_dir, seed_report, **kwargs):
    """Run every grid cell for every seed, one CSV row per run"""
    base = make_config(config_path, kwargs)
    grid = parse_grid(list(grid_items), grid_file)
    results = run_sweep(base, grid, parse_seeds(seeds), jobs=max(1, jobs), log_dir=log_dir)
    if out:
        results.to_csv(out, index=False)
        logger.info(f"Wrote {len(results)} sweep rows to {out}")
    else:
        results.to_csv(sys.stdout, index=False)
    if seed_report:
        rank_seeds(results).to_csv(seed_report, index=False)


@click.command()
@click.argument("logs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--window", type=int, default=30, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="CSV output (stdout if omitted)")
@handle_errors
def stats(logs, window, out):
    """Sliding-window score curves with cumulative frames"""
    curves = compute_stats(logs, window)
    if out:
        curves.to_csv(out, index=False)
    else:
        curves.to_csv(sys.stdout, index=False)


@click.command()
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.option("--min-count", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["dot", "json"]), default="dot", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@handle_errors
def export(model, min_count, fmt, out):
    """Export a model as a DOT graph or a pruned JSON model"""
    edges = export_model(model, out, min_count, fmt)
    click.echo(f"{edges} transitions written to {out}")


@click.command()
@run_options
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@handle_errors
def phase1(config_path, out_dir, **kwargs):
    """Automated recording, frozen play, then refinement with LM=1 and LM=2"""
    base = make_config(config_path, kwargs)
    for summary in run_phase1(base, out_dir):
        click.echo(summary.model_dump_json())


def register_commands(group: click.Group) -> None:
    for command in (run, sweep, stats, export, phase1):
        group.add_command(command)
