import itertools
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import ValidationError

from .agents import AutomatedAgent, ModelBasedAgent, RandomAgent, Agent, run_game
from .breakout_env import BreakoutEnv
from .config import Config, RunConfig, validation_error
from .exceptions import ConfigError, ExportError
from .learner import ExperientialLearner
from .models import GameRecord, RunSummary, SweepRow
from .transition_graph import TransitionGraph
from .utils import derive_game_seeds, entropy_seed, open_writer, read_json_lines, summarize_scores

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ["source", "game", "score", "window_mean", "frames_cumulative"]
SWEEP_COLUMNS = list(SweepRow.model_fields)
CELL_PARAMETERS = {"cs", "lm", "sr", "cu", "ea", "sc", "ss", "tu", "tc", "games"}


def load_or_create_graph(config: RunConfig) -> TransitionGraph:
    if not config.load_model:
        return TransitionGraph(config.encoding)
    graph = TransitionGraph.load(config.load_model)
    if graph.encoding != config.encoding:
        logger.warning(f"Model {config.load_model} uses encoding {graph.encoding}, run expects {config.encoding}")
        raise ConfigError("load_model", f"model encoding {graph.encoding} does not match sr/ea of this run")
    if graph.context_size is not None and graph.context_size != config.cs:
        raise ConfigError("load_model", f"model context size {graph.context_size} does not match cs={config.cs}")
    return graph


def build_agent(config: RunConfig, graph: TransitionGraph) -> Agent:
    if config.agent == "automated":
        return AutomatedAgent()
    if config.agent == "random":
        return RandomAgent()
    return ModelBasedAgent(graph, config.policy_config)


def window_means(scores: Sequence[float], window: int) -> pd.Series:
    """Mean of the last `window` games at every game (fewer at the start)"""
    return pd.Series(scores, dtype="float64").rolling(window, min_periods=1).mean()


def quick_learner_game(scores: Sequence[float], window: int, threshold: float) -> Optional[int]:
    """First game (1-based) whose window mean reaches threshold"""
    means = window_means(scores, window)
    reached = means.index[means >= threshold]
    return int(reached[0]) + 1 if len(reached) else None


def run_experiment(config: RunConfig) -> Tuple[RunSummary, TransitionGraph]:
    """Play config.games games in sequence against one persistent graph"""
    master_seed = config.seed if config.seed is not None else entropy_seed()
    logger.info(f"Run {config.run_id}: {config.games} games, agent={config.agent}, seed={master_seed}, "
                f"cs={config.cs} lm={config.lm} sr={config.sr} cu={config.cu} ea={config.ea} "
                f"sc={config.sc} ss={config.ss} tu={config.tu} tc={config.tc}")

    graph = load_or_create_graph(config)
    agent = build_agent(config, graph)
    env = BreakoutEnv(frame_cap=config.frame_cap, render_mode="text" if config.render else None)
    game_log = open_writer(config.log)
    trace_log = open_writer(config.trace)
    event_log = open_writer(config.event_log)
    learner = None
    if config.agent != "random":
        learner = ExperientialLearner(graph, config.learner_config, event_log)

    scores: List[int] = []
    frames = 0
    started = time.perf_counter()
    try:
        for game in range(1, config.games + 1):
            env_seed, rng = derive_game_seeds(master_seed, game)
            record = run_game(env, env_seed, agent, rng, learner=learner, game=game,
                              run_id=config.run_id, master_seed=master_seed, frames_before=frames,
                              trace_log=trace_log, encoding=config.encoding)
            frames = record.frames_cumulative
            scores.append(record.score)
            if game_log is not None:
                game_log.write(record)
            if game % Config.LOG_EVERY == 0:
                recent = summarize_scores(scores[-Config.LOG_EVERY:])
                logger.info(f"Run {config.run_id}: game {game}, last {Config.LOG_EVERY} mean {recent['mean']:.1f}, "
                            f"model keys {len(graph)}")
    finally:
        for writer in (game_log, trace_log, event_log):
            if writer is not None:
                writer.close()
    elapsed = time.perf_counter() - started

    if config.save_model:
        graph.save(config.save_model)

    summary = RunSummary(
        run_id=config.run_id,
        agent=config.agent,
        seed=master_seed,
        games=len(scores),
        total_frames=frames,
        steps_per_second=frames / elapsed if elapsed > 0 else 0.0,
        quick_learner_game=quick_learner_game(scores, config.window, config.quick_learner_score),
        model=graph.stats() if config.agent != "random" else None,
        **summarize_scores(scores),
    )
    logger.info(f"Run {config.run_id} finished: mean {summary.mean:.2f}, max {summary.max:.0f}, "
                f"{summary.total_frames} frames at {summary.steps_per_second:.0f} steps/s")
    return summary, graph


def load_game_log(path) -> pd.DataFrame:
    records = [record.model_dump() for record in read_json_lines(path, GameRecord)]
    return pd.DataFrame(records, columns=list(GameRecord.model_fields))


def score_curve(records: pd.DataFrame, window: int = 30, source: str = "") -> pd.DataFrame:
    """Per-game sliding-window means with cumulative frames, for plotting by games or frames"""
    curve = pd.DataFrame({
        "source": source,
        "game": records["game"].astype(int),
        "score": records["score"].astype(int),
        "window_mean": window_means(records["score"], window).to_numpy(),
        "frames_cumulative": records["frames_cumulative"].astype(int),
    }, columns=CURVE_COLUMNS)
    return curve


def compute_stats(paths: Sequence[str], window: int = 30) -> pd.DataFrame:
    curves = [score_curve(load_game_log(path), window, source=str(path)) for path in paths]
    if not curves:
        return pd.DataFrame(columns=CURVE_COLUMNS)
    return pd.concat(curves, ignore_index=True)


def grid_cells(grid: Dict[str, List[str]]) -> List[Dict[str, str]]:
    if any(not values for values in grid.values()):
        return []
    keys = list(grid)
    return [dict(zip(keys, values)) for values in itertools.product(*grid.values())]


def _run_cell(task: Tuple[int, int, Dict[str, str], Dict, Optional[str]]) -> Dict:
    cell, seed, params, base, log_dir = task
    row = SweepRow(cell=cell, seed=seed)
    try:
        run_id = f"cell{cell}-seed{seed}"
        values = {**base, **params, "seed": seed, "run_id": run_id,
                  "save_model": None, "trace": None, "event_log": None,
                  "log": os.path.join(log_dir, f"{run_id}.jsonl") if log_dir else None}
        try:
            config = RunConfig(**values)
        except ValidationError as e:
            raise validation_error(e) from e
        row = SweepRow(cell=cell, seed=seed, **config.model_dump(include=CELL_PARAMETERS))
        summary, _ = run_experiment(config)
        if log_dir:
            curve = score_curve(load_game_log(config.log), config.window, source=run_id)
            curve.to_csv(os.path.join(log_dir, f"{run_id}.curve.csv"), index=False)
        row = row.model_copy(update={"mean": summary.mean, "max": summary.max, "min": summary.min,
                                     "total_frames": summary.total_frames})
    except Exception as e:
        logger.warning(f"Sweep cell {cell} seed {seed} failed: {e}")
        row = row.model_copy(update={"error": str(e)})
    return row.model_dump()


def run_sweep(base: RunConfig, grid: Dict[str, List[str]], seeds: Sequence[int],
              jobs: int = 1, log_dir: Optional[str] = None) -> pd.DataFrame:
    """Every (grid cell, seed) pair as an independent run; one CSV row each, sorted by cell then seed"""
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
    base_values = base.model_dump(exclude={"seed", "run_id", "log", "trace", "event_log", "save_model"})
    tasks = [(cell, seed, params, base_values, log_dir)
             for cell, params in enumerate(grid_cells(grid))
             for seed in seeds]
    logger.info(f"Sweep of {len(tasks)} runs with {jobs} worker(s)")
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, tasks))
    else:
        rows = [_run_cell(task) for task in tasks]
    rows.sort(key=lambda row: (row["cell"], row["seed"]))
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def rank_seeds(results: pd.DataFrame) -> pd.DataFrame:
    """Best, worst and median seed of every cell, with the best/worst mean ratio"""
    columns = ["cell", "best_seed", "best_mean", "median_seed", "median_mean", "worst_seed", "worst_mean", "spread"]
    ok = results[results["error"] == ""].dropna(subset=["mean"])
    rows = []
    for cell, group in ok.groupby("cell", sort=True):
        ranked = group.sort_values(["mean", "seed"], ascending=[False, True]).reset_index(drop=True)
        best, worst, median = ranked.iloc[0], ranked.iloc[-1], ranked.iloc[len(ranked) // 2]
        spread = best["mean"] / worst["mean"] if worst["mean"] > 0 else float("inf")
        rows.append([cell, int(best["seed"]), best["mean"], int(median["seed"]), median["mean"],
                     int(worst["seed"]), worst["mean"], spread])
    return pd.DataFrame(rows, columns=columns)


def export_model(model_path, out_path, min_count: int = 1, fmt: str = "dot") -> int:
    """DOT graph or pruned JSON model of the transitions with C >= min_count; returns the edge count"""
    graph = TransitionGraph.load(model_path)
    if fmt == "dot":
        return graph.export_dot(out_path, min_count)
    if fmt != "json":
        raise ConfigError("format", f"unknown export format {fmt!r}")
    pruned = graph.prune(min_count)
    try:
        pruned.save(out_path)
    except OSError as e:
        raise ExportError(f"cannot write JSON export to {out_path}: {e}") from e
    return pruned.transition_count


def run_phase1(base: RunConfig, out_dir) -> List[RunSummary]:
    """Automated recording, then frozen play and two refinements of the recorded model"""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    automated_model = str(out / "automated.json")
    stages = [
        ("automated", dict(agent="automated", save_model=automated_model)),
        ("frozen", dict(agent="model", lm=0, load_model=automated_model)),
        ("refined-pos", dict(agent="model", lm=1, load_model=automated_model,
                             save_model=str(out / "refined-pos.json"))),
        ("refined-posneg", dict(agent="model", lm=2, load_model=automated_model,
                                save_model=str(out / "refined-posneg.json"))),
    ]
    summaries = []
    for name, update in stages:
        values = {**base.model_dump(exclude={"load_model", "save_model"}), **update,
                  "run_id": name, "log": str(out / f"{name}.jsonl")}
        try:
            config = RunConfig(**values)
        except ValidationError as e:
            raise validation_error(e) from e
        summary, _ = run_experiment(config)
        summaries.append(summary)
    return summaries
