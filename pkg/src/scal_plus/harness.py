"""Experiment runner.

``run_experiment`` turns an :class:`ExperimentConfig` into one trace CSV per
seed plus a summary CSV; ``sweep`` repeats it over a grid of values of one
config key. Seeds are independent and may run in a process pool.
"""

from __future__ import annotations

import statistics as stats_lib
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import structlog
import yaml
from pydantic import BaseModel, Field

from scal_plus.agent import AgentConfig, ScalPlusAgent, UniformRandomAgent
from scal_plus.bonus import HolderParams
from scal_plus.config import ExperimentConfig, HarnessSettings, resolve_output_dir
from scal_plus.continuous import Discretization, choose_num_intervals, run_continuous_agent
from scal_plus.environments import (
    FINE_GRID_CELLS,
    GAIN_PINS_PATH,
    SMOOTH_DRIFT,
    DiscreteEnvironment,
    SmoothEnv,
    chain_env,
    fine_grid_gain,
    load_gain_pins,
    pin_key,
    pinned_gain,
    random_mdp,
    save_gain_pins,
    two_cycle,
)
from scal_plus.errors import OutputExistsError, ScalPlusError
from scal_plus.events import AgentEvent, EventPayload, SyncEventEmitter
from scal_plus.interfaces import Agent, Environment
from scal_plus.log import configure_logging
from scal_plus.mdp import solve_gain_bias
from scal_plus.models import DiscreteMdp, EpisodeRecord
from scal_plus.simulation import simulate
from scal_plus.trace import TRACE_FORMAT_VERSION, RegretTrace, TraceWriter

logger = structlog.get_logger(__name__)


class RunSummary(BaseModel):
    """One row of ``summary.csv``."""

    seed: int
    T: int
    final_regret: float | None = None
    episodes: int = Field(0, ge=0)
    mean_planning_iterations: float = Field(0.0, ge=0.0)
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_row(self) -> dict[str, Any]:
        row = self.model_dump()
        row["final_regret"] = "" if self.final_regret is None else repr(self.final_regret)
        row["mean_planning_iterations"] = repr(self.mean_planning_iterations)
        return row


class ExperimentResult(BaseModel):
    """What ``run_experiment`` wrote."""

    output_dir: str
    runs: list[RunSummary]

    @property
    def failed(self) -> list[RunSummary]:
        return [run for run in self.runs if not run.ok]

    @property
    def success(self) -> bool:
        return not self.failed


def build_mdp(cfg: ExperimentConfig) -> DiscreteMdp:
    spec = cfg.environment
    if spec.kind == "file":
        return DiscreteMdp.load(spec.path)
    if spec.kind == "random":
        return random_mdp(spec.num_states, spec.num_actions, spec.gamma, spec.seed, spec.r_max)
    if spec.kind == "two_cycle":
        return two_cycle()
    if spec.kind == "chain":
        return chain_env(spec.num_states)
    raise ValueError(f"environment kind {spec.kind!r} is not discrete")


def build_environment(cfg: ExperimentConfig) -> Environment[Any]:
    """Environment described by ``cfg.environment``."""
    spec = cfg.environment
    if spec.kind == "smooth":
        return SmoothEnv(spec.L, spec.alpha, drift=spec.drift)
    return DiscreteEnvironment(build_mdp(cfg), reward_mode=spec.reward_mode)


def oracle_span_cap(env: DiscreteEnvironment) -> float:
    """span(h*) of the environment, or r_max when the bias is constant."""
    solution = solve_gain_bias(env.mdp)
    return solution.span if solution.span > 0.0 else env.r_max


def agent_config(cfg: ExperimentConfig, env: Environment[Any], seed: int) -> AgentConfig:
    spec = cfg.agent
    span_cap = spec.span_cap
    if span_cap is None:
        if not isinstance(env, DiscreteEnvironment):
            raise ValueError("span_cap is required for continuous environments")
        span_cap = oracle_span_cap(env)
    holder = None
    if cfg.is_continuous:
        L, alpha = env.holder_constants  # type: ignore[attr-defined]
        holder = HolderParams(
            L=L if spec.holder_L is None else spec.holder_L,
            alpha=alpha if spec.holder_alpha is None else spec.holder_alpha,
        )
    return AgentConfig(
        span_cap=span_cap,
        delta=spec.delta,
        r_max=env.r_max,
        bonus_variant=spec.bonus_variant,
        capped_bonus=spec.capped_bonus,
        reference_state=spec.reference_state,
        seed=seed,
        max_planning_iter=spec.max_planning_iter,
        holder=holder,
        debug=spec.debug,
    )


def _episode_logger(seed: int) -> Any:
    log = logger.bind(seed=seed)

    def handle(payload: EventPayload) -> None:
        if payload.event is AgentEvent.PLANNING_ERROR:
            log.error("planning_error", **payload.data)
        else:
            log.info("episode_planned", **payload.data)

    return handle


def run_seed(cfg: ExperimentConfig, seed: int) -> tuple[RegretTrace, list[EpisodeRecord]]:
    """Simulate one seed of ``cfg``; returns the trace and the episode history.

    Raises:
        PlanningError: If the agent cannot plan an episode.
    """
    env = build_environment(cfg)
    emitter = SyncEventEmitter()
    handler = _episode_logger(seed)
    emitter.on(AgentEvent.EPISODE_PLANNED, handler)
    emitter.on(AgentEvent.PLANNING_ERROR, handler)

    if cfg.agent.algorithm == "uniform_random":
        encoder = None
        if cfg.is_continuous:
            num_intervals = cfg.agent.num_intervals or choose_num_intervals(
                cfg.horizon, env.num_actions, *env.holder_constants  # type: ignore[attr-defined]
            )
            disc = Discretization(num_intervals)

            def encoder(s: float) -> int:
                return disc.index(s) - 1

        baseline: Agent[Any] = UniformRandomAgent(env.num_actions, seed, encoder)
        return simulate(env, baseline, cfg.horizon, seed), []

    agent_cfg = agent_config(cfg, env, seed)
    if cfg.agent.algorithm == "c_scal_plus":
        assert isinstance(env, SmoothEnv)
        trace, agent = run_continuous_agent(
            env, agent_cfg, cfg.horizon, seed, cfg.agent.num_intervals, emitter
        )
        return trace, agent.history

    assert isinstance(env, DiscreteEnvironment)
    discrete = ScalPlusAgent(env.num_states, env.num_actions, agent_cfg, emitter)
    return simulate(env, discrete, cfg.horizon, seed), discrete.history


def _summarize(seed: int, trace: RegretTrace, history: list[EpisodeRecord]) -> RunSummary:
    iterations = [record.iterations for record in history]
    return RunSummary(
        seed=seed,
        T=trace.horizon,
        final_regret=trace.final_regret(),
        episodes=len(history),
        mean_planning_iterations=float(stats_lib.fmean(iterations)) if iterations else 0.0,
    )


def _run_seed_job(cfg_data: dict[str, Any], seed: int, output_dir: str) -> RunSummary:
    """Run one seed and write its files; never raises on library errors."""
    cfg = ExperimentConfig.model_validate(cfg_data)
    writer = TraceWriter(output_dir)
    try:
        trace, history = run_seed(cfg, seed)
    except ScalPlusError as e:
        logger.error("run_failed", seed=seed, error=str(e))
        return RunSummary(seed=seed, T=cfg.horizon, status=f"failed: {type(e).__name__}")
    writer.write_trace(trace, seed, cfg.checkpoint_stride)
    if cfg.logging.verbose:
        writer.write_episodes(history, seed)
    summary = _summarize(seed, trace, history)
    logger.info("run_done", seed=seed, final_regret=summary.final_regret, episodes=summary.episodes)
    return summary


def _run_seed_in_worker(cfg_data: dict[str, Any], seed: int, output_dir: str) -> RunSummary:
    configure_logging(cfg_data["logging"]["level"], colors=False)
    return _run_seed_job(cfg_data, seed, output_dir)


def check_output(writer: TraceWriter, seeds: list[int], force: bool) -> None:
    """Refuse to overwrite existing results unless ``force``.

    Raises:
        OutputExistsError: If a trace or the summary already exists.
    """
    if force:
        return
    existing = [writer.trace_path(seed) for seed in seeds] + [writer.summary_path]
    clashes = [str(path) for path in existing if path.exists()]
    if clashes:
        raise OutputExistsError(f"output already exists (use --force): {', '.join(clashes)}")


def run_experiment(
    cfg: ExperimentConfig, settings: HarnessSettings | None = None
) -> ExperimentResult:
    """Run every seed of ``cfg`` and write trace, summary and config files.

    Raises:
        OutputExistsError: If outputs exist and ``cfg.force`` is off.
        FileNotFoundError: If a file-backed environment is missing.
    """
    output_dir = resolve_output_dir(cfg, settings)
    writer = TraceWriter(output_dir)
    check_output(writer, cfg.seeds, cfg.force)
    # fail fast on environment errors before any run starts
    build_environment(cfg)

    cfg_data = cfg.to_dict()
    snapshot = {"trace_format_version": TRACE_FORMAT_VERSION, "config": cfg_data}
    with open(output_dir / "config.yaml", "w", encoding="utf-8") as f:
        yaml.safe_dump(snapshot, f, sort_keys=False)

    logger.info("experiment_start", output_dir=str(output_dir), seeds=cfg.seeds, horizon=cfg.horizon)
    if cfg.workers > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(cfg.seeds))) as pool:
            futures = [
                pool.submit(_run_seed_in_worker, cfg_data, seed, str(output_dir))
                for seed in cfg.seeds
            ]
            runs = [future.result() for future in futures]
    else:
        runs = [_run_seed_job(cfg_data, seed, str(output_dir)) for seed in cfg.seeds]

    writer.write_summary([run.to_row() for run in runs])
    result = ExperimentResult(output_dir=str(output_dir), runs=runs)
    logger.info("experiment_done", failed=len(result.failed))
    return result


def sweep_slug(key: str, value: Any) -> str:
    return f"{key.rsplit('.', 1)[-1]}={value}"


def sweep(
    cfg: ExperimentConfig,
    key: str,
    values: list[Any],
    settings: HarnessSettings | None = None,
) -> tuple[Path, list[ExperimentResult]]:
    """Run ``cfg`` once per value of the dotted config ``key``.

    Each value gets its own sub-directory; ``sweep_summary.csv`` in the base
    directory holds the median and mean final regret per value.
    """
    if not values:
        raise ValueError("sweep needs at least one value")
    base = resolve_output_dir(cfg, settings)
    results = []
    rows = []
    for value in values:
        sub_dir = base / sweep_slug(key, value)
        sub_cfg = cfg.with_overrides([f"{key}={value}", f"output_dir={sub_dir}"])
        result = run_experiment(sub_cfg, settings)
        results.append(result)
        regrets = [run.final_regret for run in result.runs if run.final_regret is not None]
        rows.append(
            {
                "key": key,
                "value": value,
                "seeds": len(result.runs),
                "failed": len(result.failed),
                "median_final_regret": repr(stats_lib.median(regrets)) if regrets else "",
                "mean_final_regret": repr(stats_lib.fmean(regrets)) if regrets else "",
            }
        )
    TraceWriter(base).write_summary(rows, path=base / "sweep_summary.csv")
    return base, results


def pin_gains(
    pairs: list[tuple[float, float]],
    cells: int = FINE_GRID_CELLS,
    path: Path = GAIN_PINS_PATH,
    drift: float = SMOOTH_DRIFT,
) -> dict[str, float]:
    """Compute fine-grid gains of ``SmoothEnv(L, alpha, drift=drift)`` and store them in ``path``.

    :func:`pinned_gain` reads the finest grid stored for a parameter set, so a
    coarser ``cells`` never shadows an existing finer pin.
    """
    pins = load_gain_pins(path)
    for L, alpha in pairs:
        gain = fine_grid_gain(SmoothEnv(L, alpha, drift=drift), cells)
        pins[pin_key(L, alpha, cells, drift)] = gain
        logger.info("gain_pinned", L=L, alpha=alpha, drift=drift, cells=cells, gain=gain)
    save_gain_pins(pins, path)
    pinned_gain.cache_clear()
    return pins
