"""Trial execution: training/evaluation loops for both environment families.

Go-Right trials alternate 500-step training interactions under a
uniform-random behavior policy (the planner updates the value function every
step) with 500-step greedy evaluations; the agent never observes resets.
Acrobot trials behave greedily, truncate episodes at 500 steps, and log the
per-episode total reward.  A run is a pure function of (config, seed); trials
can execute across worker processes and are merged in seed order.
"""
from __future__ import annotations

import concurrent.futures
import statistics
import time
from pathlib import Path

import numpy as np

from ..core import draw_index, rng_from_seed
from ..environments import AcrobotConfig, AcrobotEnv, GoRightConfig, GoRightEnv
from ..handcoded_models import (
    BoxGoRightModel,
    ExpectationGoRightModel,
    PerfectGoRightModel,
    SamplingGoRightModel,
    goright_tables,
)
from ..learned_models import GoRightFullStateAdapter, LearnedModelSet, ObservationAdapter
from ..planning import (
    PlannerConfig,
    SelectivePlanner,
    Transition,
    box_target_bound_widths,
)
from ..value_functions import TabularQ, TileCodedQ, acrobot_tiling_spec
from .config import HANDCODED_MODELS, ExperimentConfig, save_config
from .goright_fast import run_fast_goright_trial
from .records import EpisodeRecord, write_records


def _planner_config(cfg: ExperimentConfig) -> PlannerConfig:
    a = cfg.agent
    return PlannerConfig(
        horizon=a.horizon, temperature=a.tau, mode=a.mode, num_rollouts=a.rollouts
    )


def _build_goright_agent(cfg: ExperimentConfig, rng: np.random.Generator):
    tables = goright_tables(cfg.num_prize_indicators)
    q = TabularQ(tables.codec)
    a = cfg.agent
    model = None
    box_model = None
    if a.model == "perfect":
        model = PerfectGoRightModel(tables)
    elif a.model == "expect":
        model = ExpectationGoRightModel(tables)
    elif a.model == "sample":
        model = SamplingGoRightModel(tables)
    elif a.model in ("tree", "nn"):
        obs_dim = 2 + cfg.num_prize_indicators
        adapter = GoRightFullStateAdapter(obs_dim) if a.full_state else ObservationAdapter(obs_dim)
        model = LearnedModelSet(
            a.model,
            adapter,
            num_actions=2,
            rng=rng,
            stochastic=a.stochastic,
            hidden=a.hidden,
            with_iqn=a.stochastic or a.mode in ("one-step-variance", "one-step-range"),
            model_samples=a.model_samples,
        )
        if a.mode == "box":
            box_model = model
    if a.mode == "box" and box_model is None:
        box_model = BoxGoRightModel(tables)
    planner = SelectivePlanner(
        q, model, _planner_config(cfg), cfg.resolved_gamma, a.alpha, box_model=box_model
    )
    return q, model, planner, tables


def _uses_fast_path(cfg: ExperimentConfig) -> bool:
    return (
        cfg.env in ("goright", "goright10")
        and cfg.agent.model in ("none",) + HANDCODED_MODELS
        and not cfg.diag
    )


def run_goright_trial(cfg: ExperimentConfig, trial: int) -> list[EpisodeRecord]:
    seed = cfg.trial_seed(trial)
    episodes = cfg.resolved_episodes
    start = time.perf_counter()
    if _uses_fast_path(cfg):
        a = cfg.agent
        train, evals, _ = run_fast_goright_trial(
            cfg.num_prize_indicators,
            episodes,
            cfg.interaction_length,
            cfg.resolved_gamma,
            a.alpha,
            a.tau,
            a.horizon,
            a.rollouts,
            a.mode,
            a.model,
            seed,
        )
        per_ep = (time.perf_counter() - start) / max(episodes, 1)
        return [
            EpisodeRecord(trial, ep, float(train[ep]), float(evals[ep]), None, per_ep)
            for ep in range(episodes)
        ]
    return _run_goright_trial_python(cfg, trial, seed)


def _run_goright_trial_python(cfg: ExperimentConfig, trial: int, seed: int) -> list[EpisodeRecord]:
    """Reference implementation; also the path for learned models and for the
    uncertainty-error diagnostic.  Consumes random draws in the same order as
    the compiled path."""
    rng = rng_from_seed(seed)
    env = GoRightEnv(
        GoRightConfig(
            num_prize_indicators=cfg.num_prize_indicators,
            gamma=cfg.resolved_gamma,
            interaction_length=cfg.interaction_length,
        )
    )
    q, model, planner, tables = _build_goright_agent(cfg, rng)
    learned = hasattr(model, "observe")
    oracle_box = BoxGoRightModel(tables) if cfg.diag else None
    gamma = cfg.resolved_gamma
    horizon = cfg.agent.horizon
    records = []
    for ep in range(cfg.resolved_episodes):
        ep_start = time.perf_counter()
        obs = env.reset(rng)
        state_before = env.state
        g_train = 0.0
        disc = 1.0
        unc_errors: list[float] = []
        for _ in range(cfg.interaction_length):
            action = draw_index(rng, 2)
            prev_obs = obs
            prev_state = state_before
            obs, reward = env.step(action)
            state_before = env.state
            tr = Transition(
                prev_obs,
                action,
                reward,
                obs,
                info={"underlying": env.state, "underlying_prev": prev_state},
            )
            if learned:
                model.observe(tr, rng)
            diags = planner.update(tr, rng)
            if oracle_box is not None and horizon > 1:
                oracle_u = box_target_bound_widths(q, oracle_box, tr, horizon, gamma)
                unc_errors.extend(
                    float(diags.uncertainties[i] - oracle_u[i]) for i in range(1, horizon)
                )
            g_train += disc * reward
            disc *= gamma
        # Greedy evaluation on a fresh interaction; no learning.
        obs = env.reset(rng)
        g_eval = 0.0
        disc = 1.0
        for _ in range(cfg.interaction_length):
            action = q.greedy(obs)
            obs, reward = env.step(action)
            g_eval += disc * reward
            disc *= gamma
        median_err = statistics.median(unc_errors) if unc_errors else None
        records.append(
            EpisodeRecord(
                trial, ep, g_train, g_eval, median_err, time.perf_counter() - ep_start
            )
        )
    return records


def run_acrobot_trial(cfg: ExperimentConfig, trial: int) -> list[EpisodeRecord]:
    seed = cfg.trial_seed(trial)
    rng = rng_from_seed(seed)
    distractor = cfg.env == "acrobot-distractor"
    env = AcrobotEnv(
        AcrobotConfig(
            distractor=distractor,
            gamma=cfg.resolved_gamma,
            max_episode_steps=cfg.interaction_length,
            init_noise=cfg.init_noise,
        )
    )
    spec = acrobot_tiling_spec(distractor)
    q = TileCodedQ(spec, num_actions=3)
    a = cfg.agent
    model = None
    box_model = None
    if a.model in ("tree", "nn"):
        adapter = ObservationAdapter(env.cfg.obs_dim)
        model = LearnedModelSet(
            a.model,
            adapter,
            num_actions=3,
            rng=rng,
            stochastic=a.stochastic,
            hidden=a.hidden,
            with_iqn=a.stochastic or a.mode in ("one-step-variance", "one-step-range"),
            model_samples=a.model_samples,
        )
        if a.mode == "box":
            box_model = model
    planner = SelectivePlanner(
        q,
        model,
        _planner_config(cfg),
        cfg.resolved_gamma,
        a.alpha,
        box_model=box_model,
        terminal_fn=env.is_terminal_obs,
    )
    gamma = cfg.resolved_gamma
    records = []
    for ep in range(cfg.resolved_episodes):
        ep_start = time.perf_counter()
        obs = env.reset(rng)
        total = 0.0
        disc = 1.0
        for _ in range(cfg.interaction_length):
            action = q.greedy(obs)
            prev_obs = obs
            obs, reward, terminated = env.step(action, rng)
            tr = Transition(prev_obs, action, reward, obs, terminated=terminated)
            if model is not None:
                model.observe(tr, rng)
            planner.update(tr, rng)
            total += disc * reward
            disc *= gamma
            if terminated:
                break
        # Behavior is already greedy, so the training return is the
        # evaluated quantity; both columns carry it.
        records.append(
            EpisodeRecord(trial, ep, total, total, None, time.perf_counter() - ep_start)
        )
    return records


def run_trial(cfg: ExperimentConfig, trial: int) -> list[EpisodeRecord]:
    if cfg.env in ("goright", "goright10"):
        return run_goright_trial(cfg, trial)
    return run_acrobot_trial(cfg, trial)


def run_experiment(cfg: ExperimentConfig) -> list[EpisodeRecord]:
    """All trials of one agent configuration, merged in seed order."""
    if cfg.threads > 1 and cfg.trials > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            per_trial = list(pool.map(run_trial, [cfg] * cfg.trials, range(cfg.trials)))
    else:
        per_trial = [run_trial(cfg, i) for i in range(cfg.trials)]
    records = [r for trial_records in per_trial for r in trial_records]
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_records(records, out / "episodes.csv")
        save_config(cfg, out / "config.yaml")
    return records
