"""Selective model-based value expansion.

Each real transition is extended by model rollouts into per-horizon TD
targets.  Targets are combined by softmin weights over per-horizon
uncertainties, computed by one of five measures: summed one-step predicted
variance or range, Monte Carlo target variance or range over k sampled
rollouts, or the width of target bounds inferred by a bounding-box rollout.
With no uncertainty measure the weights are uniform; with horizon 1 the
update reduces to Q-learning.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import BoundingBox, Interval

MODES = ("none", "one-step-variance", "one-step-range", "mc-variance", "mc-range", "box")
ONE_STEP_MODES = ("one-step-variance", "one-step-range")
MC_MODES = ("mc-variance", "mc-range")


class ConfigurationError(ValueError):
    """Agent configuration incompatible with the bound model or value function."""


@dataclass(frozen=True)
class Transition:
    """One real environment transition (s, a, r, s'), plus optional extras
    such as the underlying discrete state for models that need it."""

    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    terminated: bool = False
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PlannerConfig:
    horizon: int = 5
    temperature: float = 1.0
    mode: str = "none"
    num_rollouts: int = 40  # k, for the Monte Carlo modes

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown uncertainty mode {self.mode!r}")
        if self.mode != "none" and self.temperature <= 0.0:
            raise ConfigurationError("temperature must be positive")
        if self.mode in MC_MODES and self.num_rollouts < 2:
            raise ConfigurationError("Monte Carlo modes need at least 2 rollouts")


@dataclass(frozen=True)
class PlanDiagnostics:
    """Per-horizon targets, uncertainties, and weights of one planning step."""

    targets: np.ndarray
    uncertainties: np.ndarray
    weights: np.ndarray


def td_target(first_reward: float, sim_rewards, bootstrap_value: float, gamma: float) -> float:
    """h-step TD target: the real reward, discounted simulated rewards for
    steps 2..h, and the discounted greedy value at the final state."""
    rho = first_reward
    j = 2
    for r in sim_rewards:
        rho += gamma ** (j - 1) * r
        j += 1
    return rho + gamma ** (j - 1) * bootstrap_value


def softmin_weights(uncertainties, temperature: float) -> np.ndarray:
    """w_i proportional to exp(-u_i / tau), normalized; stable via min shift."""
    u = np.asarray(uncertainties, dtype=np.float64)
    if temperature <= 0.0:
        raise ConfigurationError("temperature must be positive")
    z = np.exp(-(u - u.min()) / temperature)
    return z / z.sum()


class SelectivePlanner:
    """Applies the weighted multi-horizon TD update for one agent.

    ``model`` generates point rollouts (its ``step`` is an expectation or a
    sample depending on the model); ``box_model`` is required only for the
    box mode.  ``terminal_fn`` lets episodic domains truncate rollouts at
    predicted goal states.
    """

    def __init__(
        self,
        value_fn,
        model,
        cfg: PlannerConfig,
        gamma: float,
        alpha: float,
        box_model=None,
        terminal_fn=None,
    ):
        self.q = value_fn
        self.model = model
        self.cfg = cfg
        self.gamma = gamma
        self.alpha = alpha
        self.box_model = box_model
        self.terminal_fn = terminal_fn
        self._validate()

    def _validate(self) -> None:
        cfg = self.cfg
        if cfg.horizon > 1 and self.model is None:
            raise ConfigurationError("multi-step planning requires a model")
        if self.model is not None:
            supports = getattr(self.model, "supports", frozenset())
            if cfg.mode in ONE_STEP_MODES and "variance" not in supports and "range" not in supports:
                raise ConfigurationError("one-step modes need a model with variance/range queries")
            if cfg.mode in MC_MODES and "sample" not in supports:
                raise ConfigurationError("Monte Carlo modes need a sampling model")
        if cfg.mode == "box":
            if self.box_model is None or "box" not in getattr(self.box_model, "supports", frozenset()):
                raise ConfigurationError("box mode needs a box-query model")
            if not hasattr(self.q, "greedy_bounds"):
                raise ConfigurationError("box mode needs a value function with box queries")

    # -- rollout machinery ----------------------------------------------------

    def _point_rollout(self, tr: Transition, rng):
        """Simulate greedy steps from the real next state.

        Returns (sim_rewards, boot_values, pairs) where sim_rewards[j] is the
        model reward at rollout step j (horizons 2..h), boot_values[i-1] the
        greedy value bootstrapped at horizon i, and pairs the (model state,
        action) sequence starting at the real next state.
        """
        h = self.cfg.horizon
        state = self.model.rollout_start(tr)
        boot_values = [self.q.max_value(tr.next_obs)]
        sim_rewards: list[float] = []
        pairs: list[tuple[object, int]] = []
        done = False
        for _ in range(2, h + 1):
            if done:
                # A predicted goal state ends the rollout; later horizons
                # repeat its target (zero further reward, zero value).
                sim_rewards.append(0.0)
                boot_values.append(0.0)
                continue
            obs = self.model.observation(state)
            action = self.q.greedy(obs)
            pairs.append((state, action))
            state, reward = self.model.step(state, action, rng)
            sim_rewards.append(reward)
            next_obs = self.model.observation(state)
            if self.terminal_fn is not None and self.terminal_fn(next_obs):
                boot_values.append(0.0)
                done = True
            else:
                boot_values.append(self.q.max_value(next_obs))
        return sim_rewards, boot_values, pairs, done

    def _targets_from_rollout(self, tr: Transition, sim_rewards, boot_values) -> np.ndarray:
        h = self.cfg.horizon
        targets = np.empty(h)
        running = tr.reward
        for i in range(1, h + 1):
            if i >= 2:
                running += self.gamma ** (i - 1) * sim_rewards[i - 2]
            targets[i - 1] = running + self.gamma**i * boot_values[i - 1]
        return targets

    def _one_step_uncertainties(self, tr: Transition, pairs) -> np.ndarray:
        """Cumulative sums of per-step predicted spread, starting at the real
        (s_t, a_t) pair; index 0 of the result is the (zero) horizon-1 term."""
        h = self.cfg.horizon
        use_variance = self.cfg.mode == "one-step-variance"
        root_state = self.model.current_state(tr)
        stats = []
        for state, action in [(root_state, tr.action)] + pairs:
            var, rng_width = self.model.step_statistics(state, action)
            stats.append(var if use_variance else rng_width)
        stats += [0.0] * (h - len(stats))  # truncated rollouts accrue nothing further
        u = np.zeros(h)
        acc = stats[0]
        for i in range(2, h + 1):
            acc += stats[i - 1]  # u_i sums terms j = 0 .. i-1
            u[i - 1] = acc
        return u

    def sampled_targets(self, tr: Transition, rng) -> np.ndarray:
        """One TD target per (rollout, horizon): shape (k, h)."""
        h, k = self.cfg.horizon, self.cfg.num_rollouts
        all_targets = np.empty((k, h))
        for j in range(k):
            sim_rewards, boot_values, _, _ = self._point_rollout(tr, rng)
            all_targets[j] = self._targets_from_rollout(tr, sim_rewards, boot_values)
        return all_targets

    def _monte_carlo(self, tr: Transition, rng):
        all_targets = self.sampled_targets(tr, rng)
        targets = all_targets.mean(axis=0)
        if self.cfg.mode == "mc-variance":
            u = all_targets.var(axis=0, ddof=1)
        else:
            u = all_targets.max(axis=0) - all_targets.min(axis=0)
        u[0] = 0.0
        return targets, u

    def _box_uncertainties(self, tr: Transition) -> np.ndarray:
        return box_target_bound_widths(self.q, self.box_model, tr, self.cfg.horizon, self.gamma)

    # -- the update -------------------------------------------------------------

    def update(self, tr: Transition, rng) -> PlanDiagnostics:
        targets, u = self.plan(tr, rng)
        if self.cfg.mode == "none" or tr.terminated or self.cfg.horizon == 1:
            weights = np.full(self.cfg.horizon, 1.0 / self.cfg.horizon)
        else:
            weights = softmin_weights(u, self.cfg.temperature)
        self.q.update(tr.obs, tr.action, float(weights @ targets), self.alpha)
        return PlanDiagnostics(targets=targets, uncertainties=u, weights=weights)

    def plan(self, tr: Transition, rng) -> tuple[np.ndarray, np.ndarray]:
        """Targets and uncertainties for one transition, without updating."""
        h = self.cfg.horizon
        if tr.terminated or h == 1:
            value = 0.0 if tr.terminated else self.q.max_value(tr.next_obs)
            rho = tr.reward + self.gamma * value
            return np.full(h, rho), np.zeros(h)
        if self.cfg.mode in MC_MODES:
            return self._monte_carlo(tr, rng)
        sim_rewards, boot_values, pairs, _ = self._point_rollout(tr, rng)
        targets = self._targets_from_rollout(tr, sim_rewards, boot_values)
        if self.cfg.mode in ONE_STEP_MODES:
            u = self._one_step_uncertainties(tr, pairs)
        elif self.cfg.mode == "box":
            u = self._box_uncertainties(tr)
        else:
            u = np.zeros(h)
        return targets, u


@dataclass(frozen=True)
class BoxRolloutStep:
    """One simulated box-rollout step: the reward interval of reaching the
    state box, the box itself, and the greedy action set within it."""

    reward: Interval
    box: BoundingBox
    actions: tuple[int, ...]


def box_rollout(q, box_model, tr: Transition, horizon: int):
    """Box rollout from the point box of the real next state.

    Returns the steps for horizons 2..h plus the greedy value bounds
    (v_lower, v_upper) at every horizon 1..h; each step advances through the
    greedy action set of the current box.
    """
    box = box_model.box_start(tr)
    gb = q.greedy_bounds(box_model.observation_box(box))
    value_bounds = [(gb.v_lower, gb.v_upper)]
    steps: list[BoxRolloutStep] = []
    for _ in range(horizon - 1):
        box, reward_interval = box_model.box_step(box, gb.actions)
        gb = q.greedy_bounds(box_model.observation_box(box))
        steps.append(BoxRolloutStep(reward=reward_interval, box=box, actions=gb.actions))
        value_bounds.append((gb.v_lower, gb.v_upper))
    return steps, value_bounds


def box_target_bounds(
    q, box_model, tr: Transition, horizon: int, gamma: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-horizon lower/upper TD-target bounds along a box rollout.

    Target bounds accumulate the real first reward, the discounted simulated
    reward intervals, and the discounted greedy value bounds at each horizon.
    """
    steps, value_bounds = box_rollout(q, box_model, tr, horizon)
    lows = np.zeros(horizon)
    highs = np.zeros(horizon)
    run_hi = tr.reward
    run_lo = tr.reward
    for i in range(1, horizon + 1):
        v_lo, v_hi = value_bounds[i - 1]
        highs[i - 1] = run_hi + gamma**i * v_hi
        lows[i - 1] = run_lo + gamma**i * v_lo
        if i < horizon:
            reward_interval = steps[i - 1].reward
            run_hi += gamma**i * reward_interval.hi
            run_lo += gamma**i * reward_interval.lo
    return lows, highs


def box_target_bound_widths(q, box_model, tr: Transition, horizon: int, gamma: float) -> np.ndarray:
    """Widths of the box-rollout target bounds; the horizon-1 entry is zero
    (the first transition is real and the box starts as a point)."""
    lows, highs = box_target_bounds(q, box_model, tr, horizon, gamma)
    u = highs - lows
    u[0] = 0.0
    return u


def q_learning_planner(value_fn, gamma: float, alpha: float) -> SelectivePlanner:
    """Degenerate planner: horizon 1, no model."""
    return SelectivePlanner(value_fn, None, PlannerConfig(horizon=1), gamma, alpha)
