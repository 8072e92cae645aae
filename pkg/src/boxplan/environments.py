"""Benchmark environments: the Go-Right corridor family and Acrobot.

Go-Right has discrete underlying dynamics (position, a 2nd-order status
light, and prize indicator lights) observed through per-interaction uniform
offsets, which makes the data continuous-valued.  Acrobot is the classic
two-link swing-up task; a variant appends a distractor dimension resampled
uniformly every step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import InvalidInputError, draw_index

LEFT = 0
RIGHT = 1

STATUS_VALUES = (0, 5, 10)

# 2nd-order status pattern: (intensity at t-1, intensity at t) -> intensity at t+1.
# The induced pair chain is a single 9-cycle, so every intensity and every
# ordered (cur, next) pair occurs with equal frequency.
_STATUS_TABLE = {
    (0, 0): 5,
    (0, 5): 0,
    (0, 10): 5,
    (5, 0): 10,
    (5, 5): 10,
    (5, 10): 10,
    (10, 0): 0,
    (10, 5): 5,
    (10, 10): 0,
}

NUM_POSITIONS = 11  # integer positions 0..10
PRIZE_POSITION = 10

POSITION_OFFSET_MAX = 0.25
STATUS_OFFSET_MAX = 1.25
PRIZE_OFFSET_MAX = 0.25


def goright_status_next(prev: int, cur: int) -> int:
    """Deterministic successor intensity of the 2nd-order status pattern."""
    try:
        return _STATUS_TABLE[(prev, cur)]
    except KeyError:
        raise InvalidInputError(f"status intensities must be in {{0, 5, 10}}, got ({prev}, {cur})")


@dataclass(frozen=True)
class GoRightConfig:
    num_prize_indicators: int = 2
    gamma: float = 0.9
    interaction_length: int = 500

    def __post_init__(self) -> None:
        # n == 1 is rejected: the all-on (won) pattern and the single-light
        # flash pattern would be indistinguishable in the observation.
        if self.num_prize_indicators < 2:
            raise InvalidInputError("num_prize_indicators must be >= 2")
        if not (0.0 < self.gamma <= 1.0):
            raise InvalidInputError("gamma must be in (0, 1]")
        if self.interaction_length <= 0:
            raise InvalidInputError("interaction_length must be positive")

    @property
    def obs_dim(self) -> int:
        return 2 + self.num_prize_indicators


@dataclass(frozen=True)
class GoRightUnderlyingState:
    """Full 2nd-order Markov state of Go-Right."""

    position: int
    status_prev: int
    status_cur: int
    prize_intensities: tuple[int, ...]

    @property
    def won(self) -> bool:
        return self.position == PRIZE_POSITION and all(v == 1 for v in self.prize_intensities)


@dataclass(frozen=True)
class GoRightOffsets:
    """Observation offsets, fixed for the lifetime of one interaction."""

    position_offset: float
    status_offset: float
    prize_offsets: tuple[float, ...]


def _next_prize_intensities(
    state: GoRightUnderlyingState, new_position: int, new_status: int
) -> tuple[int, ...]:
    n = len(state.prize_intensities)
    if new_position != PRIZE_POSITION:
        return (0,) * n
    if state.position != PRIZE_POSITION:
        # Entering the prize location: win iff the status light reaches full
        # intensity on the same step, otherwise the flash pattern starts all-off.
        return ((1,) * n) if new_status == 10 else ((0,) * n)
    if state.won:
        return (1,) * n
    # Staying at the prize location without the prize: advance the flash
    # pattern all-off -> leftmost -> ... -> rightmost -> all-off.
    cur = state.prize_intensities
    if all(v == 0 for v in cur):
        return (1,) + (0,) * (n - 1)
    lit = cur.index(1)
    if lit == n - 1:
        return (0,) * n
    return (0,) * (lit + 1) + (1,) + (0,) * (n - lit - 2)


def goright_reward(state: GoRightUnderlyingState, action: int) -> float:
    if action == LEFT:
        return 0.0
    return 3.0 if state.won else -1.0


def goright_step(
    state: GoRightUnderlyingState, action: int
) -> tuple[GoRightUnderlyingState, float]:
    """Advance the exact underlying dynamics; returns (next state, reward)."""
    if action not in (LEFT, RIGHT):
        raise InvalidInputError(f"action must be {LEFT} (left) or {RIGHT} (right), got {action}")
    reward = goright_reward(state, action)
    delta = 1 if action == RIGHT else -1
    new_position = min(max(state.position + delta, 0), NUM_POSITIONS - 1)
    new_status = goright_status_next(state.status_prev, state.status_cur)
    prizes = _next_prize_intensities(state, new_position, new_status)
    next_state = GoRightUnderlyingState(
        position=new_position,
        status_prev=state.status_cur,
        status_cur=new_status,
        prize_intensities=prizes,
    )
    return next_state, reward


def goright_observe(state: GoRightUnderlyingState, offsets: GoRightOffsets) -> np.ndarray:
    """Continuous observation: underlying values plus the interaction offsets."""
    return np.array(
        [
            state.position + offsets.position_offset,
            state.status_cur + offsets.status_offset,
            *(v + o for v, o in zip(state.prize_intensities, offsets.prize_offsets)),
        ],
        dtype=np.float64,
    )


def _sample_offsets(n: int, rng: np.random.Generator) -> GoRightOffsets:
    pos = (rng.random() * 2.0 - 1.0) * POSITION_OFFSET_MAX
    status = (rng.random() * 2.0 - 1.0) * STATUS_OFFSET_MAX
    prizes = tuple((rng.random() * 2.0 - 1.0) * PRIZE_OFFSET_MAX for _ in range(n))
    return GoRightOffsets(pos, status, prizes)


_STATUS_PAIRS = tuple((p, c) for p in STATUS_VALUES for c in STATUS_VALUES)


def goright_reset(
    cfg: GoRightConfig, rng: np.random.Generator
) -> tuple[GoRightUnderlyingState, GoRightOffsets, np.ndarray]:
    """Fresh interaction: position 0, indicators off, random status pair and offsets.

    The initial (prev, cur) status pair is uniform over the 9 combinations,
    matching the pattern's stationary distribution.  Draw order (offsets,
    then pair) is part of the reproducibility contract.
    """
    offsets = _sample_offsets(cfg.num_prize_indicators, rng)
    prev, cur = _STATUS_PAIRS[draw_index(rng, 9)]
    state = GoRightUnderlyingState(
        position=0,
        status_prev=prev,
        status_cur=cur,
        prize_intensities=(0,) * cfg.num_prize_indicators,
    )
    return state, offsets, goright_observe(state, offsets)


class GoRightEnv:
    """Stateful wrapper bundling the underlying dynamics with offsets.

    The environment never signals termination; the harness truncates
    interactions and calls :meth:`reset`.
    """

    def __init__(self, cfg: GoRightConfig):
        self.cfg = cfg
        self.state: GoRightUnderlyingState | None = None
        self.offsets: GoRightOffsets | None = None

    @property
    def num_actions(self) -> int:
        return 2

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self.state, self.offsets, obs = goright_reset(self.cfg, rng)
        return obs

    def step(self, action: int) -> tuple[np.ndarray, float]:
        if self.state is None:
            raise RuntimeError("step() before reset()")
        self.state, reward = goright_step(self.state, action)
        return goright_observe(self.state, self.offsets), reward


def enumerate_reachable_states(num_prize_indicators: int):
    """All reachable underlying states, for exhaustive checks and oracle tables.

    Prize indicators are all-off away from position 10; at position 10 the
    reachable patterns are all-off, exactly one on, or all on.  Every status
    pair is treated as compatible with every indicator pattern.
    """
    n = num_prize_indicators
    patterns_at_10 = [(0,) * n]
    patterns_at_10 += [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    patterns_at_10 += [(1,) * n]
    states = []
    for pos in range(NUM_POSITIONS):
        patterns = patterns_at_10 if pos == PRIZE_POSITION else [(0,) * n]
        for prev, cur in _STATUS_PAIRS:
            for pattern in patterns:
                states.append(GoRightUnderlyingState(pos, prev, cur, pattern))
    return states


# ---------------------------------------------------------------------------
# Acrobot
# ---------------------------------------------------------------------------

TORQUES = (-1.0, 0.0, 1.0)

THETA1_DOT_MAX = 4.0 * math.pi
THETA2_DOT_MAX = 9.0 * math.pi
DISTRACTOR_MAX = 4.0 * math.pi


@dataclass(frozen=True)
class AcrobotConfig:
    distractor: bool = False
    gamma: float = 1.0
    max_episode_steps: int = 500
    dt: float = 0.05
    substeps: int = 4
    init_noise: float = 0.0  # uniform +/- range for the initial joint state
    gravity: float = 9.8

    @property
    def obs_dim(self) -> int:
        return 5 if self.distractor else 4


def _wrap_angle(x: float) -> float:
    return (x + math.pi) % (2.0 * math.pi) - math.pi


def acrobot_terminal(theta1: float, theta2: float) -> bool:
    """Tip of the arm at or above the level of the upper joint."""
    return -math.cos(theta1) - math.cos(theta1 + theta2) > 1.0


def _acrobot_accel(th1, th2, dth1, dth2, torque, g):
    # Two unit-mass unit-length links, centers of mass at 0.5, unit inertias.
    m1 = m2 = 1.0
    l1 = 1.0
    lc1 = lc2 = 0.5
    i1 = i2 = 1.0
    d1 = m1 * lc1**2 + m2 * (l1**2 + lc2**2 + 2.0 * l1 * lc2 * math.cos(th2)) + i1 + i2
    d2 = m2 * (lc2**2 + l1 * lc2 * math.cos(th2)) + i2
    phi2 = m2 * lc2 * g * math.cos(th1 + th2 - math.pi / 2.0)
    phi1 = (
        -m2 * l1 * lc2 * dth2**2 * math.sin(th2)
        - 2.0 * m2 * l1 * lc2 * dth2 * dth1 * math.sin(th2)
        + (m1 * lc1 + m2 * l1) * g * math.cos(th1 - math.pi / 2.0)
        + phi2
    )
    ddth2 = (torque + (d2 / d1) * phi1 - m2 * l1 * lc2 * dth1**2 * math.sin(th2) - phi2) / (
        m2 * lc2**2 + i2 - d2**2 / d1
    )
    ddth1 = -(d2 * ddth2 + phi1) / d1
    return ddth1, ddth2


class AcrobotEnv:
    """Classic two-link swing-up; -1 reward per step until the tip is up.

    Integration is semi-implicit Euler with ``substeps`` inner steps of
    ``dt`` per decision; velocities are clipped and angles wrapped to
    [-pi, pi).  The distractor variant appends a dimension resampled
    uniformly from [-4*pi, 4*pi] every step.
    """

    def __init__(self, cfg: AcrobotConfig):
        self.cfg = cfg
        self.state = np.zeros(4)
        self.distractor_value = 0.0

    @property
    def num_actions(self) -> int:
        return 3

    def _observe(self) -> np.ndarray:
        if self.cfg.distractor:
            return np.append(self.state, self.distractor_value)
        return self.state.copy()

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        if self.cfg.init_noise > 0.0:
            self.state = (rng.random(4) * 2.0 - 1.0) * self.cfg.init_noise
        else:
            self.state = np.zeros(4)
        if self.cfg.distractor:
            self.distractor_value = (rng.random() * 2.0 - 1.0) * DISTRACTOR_MAX
        return self._observe()

    def step(
        self, action: int, rng: np.random.Generator
    ) -> tuple[np.ndarray, float, bool]:
        if action not in (0, 1, 2):
            raise InvalidInputError(f"acrobot action must be 0, 1, or 2, got {action}")
        torque = TORQUES[action]
        th1, th2, dth1, dth2 = self.state
        for _ in range(self.cfg.substeps):
            ddth1, ddth2 = _acrobot_accel(th1, th2, dth1, dth2, torque, self.cfg.gravity)
            dth1 = min(max(dth1 + self.cfg.dt * ddth1, -THETA1_DOT_MAX), THETA1_DOT_MAX)
            dth2 = min(max(dth2 + self.cfg.dt * ddth2, -THETA2_DOT_MAX), THETA2_DOT_MAX)
            th1 = _wrap_angle(th1 + self.cfg.dt * dth1)
            th2 = _wrap_angle(th2 + self.cfg.dt * dth2)
        self.state = np.array([th1, th2, dth1, dth2])
        if self.cfg.distractor:
            self.distractor_value = (rng.random() * 2.0 - 1.0) * DISTRACTOR_MAX
        terminated = acrobot_terminal(th1, th2)
        return self._observe(), -1.0, terminated

    def is_terminal_obs(self, obs) -> bool:
        return acrobot_terminal(float(obs[0]), float(obs[1]))
