"""Idealized hand-coded models of Go-Right.

Four oracles over the discrete underlying dynamics:

* a perfect model of the full 2nd-order state;
* a Markov expectation model (exact least-squares next state, with exact
  input-conditional variances and ranges per dimension);
* a Markov sampling model drawing each dimension independently from its
  exact maximum-likelihood marginal;
* a bounding-box model returning exact per-dimension bounds over all
  successors of all states in a box under a set of actions.

The Markov models condition on the discretized observation key; because the
uniform-random behavior policy makes every status context equally likely and
the status pattern cycles through all nine (prev, cur) pairs, the
maximum-likelihood next-status distribution is uniform over {0, 5, 10} in
every context.  All distributions here are derived analytically from the
dynamics, not estimated from simulation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import BoundingBox, Interval, InvalidInputError
from .environments import (
    NUM_POSITIONS,
    PRIZE_POSITION,
    RIGHT,
    STATUS_VALUES,
    GoRightUnderlyingState,
    goright_step,
)
from .value_functions import GoRightKeyCodec

ONE_THIRD = 1.0 / 3.0
STATUS_MEAN = 5.0
STATUS_VARIANCE = 50.0 / 3.0  # uniform over {0, 5, 10}
ENTRY_INDICATOR_MEAN = ONE_THIRD
ENTRY_INDICATOR_VARIANCE = 2.0 / 9.0  # Bernoulli(1/3)


@dataclass(frozen=True)
class MarkovPrediction:
    """Exact next-observation statistics of the Markov expectation model."""

    mean: np.ndarray
    variance: np.ndarray
    range_lo: np.ndarray
    range_hi: np.ndarray
    reward_mean: float
    reward_variance: float
    reward_range: Interval

    @property
    def variance_total(self) -> float:
        return float(self.variance.sum()) + self.reward_variance

    @property
    def range_total(self) -> float:
        return float((self.range_hi - self.range_lo).sum()) + self.reward_range.width


class GoRightTables:
    """Enumeration tables over the discrete Go-Right spaces.

    Underlying states are indexed as (position, status pair, indicator
    configuration); observation keys follow :class:`GoRightKeyCodec`.
    Indicator configurations are 0 (all off), 1..n (single light on), and
    n+1 (all on); every (prev, cur) status pair is treated as compatible
    with every configuration.
    """

    def __init__(self, num_prize_indicators: int):
        n = num_prize_indicators
        self.n = n
        self.codec = GoRightKeyCodec(n)
        self.num_configs = n + 2
        self.num_underlying = NUM_POSITIONS * 9 * self.num_configs
        self.mask_of_cfg = np.array([0] + [1 << i for i in range(n)] + [(1 << n) - 1], dtype=np.int64)

        nk = self.codec.num_keys
        self.key_pos = np.empty(nk, dtype=np.int64)
        self.key_status = np.empty(nk, dtype=np.int64)
        self.key_mask = np.empty(nk, dtype=np.int64)
        for key in range(nk):
            p, s, m = self.codec.key_fields(key)
            self.key_pos[key], self.key_status[key], self.key_mask[key] = p, s, m

        # Flash-pattern advance over bitmasks; masks not on the pattern reset to 0.
        num_masks = 1 << n
        all_on = num_masks - 1
        self.adv_mask = np.zeros(num_masks, dtype=np.int64)
        self.adv_mask[all_on] = all_on
        self.adv_mask[0] = 1
        for i in range(n - 1):
            self.adv_mask[1 << i] = 1 << (i + 1)
        self.adv_mask[1 << (n - 1)] = 0
        if n == 1:  # single light: the pattern and the won state coincide
            self.adv_mask[all_on] = all_on

        nu = self.num_underlying
        self.u_next = np.empty((nu, 2), dtype=np.int64)
        self.u_reward = np.empty((nu, 2), dtype=np.float64)
        self.u_obs = np.empty((nu, 2 + n), dtype=np.float64)
        self.u_key = np.empty(nu, dtype=np.int64)
        for u in range(nu):
            state = self.underlying_state(u)
            self.u_obs[u, 0] = state.position
            self.u_obs[u, 1] = state.status_cur
            self.u_obs[u, 2:] = state.prize_intensities
            self.u_key[u] = self.codec.key_index(
                state.position,
                STATUS_VALUES.index(state.status_cur),
                self._mask_of_intensities(state.prize_intensities),
            )
            for a in (0, 1):
                nxt, r = goright_step(state, a)
                self.u_next[u, a] = self.underlying_index(nxt)
                self.u_reward[u, a] = r

        # Expectation-model rollout tables: the discretized mean successor and
        # the (deterministic given the key) reward.
        self.exp_next_key = np.empty((nk, 2), dtype=np.int64)
        self.exp_reward = np.empty((nk, 2), dtype=np.float64)
        self.entry = np.zeros((nk, 2), dtype=bool)
        for key in range(nk):
            for a in (0, 1):
                pred = self._expectation(key, a)
                self.exp_next_key[key, a] = self.codec.key_of_obs(pred.mean)
                self.exp_reward[key, a] = pred.reward_mean
                self.entry[key, a] = self._is_entry(key, a)

    # -- encodings ------------------------------------------------------------

    def underlying_index(self, state: GoRightUnderlyingState) -> int:
        pair = STATUS_VALUES.index(state.status_prev) * 3 + STATUS_VALUES.index(state.status_cur)
        cfg = self._cfg_of_intensities(state.prize_intensities)
        return (state.position * 9 + pair) * self.num_configs + cfg

    def underlying_state(self, u: int) -> GoRightUnderlyingState:
        cfg = u % self.num_configs
        rest = u // self.num_configs
        pair = rest % 9
        pos = rest // 9
        mask = int(self.mask_of_cfg[cfg])
        return GoRightUnderlyingState(
            position=pos,
            status_prev=STATUS_VALUES[pair // 3],
            status_cur=STATUS_VALUES[pair % 3],
            prize_intensities=tuple((mask >> d) & 1 for d in range(self.n)),
        )

    def _mask_of_intensities(self, intensities) -> int:
        mask = 0
        for d, v in enumerate(intensities):
            mask |= int(v) << d
        return mask

    def _cfg_of_intensities(self, intensities) -> int:
        mask = self._mask_of_intensities(intensities)
        matches = np.flatnonzero(self.mask_of_cfg == mask)
        if matches.size == 0:
            raise InvalidInputError(f"unreachable indicator pattern {intensities}")
        return int(matches[0])

    def reachable_underlying(self):
        """Indices of all reachable underlying states."""
        out = []
        for u in range(self.num_underlying):
            cfg = u % self.num_configs
            pos = u // (9 * self.num_configs)
            if pos == PRIZE_POSITION or cfg == 0:
                out.append(u)
        return np.array(out, dtype=np.int64)

    def key_observation(self, key: int) -> np.ndarray:
        return self.codec.obs_of_key(key)

    def _is_entry(self, key: int, action: int) -> bool:
        return bool(self.key_pos[key] == PRIZE_POSITION - 1 and action == RIGHT)

    # -- expectation model ------------------------------------------------------

    def _next_mask_det(self, pos: int, next_pos: int, mask: int) -> int:
        """Deterministic indicator transition for non-entry cases."""
        if next_pos != PRIZE_POSITION:
            return 0
        if pos != PRIZE_POSITION:  # entry handled separately by callers
            return 0
        return int(self.adv_mask[mask])

    def _expectation(self, key: int, action: int) -> MarkovPrediction:
        n = self.n
        pos = int(self.key_pos[key])
        mask = int(self.key_mask[key])
        delta = 1 if action == RIGHT else -1
        next_pos = min(max(pos + delta, 0), NUM_POSITIONS - 1)

        mean = np.empty(2 + n)
        var = np.zeros(2 + n)
        lo = np.empty(2 + n)
        hi = np.empty(2 + n)
        mean[0] = lo[0] = hi[0] = next_pos
        mean[1] = STATUS_MEAN
        var[1] = STATUS_VARIANCE
        lo[1], hi[1] = 0.0, 10.0

        if self._is_entry(key, action):
            mean[2:] = ENTRY_INDICATOR_MEAN
            var[2:] = ENTRY_INDICATOR_VARIANCE
            lo[2:], hi[2:] = 0.0, 1.0
        else:
            next_mask = self._next_mask_det(pos, next_pos, mask)
            bits = [(next_mask >> d) & 1 for d in range(n)]
            mean[2:] = bits
            lo[2:] = bits
            hi[2:] = bits

        if action == RIGHT:
            reward = 3.0 if (pos == PRIZE_POSITION and mask == (1 << n) - 1) else -1.0
        else:
            reward = 0.0
        return MarkovPrediction(
            mean=mean,
            variance=var,
            range_lo=lo,
            range_hi=hi,
            reward_mean=reward,
            reward_variance=0.0,
            reward_range=Interval(reward, reward),
        )


_TABLES_CACHE: dict[int, GoRightTables] = {}


def goright_tables(num_prize_indicators: int) -> GoRightTables:
    if num_prize_indicators not in _TABLES_CACHE:
        _TABLES_CACHE[num_prize_indicators] = GoRightTables(num_prize_indicators)
    return _TABLES_CACHE[num_prize_indicators]


class PerfectGoRightModel:
    """Exact model of the full 2nd-order dynamics; rollout states are
    underlying-state indices taken from the environment."""

    supports = frozenset({"expect"})

    def __init__(self, tables: GoRightTables):
        self.tables = tables

    def rollout_start(self, transition):
        state = transition.info["underlying"]
        return self.tables.underlying_index(state)

    def observation(self, u: int) -> np.ndarray:
        return self.tables.u_obs[u]

    def step(self, u: int, action: int, rng=None):
        return int(self.tables.u_next[u, action]), float(self.tables.u_reward[u, action])


class ExpectationGoRightModel:
    """Markov expectation model over discretized observation keys."""

    supports = frozenset({"expect", "variance", "range"})

    def __init__(self, tables: GoRightTables):
        self.tables = tables

    def rollout_start(self, transition):
        return self.tables.codec.key_of_obs(transition.next_obs)

    def current_state(self, transition):
        return self.tables.codec.key_of_obs(transition.obs)

    def observation(self, key: int) -> np.ndarray:
        return self.tables.key_observation(key)

    def predict(self, key: int, action: int) -> MarkovPrediction:
        return self.tables._expectation(key, action)

    def step(self, key: int, action: int, rng=None):
        return (
            int(self.tables.exp_next_key[key, action]),
            float(self.tables.exp_reward[key, action]),
        )

    def step_statistics(self, key: int, action: int) -> tuple[float, float]:
        """(summed next-state + reward variance, summed range widths)."""
        n = self.tables.n
        if self.tables.entry[key, action]:
            return (
                STATUS_VARIANCE + n * ENTRY_INDICATOR_VARIANCE,
                10.0 + float(n),
            )
        return STATUS_VARIANCE, 10.0


class SamplingGoRightModel:
    """Markov model sampling each dimension from its exact ML marginal.

    Each simulated step consumes a fixed block of draws (one for the status,
    one per indicator) regardless of which are needed, so the stream stays
    aligned with the compiled fast path.
    """

    supports = frozenset({"expect", "sample"})

    def __init__(self, tables: GoRightTables):
        self.tables = tables

    def rollout_start(self, transition):
        return self.tables.codec.key_of_obs(transition.next_obs)

    def observation(self, key: int) -> np.ndarray:
        return self.tables.key_observation(key)

    @property
    def indicator_on_probability(self) -> Fraction:
        """Per-indicator ML probability of lighting on the entry transition."""
        return Fraction(1, 3)

    def all_on_entry_probability(self) -> Fraction:
        """Exact probability the sampled entry transition wins the prize."""
        return self.indicator_on_probability ** self.tables.n

    def step(self, key: int, action: int, rng):
        t = self.tables
        n = t.n
        pos = int(t.key_pos[key])
        mask = int(t.key_mask[key])
        delta = 1 if action == RIGHT else -1
        next_pos = min(max(pos + delta, 0), NUM_POSITIONS - 1)

        status_idx = int(rng.random() * 3)
        status_idx = 2 if status_idx > 2 else status_idx
        entry = t.entry[key, action]
        sampled_mask = 0
        for d in range(n):
            if rng.random() < ONE_THIRD:
                sampled_mask |= 1 << d
        if entry:
            next_mask = sampled_mask
        else:
            next_mask = t._next_mask_det(pos, next_pos, mask)
        reward = float(t.exp_reward[key, action])
        return t.codec.key_index(next_pos, status_idx, next_mask), reward


class BoxGoRightModel:
    """Exact bounding-box model: per-dimension bounds over every successor of
    every reachable discrete state in the box, under every action in the set."""

    supports = frozenset({"box"})

    def __init__(self, tables: GoRightTables):
        self.tables = tables

    def box_start(self, transition) -> BoundingBox:
        key = self.tables.codec.key_of_obs(transition.next_obs)
        point = self.tables.key_observation(key)
        return BoundingBox(point, point)

    def observation_box(self, box: BoundingBox) -> BoundingBox:
        return box

    def states_in_box(self, box: BoundingBox) -> np.ndarray:
        """Reachable underlying-state indices whose observation lies in the box."""
        t = self.tables
        lo, hi = box.lower, box.upper
        positions = [p for p in range(NUM_POSITIONS) if lo[0] <= p <= hi[0]]
        pairs = range(9)
        cfgs = []
        for cfg in range(t.num_configs):
            mask = int(t.mask_of_cfg[cfg])
            ok = all(lo[2 + d] <= ((mask >> d) & 1) <= hi[2 + d] for d in range(t.n))
            if ok:
                cfgs.append(cfg)
        statuses = [i for i, v in enumerate(STATUS_VALUES) if lo[1] <= v <= hi[1]]
        out = []
        for p in positions:
            valid_cfgs = cfgs if p == PRIZE_POSITION else ([0] if 0 in cfgs else [])
            for pair in pairs:
                if pair % 3 not in statuses:
                    continue
                for cfg in valid_cfgs:
                    out.append((p * 9 + pair) * t.num_configs + cfg)
        return np.array(out, dtype=np.int64)

    def box_step(self, box: BoundingBox, actions) -> tuple[BoundingBox, Interval]:
        t = self.tables
        states = self.states_in_box(box)
        if states.size == 0:
            raise InvalidInputError("box contains no reachable discrete state")
        succ = t.u_next[states][:, list(actions)].ravel()
        rewards = t.u_reward[states][:, list(actions)].ravel()
        obs = t.u_obs[succ]
        return (
            BoundingBox(obs.min(axis=0), obs.max(axis=0)),
            Interval(float(rewards.min()), float(rewards.max())),
        )
