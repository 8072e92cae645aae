"""State-action value estimators with point queries, TD updates, and box queries.

Two families are provided: a lookup table over the discretized Go-Right
observation space, and a linear tile-coded approximator for Acrobot.  Both
support interval queries ``sup/inf q(s, a)`` over a bounding box of states
and a set of actions, and the derived greedy value bounds and greedy action
set used by box rollouts.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import BoundingBox, Interval, InvalidInputError
from .environments import NUM_POSITIONS, STATUS_VALUES


@dataclass(frozen=True)
class GreedyBounds:
    """Bounds on the value of acting greedily within a state box.

    ``actions`` is every action whose upper value bound reaches ``v_lower``,
    i.e. every action that could be selected greedily somewhere in the box.
    """

    v_upper: float
    v_lower: float
    actions: tuple[int, ...]


def compute_greedy_bounds(action_intervals: dict[int, Interval]) -> GreedyBounds:
    """Greedy value bounds from per-action value intervals over one box.

    The upper bound is the best upper value; the lower bound is the best
    lower value (some action achieves at least that everywhere); the action
    set keeps every action whose upper bound reaches the lower bound.
    """
    if not action_intervals:
        raise InvalidInputError("need at least one action interval")
    v_upper = max(iv.hi for iv in action_intervals.values())
    v_lower = max(iv.lo for iv in action_intervals.values())
    actions = tuple(sorted(a for a, iv in action_intervals.items() if iv.hi >= v_lower))
    return GreedyBounds(v_upper, v_lower, actions)


def discretize_goright(obs, num_prize_indicators: int) -> tuple[int, ...]:
    """Recover the discrete observation key underneath the offsets.

    Position snaps to the nearest integer in [0, 10], status to the nearest
    of {0, 5, 10} (thresholds 2.5 and 7.5), and each prize dimension to 1
    iff it is at least 0.5.
    """
    pos = int(math.floor(float(obs[0]) + 0.5))
    pos = min(max(pos, 0), NUM_POSITIONS - 1)
    s = float(obs[1])
    status = 0 if s < 2.5 else (5 if s < 7.5 else 10)
    bits = tuple(1 if float(obs[2 + d]) >= 0.5 else 0 for d in range(num_prize_indicators))
    return (pos, status) + bits


class GoRightKeyCodec:
    """Integer encoding of discretized Go-Right observations.

    Keys enumerate position x status x indicator bitmask.  Each key owns a
    closed cell of observation space (the preimage of the discretization);
    box queries enumerate the keys whose cells intersect the box.
    """

    def __init__(self, num_prize_indicators: int):
        self.n = num_prize_indicators
        self.num_masks = 1 << self.n
        self.num_keys = NUM_POSITIONS * 3 * self.num_masks

    def key_index(self, pos: int, status_idx: int, mask: int) -> int:
        return ((pos * 3 + status_idx) << self.n) | mask

    def key_fields(self, key: int) -> tuple[int, int, int]:
        mask = key & (self.num_masks - 1)
        rest = key >> self.n
        return rest // 3, rest % 3, mask

    def key_of_obs(self, obs) -> int:
        tup = discretize_goright(obs, self.n)
        mask = 0
        for d in range(self.n):
            mask |= tup[2 + d] << d
        return self.key_index(tup[0], STATUS_VALUES.index(tup[1]), mask)

    def obs_of_key(self, key: int) -> np.ndarray:
        pos, st, mask = self.key_fields(key)
        return np.array(
            [pos, STATUS_VALUES[st]] + [(mask >> d) & 1 for d in range(self.n)],
            dtype=np.float64,
        )

    # Per-dimension cell intervals, closed at both ends.  Edge cells extend
    # to infinity so the cells tile all of observation space.
    @staticmethod
    def position_cell(pos: int) -> tuple[float, float]:
        lo = -math.inf if pos == 0 else pos - 0.5
        hi = math.inf if pos == NUM_POSITIONS - 1 else pos + 0.5
        return lo, hi

    @staticmethod
    def status_cell(status_idx: int) -> tuple[float, float]:
        return ((-math.inf, 2.5), (2.5, 7.5), (7.5, math.inf))[status_idx]

    @staticmethod
    def bit_cell(bit: int) -> tuple[float, float]:
        return (0.5, math.inf) if bit else (-math.inf, 0.5)

    def box_intersection(self, box: BoundingBox):
        """Which key coordinates have cells meeting the box, plus the key count."""
        if box.dim != 2 + self.n:
            raise InvalidInputError(f"expected a {2 + self.n}-dim box, got {box.dim}")
        lo, hi = box.lower, box.upper
        positions = np.array(
            [
                lo[0] <= self.position_cell(p)[1] and hi[0] >= self.position_cell(p)[0]
                for p in range(NUM_POSITIONS)
            ]
        )
        statuses = np.array(
            [
                lo[1] <= self.status_cell(i)[1] and hi[1] >= self.status_cell(i)[0]
                for i in range(3)
            ]
        )
        allow0 = np.array([lo[2 + d] <= 0.5 for d in range(self.n)])
        allow1 = np.array([hi[2 + d] >= 0.5 for d in range(self.n)])
        count = (
            int(positions.sum())
            * int(statuses.sum())
            * int(np.prod((allow0.astype(np.int64) + allow1.astype(np.int64))))
        )
        return positions, statuses, allow0, allow1, count

    def keys_intersecting(self, box: BoundingBox) -> list[int]:
        """Explicit key enumeration; exponential in indicator count, test-sized."""
        positions, statuses, allow0, allow1, _ = self.box_intersection(box)
        bit_choices = []
        for d in range(self.n):
            choices = ([0] if allow0[d] else []) + ([1] if allow1[d] else [])
            bit_choices.append(choices)
        keys = []
        for p in np.flatnonzero(positions):
            for s in np.flatnonzero(statuses):
                for bits in itertools.product(*bit_choices):
                    mask = 0
                    for d, b in enumerate(bits):
                        mask |= b << d
                    keys.append(self.key_index(int(p), int(s), mask))
        return keys


class TabularQ:
    """Lookup table over discretized Go-Right observations.

    Unvisited entries read 0.  Box queries are exact sup/inf over the keys
    whose cells intersect the box; entries never written contribute the
    zero default, which is accounted for without enumerating them.
    """

    def __init__(self, codec: GoRightKeyCodec, num_actions: int = 2):
        self.codec = codec
        self.num_actions = num_actions
        self.values = np.zeros((codec.num_keys, num_actions))
        self.visited_mask = np.zeros(codec.num_keys, dtype=bool)
        # Decomposed coordinates of visited keys, for vectorized box filtering.
        self._cap = 64
        self._vkeys = np.zeros(self._cap, dtype=np.int64)
        self._vpos = np.zeros(self._cap, dtype=np.int64)
        self._vstat = np.zeros(self._cap, dtype=np.int64)
        self._vmask = np.zeros(self._cap, dtype=np.int64)
        self.num_visited = 0

    def _record_visit(self, key: int) -> None:
        if self.visited_mask[key]:
            return
        self.visited_mask[key] = True
        if self.num_visited == self._cap:
            self._cap *= 2
            for name in ("_vkeys", "_vpos", "_vstat", "_vmask"):
                arr = getattr(self, name)
                grown = np.zeros(self._cap, dtype=np.int64)
                grown[: self.num_visited] = arr[: self.num_visited]
                setattr(self, name, grown)
        pos, st, mask = self.codec.key_fields(key)
        i = self.num_visited
        self._vkeys[i], self._vpos[i], self._vstat[i], self._vmask[i] = key, pos, st, mask
        self.num_visited += 1

    # -- point interface ----------------------------------------------------

    def value(self, obs, action: int) -> float:
        return float(self.values[self.codec.key_of_obs(obs), action])

    def value_by_key(self, key: int, action: int) -> float:
        return float(self.values[key, action])

    def update(self, obs, action: int, target: float, alpha: float) -> None:
        self.update_by_key(self.codec.key_of_obs(obs), action, target, alpha)

    def update_by_key(self, key: int, action: int, target: float, alpha: float) -> None:
        self.values[key, action] += alpha * (target - self.values[key, action])
        self._record_visit(key)

    def greedy(self, obs) -> int:
        return int(np.argmax(self.values[self.codec.key_of_obs(obs)]))

    def max_value(self, obs) -> float:
        return float(np.max(self.values[self.codec.key_of_obs(obs)]))

    def max_value_by_key(self, key: int) -> float:
        return float(np.max(self.values[key]))

    # -- box interface ------------------------------------------------------

    def _visited_in_box(self, positions, statuses, allow0, allow1) -> np.ndarray:
        k = self.num_visited
        if k == 0:
            return np.zeros(0, dtype=np.int64)
        ok = positions[self._vpos[:k]] & statuses[self._vstat[:k]]
        masks = self._vmask[:k]
        for d in range(self.codec.n):
            bit = (masks >> d) & 1
            ok &= np.where(bit == 1, allow1[d], allow0[d])
        return self._vkeys[:k][ok]

    def action_bounds(self, box: BoundingBox, actions) -> Interval:
        """sup/inf of q over states in the box and actions in the set."""
        actions = tuple(actions)
        if not actions:
            raise InvalidInputError("action set must be nonempty")
        positions, statuses, allow0, allow1, count = self.codec.box_intersection(box)
        if count == 0:
            raise InvalidInputError("box does not intersect the value function's domain")
        keys = self._visited_in_box(positions, statuses, allow0, allow1)
        vals = self.values[keys][:, list(actions)]
        if keys.size < count:  # some intersecting key was never written
            hi = max(float(vals.max()), 0.0) if vals.size else 0.0
            lo = min(float(vals.min()), 0.0) if vals.size else 0.0
        else:
            hi = float(vals.max())
            lo = float(vals.min())
        return Interval(lo, hi)

    def greedy_bounds(self, box: BoundingBox) -> GreedyBounds:
        return compute_greedy_bounds(
            {a: self.action_bounds(box, (a,)) for a in range(self.num_actions)}
        )


# ---------------------------------------------------------------------------
# Tile coding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TilingGroup:
    """A number of identically-shaped tilings over one subset of dimensions."""

    dims: tuple[int, ...]
    num_tilings: int


class TileCodingSpec:
    """Overlapping offset grids producing one active tile per tiling.

    Tiling k within a group of m is displaced by k/m cell widths scaled by
    the odd sequence (1, 3, 5, ...) across the subset's dimensions.  Each
    grid carries one extra cell per dimension so displaced grids still cover
    the full input range.
    """

    def __init__(self, lows, highs, cells, groups: list[TilingGroup]):
        self.lows = np.asarray(lows, dtype=np.float64)
        self.highs = np.asarray(highs, dtype=np.float64)
        self.cells = np.asarray(cells, dtype=np.int64)
        self.widths = (self.highs - self.lows) / self.cells
        self.groups = list(groups)
        self._tilings = []  # (dims array, frac array, shape, base)
        base = 0
        for g in self.groups:
            dims = np.asarray(g.dims, dtype=np.int64)
            odd = 2.0 * np.arange(len(g.dims)) + 1.0
            shape = tuple(int(self.cells[d]) + 1 for d in g.dims)
            size = int(np.prod(shape))
            for k in range(g.num_tilings):
                frac = (k * odd / g.num_tilings) % 1.0
                self._tilings.append((dims, frac, shape, base))
                base += size
        self.num_tilings = len(self._tilings)
        self.num_features = base

    def _dim_index(self, x: float, d: int, frac: float) -> int:
        i = int(math.floor((x - self.lows[d]) / self.widths[d] + frac))
        return min(max(i, 0), int(self.cells[d]))

    def active_features(self, obs) -> np.ndarray:
        """One active tile index per tiling (60 for Acrobot, 140 with distractor)."""
        x = np.asarray(obs, dtype=np.float64)
        out = np.empty(self.num_tilings, dtype=np.int64)
        for t, (dims, frac, shape, base) in enumerate(self._tilings):
            idx = 0
            for j, d in enumerate(dims):
                idx = idx * shape[j] + self._dim_index(x[d], int(d), frac[j])
            out[t] = base + idx
        return out

    def tile_windows(self, box: BoundingBox):
        """Per tiling: the rectangle of tile indices its cells can take in the box."""
        windows = []
        for dims, frac, shape, base in self._tilings:
            slices = []
            for j, d in enumerate(dims):
                lo = self._dim_index(float(box.lower[d]), int(d), frac[j])
                hi = self._dim_index(float(box.upper[d]), int(d), frac[j])
                slices.append(slice(lo, hi + 1))
            windows.append((tuple(slices), shape, base))
        return windows


def acrobot_tiling_spec(distractor: bool = False) -> TileCodingSpec:
    """Tile coding for Acrobot: 60 tilings (140 with the distractor dimension).

    Groups cover the full space plus every lower-dimensional subset; the
    full-dimensional group is sized so the totals come out to 60 and 140.
    """
    if distractor:
        ndim = 5
        cells = [6, 7, 6, 7, 7]
        lows = [-math.pi, -math.pi, -4 * math.pi, -9 * math.pi, -4 * math.pi]
        highs = [math.pi, math.pi, 4 * math.pi, 9 * math.pi, 4 * math.pi]
        per_size = {5: 60, 4: 4, 3: 2, 2: 2, 1: 4}
    else:
        ndim = 4
        cells = [6, 7, 6, 7]
        lows = [-math.pi, -math.pi, -4 * math.pi, -9 * math.pi]
        highs = [math.pi, math.pi, 4 * math.pi, 9 * math.pi]
        per_size = {4: 24, 3: 3, 2: 2, 1: 3}
    groups = []
    for size in sorted(per_size, reverse=True):
        for dims in itertools.combinations(range(ndim), size):
            groups.append(TilingGroup(dims, per_size[size]))
    return TileCodingSpec(lows, highs, cells, groups)


class TileCodedQ:
    """Linear state-action values over a tile coding feature set.

    The per-update stepsize is alpha divided by the number of tilings.  Box
    queries exploit the one-hot structure: each tiling contributes the
    max/min single weight among its tiles intersecting the box, an
    over-approximation of the true sup/inf.
    """

    def __init__(self, spec: TileCodingSpec, num_actions: int = 3):
        self.spec = spec
        self.num_actions = num_actions
        self.weights = np.zeros((num_actions, spec.num_features))

    def value(self, obs, action: int) -> float:
        return float(self.weights[action, self.spec.active_features(obs)].sum())

    def values_all(self, obs) -> np.ndarray:
        return self.weights[:, self.spec.active_features(obs)].sum(axis=1)

    def update(self, obs, action: int, target: float, alpha: float) -> None:
        feats = self.spec.active_features(obs)
        delta = target - float(self.weights[action, feats].sum())
        self.weights[action, feats] += (alpha / self.spec.num_tilings) * delta

    def greedy(self, obs) -> int:
        return int(np.argmax(self.values_all(obs)))

    def max_value(self, obs) -> float:
        return float(np.max(self.values_all(obs)))

    def action_bounds(self, box: BoundingBox, actions) -> Interval:
        actions = tuple(actions)
        if not actions:
            raise InvalidInputError("action set must be nonempty")
        hi = -math.inf
        lo = math.inf
        windows = self.spec.tile_windows(box)
        for a in actions:
            total_hi = 0.0
            total_lo = 0.0
            w = self.weights[a]
            for slices, shape, base in windows:
                size = int(np.prod(shape))
                tile_view = w[base : base + size].reshape(shape)[slices]
                total_hi += float(tile_view.max())
                total_lo += float(tile_view.min())
            hi = max(hi, total_hi)
            lo = min(lo, total_lo)
        return Interval(lo, hi)

    def greedy_bounds(self, box: BoundingBox) -> GreedyBounds:
        return compute_greedy_bounds(
            {a: self.action_bounds(box, (a,)) for a in range(self.num_actions)}
        )
