"""Planner-facing sets of learned per-dimension predictors.

One predictor is trained per (action, output) pair, where the outputs are
the per-dimension state deltas plus the reward.  Rollouts add predicted
deltas to the current state (for boxes, to both endpoints).  The tree family
ingests every transition and answers every query mode; the network family
trains a quantile-head net (means and outcome boxes) and optionally an
implicit-quantile net (samples, and variance/range via sampled draws).
"""
from __future__ import annotations

import io
import json

import numpy as np

from ..core import BoundingBox, Interval
from ..planning import Transition
from .linear import NoDataError
from .networks import Adam, IqnNet, QuantileHeadNet
from .trees import RegressionTree

CHECKPOINT_VERSION = 1


class ObservationAdapter:
    """Model features are exactly the observation."""

    kind = "identity"

    def __init__(self, obs_dim: int):
        self.obs_dim = obs_dim
        self.feature_dim = obs_dim

    def features_of_current(self, tr: Transition) -> np.ndarray:
        return np.asarray(tr.obs, dtype=np.float64)

    def features_of_next(self, tr: Transition) -> np.ndarray:
        return np.asarray(tr.next_obs, dtype=np.float64)


class GoRightFullStateAdapter:
    """Appends the previous status intensity, giving the model access to the
    full 2nd-order state (it could in principle become perfectly accurate)."""

    kind = "goright-full-state"

    def __init__(self, obs_dim: int):
        self.obs_dim = obs_dim
        self.feature_dim = obs_dim + 1

    def features_of_current(self, tr: Transition) -> np.ndarray:
        prev = tr.info["underlying_prev"].status_prev
        return np.append(np.asarray(tr.obs, dtype=np.float64), float(prev))

    def features_of_next(self, tr: Transition) -> np.ndarray:
        prev = tr.info["underlying"].status_prev
        return np.append(np.asarray(tr.next_obs, dtype=np.float64), float(prev))


def make_adapter(kind: str, obs_dim: int):
    if kind == "identity":
        return ObservationAdapter(obs_dim)
    if kind == "goright-full-state":
        return GoRightFullStateAdapter(obs_dim)
    raise ValueError(f"unknown adapter kind {kind!r}")


class LearnedModelSet:
    """Online model of the environment backed by per-(action, output) learners.

    ``stochastic`` selects whether rollout steps are samples or expectations.
    Query defaults before a predictor has seen data: zero delta, zero reward,
    zero spread.
    """

    def __init__(
        self,
        family: str,
        adapter,
        num_actions: int,
        rng: np.random.Generator,
        stochastic: bool = False,
        hidden: int = 64,
        with_iqn: bool | None = None,
        max_leaves: int = 100,
        train_period: int = 4,
        batch_size: int = 4,
        model_samples: int = 10,
        stepsize: float = 1e-3,
    ):
        if family not in ("tree", "nn"):
            raise ValueError(f"unknown learned model family {family!r}")
        self.family = family
        self.adapter = adapter
        self.num_actions = num_actions
        self.stochastic = stochastic
        self.hidden = hidden
        self.max_leaves = max_leaves
        self.train_period = train_period
        self.batch_size = batch_size
        self.model_samples = model_samples
        self.stepsize = stepsize
        self.num_targets = adapter.feature_dim + 1  # deltas plus reward
        self.with_iqn = stochastic if with_iqn is None else with_iqn
        if family == "tree":
            self.supports = frozenset({"expect", "sample", "variance", "range", "box"})
        else:
            # Network spread/sampling queries all go through the implicit
            # quantile nets.
            self.supports = frozenset({"expect", "box"}) | (
                frozenset({"sample", "variance", "range"}) if self.with_iqn else frozenset()
            )
        self._steps_seen = 0
        self._stat_rng = rng
        self._buffers: list[list[tuple[np.ndarray, np.ndarray, float]]] = [
            [] for _ in range(num_actions)
        ]
        self.predictors: dict[tuple[int, int], object] = {}
        self.iqn: dict[tuple[int, int], IqnNet] = {}
        for a in range(num_actions):
            for t in range(self.num_targets):
                if family == "tree":
                    self.predictors[(a, t)] = RegressionTree(max_leaves=max_leaves)
                else:
                    self.predictors[(a, t)] = QuantileHeadNet(
                        adapter.feature_dim, hidden, rng, stepsize=stepsize
                    )
                    if self.with_iqn:
                        self.iqn[(a, t)] = IqnNet(
                            adapter.feature_dim, hidden, rng, stepsize=stepsize
                        )

    # -- training ---------------------------------------------------------------

    def observe(self, tr: Transition, rng: np.random.Generator) -> None:
        x = self.adapter.features_of_current(tr)
        x2 = self.adapter.features_of_next(tr)
        delta = x2 - x
        a = tr.action
        self._buffers[a].append((x, delta, tr.reward))
        self._steps_seen += 1
        if self.family == "tree":
            for t in range(self.num_targets):
                y = tr.reward if t == self.num_targets - 1 else float(delta[t])
                self.predictors[(a, t)].observe(x, y)
        elif self._steps_seen % self.train_period == 0:
            self._train_networks(rng)

    def _train_networks(self, rng: np.random.Generator) -> None:
        for a in range(self.num_actions):
            buf = self._buffers[a]
            if not buf:
                continue
            idx = rng.integers(0, len(buf), size=self.batch_size)
            X = np.stack([buf[i][0] for i in idx])
            deltas = np.stack([buf[i][1] for i in idx])
            rewards = np.array([buf[i][2] for i in idx])
            for t in range(self.num_targets):
                y = rewards if t == self.num_targets - 1 else deltas[:, t]
                self.predictors[(a, t)].train_batch(X, y)
                if self.with_iqn:
                    self.iqn[(a, t)].train_batch(X, y, rng)

    # -- point queries -------------------------------------------------------------

    def _expect_one(self, x, a: int, t: int) -> float:
        try:
            return float(self.predictors[(a, t)].predict(x))
        except NoDataError:
            return 0.0

    def _sample_one(self, x, a: int, t: int, rng) -> float:
        try:
            if self.family == "tree":
                return float(self.predictors[(a, t)].sample(x, rng))
            return float(self.iqn[(a, t)].sample(x, rng))
        except NoDataError:
            return 0.0

    def rollout_start(self, tr: Transition) -> np.ndarray:
        return self.adapter.features_of_next(tr)

    def current_state(self, tr: Transition) -> np.ndarray:
        return self.adapter.features_of_current(tr)

    def observation(self, state: np.ndarray) -> np.ndarray:
        return state[: self.adapter.obs_dim]

    def step(self, state: np.ndarray, action: int, rng) -> tuple[np.ndarray, float]:
        n = self.num_targets - 1
        if self.stochastic:
            delta = np.array([self._sample_one(state, action, t, rng) for t in range(n)])
            reward = self._sample_one(state, action, n, rng)
        else:
            delta = np.array([self._expect_one(state, action, t) for t in range(n)])
            reward = self._expect_one(state, action, n)
        return state + delta, reward

    def step_statistics(self, state: np.ndarray, action: int) -> tuple[float, float]:
        """(summed per-output variance, summed per-output range width)."""
        var_total = 0.0
        range_total = 0.0
        for t in range(self.num_targets):
            try:
                if self.family == "tree":
                    tree: RegressionTree = self.predictors[(action, t)]
                    var_total += tree.variance_at(state)
                    range_total += tree.range_at(state).width
                elif (action, t) in self.iqn:
                    draws = self.iqn[(action, t)].sample_many(
                        state, self.model_samples, self._stat_rng
                    )
                    var_total += float(draws.var(ddof=1))
                    range_total += float(draws.max() - draws.min())
            except NoDataError:
                pass
        return var_total, range_total

    def bind_statistics_rng(self, rng: np.random.Generator) -> None:
        """Network spread queries draw quantile levels from this stream."""
        self._stat_rng = rng

    # -- box queries ---------------------------------------------------------------

    def box_start(self, tr: Transition) -> BoundingBox:
        point = self.adapter.features_of_next(tr)
        return BoundingBox(point, point)

    def observation_box(self, box: BoundingBox) -> BoundingBox:
        d = self.adapter.obs_dim
        if box.dim == d:
            return box
        return BoundingBox(box.lower[:d], box.upper[:d])

    def _outcome_one(self, box: BoundingBox, a: int, t: int) -> Interval:
        try:
            return self.predictors[(a, t)].outcome_bounds(box)
        except NoDataError:
            return Interval(0.0, 0.0)

    def box_step(self, box: BoundingBox, actions) -> tuple[BoundingBox, Interval]:
        n = self.num_targets - 1
        lo = np.full(box.dim, np.inf)
        hi = np.full(box.dim, -np.inf)
        r_lo, r_hi = np.inf, -np.inf
        for a in actions:
            for t in range(n):
                d = self._outcome_one(box, a, t)
                lo[t] = min(lo[t], box.lower[t] + d.lo)
                hi[t] = max(hi[t], box.upper[t] + d.hi)
            r = self._outcome_one(box, a, n)
            r_lo = min(r_lo, r.lo)
            r_hi = max(r_hi, r.hi)
        return BoundingBox(lo, hi), Interval(float(r_lo), float(r_hi))

    # -- checkpointing ---------------------------------------------------------------

    def save(self, path: str) -> None:
        """Self-describing checkpoint: JSON header plus per-predictor arrays."""
        meta = {
            "version": CHECKPOINT_VERSION,
            "family": self.family,
            "adapter": self.adapter.kind,
            "obs_dim": self.adapter.obs_dim,
            "num_actions": self.num_actions,
            "num_targets": self.num_targets,
            "stochastic": self.stochastic,
            "hidden": self.hidden,
            "with_iqn": self.with_iqn,
            "max_leaves": self.max_leaves,
            "train_period": self.train_period,
            "batch_size": self.batch_size,
            "model_samples": self.model_samples,
            "stepsize": self.stepsize,
        }
        arrays: dict[str, np.ndarray] = {}
        if self.family == "tree":
            trees = {
                f"{a}:{t}": self.predictors[(a, t)].to_dict()
                for a in range(self.num_actions)
                for t in range(self.num_targets)
            }
            meta["trees"] = trees
        else:
            for (a, t), net in self.predictors.items():
                for i, p in enumerate(net.params):
                    arrays[f"qh_{a}_{t}_{i}"] = p
            for (a, t), net in self.iqn.items():
                for i, p in enumerate(net.params):
                    arrays[f"iqn_{a}_{t}_{i}"] = p
        buf = io.BytesIO()
        np.savez_compressed(buf, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)
        with open(path, "wb") as f:
            f.write(buf.getvalue())

    @classmethod
    def load(cls, path: str, rng: np.random.Generator) -> "LearnedModelSet":
        with np.load(path) as data:
            meta = json.loads(bytes(data["meta"]).decode())
            if meta["version"] != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {meta['version']}")
            adapter = make_adapter(meta["adapter"], meta["obs_dim"])
            model = cls(
                meta["family"],
                adapter,
                meta["num_actions"],
                rng,
                stochastic=meta["stochastic"],
                hidden=meta["hidden"],
                with_iqn=meta["with_iqn"],
                max_leaves=meta["max_leaves"],
                train_period=meta["train_period"],
                batch_size=meta["batch_size"],
                model_samples=meta["model_samples"],
                stepsize=meta["stepsize"],
            )
            if meta["family"] == "tree":
                for key, tree_dict in meta["trees"].items():
                    a, t = (int(v) for v in key.split(":"))
                    model.predictors[(a, t)] = RegressionTree.from_dict(tree_dict)
            else:
                for (a, t), net in model.predictors.items():
                    for i, p in enumerate(net.params):
                        p[...] = data[f"qh_{a}_{t}_{i}"]
                for (a, t), net in model.iqn.items():
                    for i, p in enumerate(net.params):
                        p[...] = data[f"iqn_{a}_{t}_{i}"]
        return model
