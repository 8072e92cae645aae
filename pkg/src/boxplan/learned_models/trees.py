"""Incremental regression trees with constant leaf models.

Every observation updates the statistics of the leaf it routes to; split
evaluation runs only every ``split_period`` observations.  A leaf splits on
the candidate threshold (an observed input value) with the best standard
deviation reduction when a Hoeffding bound says it beats the runner-up with
the configured confidence, or when the bound is below the tie threshold.
Leaves store the sample mean and variance (for sampling, a Normal draw, not
clipped to the observed outcome range) and the min/max observed outcome
(the leaf's outcome bounds).  Box queries recurse through the tree, taking
both children where the box straddles a threshold.
"""
from __future__ import annotations

import math

import numpy as np

from ..core import BoundingBox, Interval
from .linear import NoDataError


class _Leaf:
    __slots__ = ("count", "mean", "m2", "y_min", "y_max", "xs", "ys")

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.y_min = math.inf
        self.y_max = -math.inf
        self.xs: list[np.ndarray] = []
        self.ys: list[float] = []

    def add(self, x: np.ndarray, y: float) -> None:
        self.count += 1
        delta = y - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (y - self.mean)
        self.y_min = min(self.y_min, y)
        self.y_max = max(self.y_max, y)
        self.xs.append(x)
        self.ys.append(y)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0


class _Split:
    __slots__ = ("dim", "threshold", "left", "right")

    def __init__(self, dim: int, threshold: float, left, right):
        self.dim = dim
        self.threshold = threshold
        self.left = left
        self.right = right


def _best_two_sdr(leaf: _Leaf):
    """Best and second-best standard-deviation reduction over all candidate
    (dimension, observed-value) threshold features; returns
    (best_sdr, second_sdr, best_dim, best_threshold)."""
    n = leaf.count
    ys = np.asarray(leaf.ys)
    xs = np.asarray(leaf.xs)
    total_sd = math.sqrt(max(ys.var(), 0.0))
    best = (-math.inf, -1, 0.0)
    second = -math.inf
    for d in range(xs.shape[1]):
        order = np.argsort(xs[:, d], kind="stable")
        xv = xs[order, d]
        yv = ys[order]
        csum = np.cumsum(yv)
        csq = np.cumsum(yv * yv)
        # Candidate thresholds: each observed value whose right side is nonempty.
        edges = np.flatnonzero(xv[:-1] < xv[1:])
        if edges.size == 0:
            continue
        nl = edges + 1.0
        nr = n - nl
        sl = csum[edges]
        sq_l = csq[edges]
        var_l = np.maximum(sq_l / nl - (sl / nl) ** 2, 0.0)
        sr = csum[-1] - sl
        sq_r = csq[-1] - sq_l
        var_r = np.maximum(sq_r / nr - (sr / nr) ** 2, 0.0)
        sdr = total_sd - (nl / n) * np.sqrt(var_l) - (nr / n) * np.sqrt(var_r)
        top = int(np.argmax(sdr))
        if sdr[top] > best[0]:
            if best[0] > second:
                second = best[0]
            best = (float(sdr[top]), d, float(xv[edges[top]]))
        elif sdr[top] > second:
            second = float(sdr[top])
        if edges.size > 1:
            rest = np.delete(sdr, top)
            second = max(second, float(rest.max()))
    return best[0], second, best[1], best[2]


class RegressionTree:
    """Streaming binary regression tree; thresholds route x[dim] <= t left."""

    def __init__(
        self,
        max_leaves: int = 100,
        split_period: int = 100,
        confidence: float = 0.95,
        tie_threshold: float = 0.05,
    ):
        self.max_leaves = max_leaves
        self.split_period = split_period
        self.delta = 1.0 - confidence
        self.tie_threshold = tie_threshold
        self.root = _Leaf()
        self.num_leaves = 1
        self.num_observed = 0

    @property
    def num_nodes(self) -> int:
        def count(node) -> int:
            if isinstance(node, _Leaf):
                return 1
            return 1 + count(node.left) + count(node.right)

        return count(self.root)

    def _route(self, x) -> _Leaf:
        node = self.root
        while isinstance(node, _Split):
            node = node.left if x[node.dim] <= node.threshold else node.right
        return node

    def observe(self, x, y: float) -> None:
        x = np.asarray(x, dtype=np.float64)
        leaf = self._route(x)
        leaf.add(x, float(y))
        self.num_observed += 1
        if self.num_observed % self.split_period == 0:
            self._maybe_split(leaf)

    def _maybe_split(self, leaf: _Leaf) -> None:
        if self.num_leaves >= self.max_leaves or leaf.count < 2:
            return
        best_sdr, second_sdr, dim, threshold = _best_two_sdr(leaf)
        if best_sdr <= 1e-12:
            return
        eps = math.sqrt(math.log(1.0 / self.delta) / (2.0 * leaf.count))
        ratio = max(second_sdr, 0.0) / best_sdr
        if ratio < 1.0 - eps or eps < self.tie_threshold:
            self._execute_split(leaf, dim, threshold)

    def _execute_split(self, leaf: _Leaf, dim: int, threshold: float) -> None:
        left, right = _Leaf(), _Leaf()
        for x, y in zip(leaf.xs, leaf.ys):
            (left if x[dim] <= threshold else right).add(x, y)
        split = _Split(dim, threshold, left, right)
        if leaf is self.root:
            self.root = split
        else:
            self._replace(self.root, leaf, split)
        self.num_leaves += 1

    def _replace(self, node, leaf: _Leaf, split: _Split) -> None:
        if node.left is leaf:
            node.left = split
        elif isinstance(node.left, _Split):
            self._replace(node.left, leaf, split)
        if node.right is leaf:
            node.right = split
        elif isinstance(node.right, _Split):
            self._replace(node.right, leaf, split)

    # -- point queries ---------------------------------------------------------

    def _leaf_checked(self, x) -> _Leaf:
        leaf = self._route(np.asarray(x, dtype=np.float64))
        if leaf.count == 0:
            raise NoDataError("tree has no data routed to this leaf yet")
        return leaf

    def predict(self, x) -> float:
        return self._leaf_checked(x).mean

    def sample(self, x, rng) -> float:
        leaf = self._leaf_checked(x)
        return float(rng.normal(leaf.mean, math.sqrt(leaf.variance)))

    def variance_at(self, x) -> float:
        return self._leaf_checked(x).variance

    def range_at(self, x) -> Interval:
        leaf = self._leaf_checked(x)
        return Interval(leaf.y_min, leaf.y_max)

    # -- box queries -------------------------------------------------------------

    def _box_bounds(self, node, box: BoundingBox, outcome: bool) -> tuple[float, float]:
        if isinstance(node, _Leaf):
            if node.count == 0:
                raise NoDataError("tree has no data routed to this leaf yet")
            if outcome:
                return node.y_min, node.y_max
            return node.mean, node.mean
        if box.upper[node.dim] <= node.threshold:
            return self._box_bounds(node.left, box, outcome)
        if box.lower[node.dim] > node.threshold:
            return self._box_bounds(node.right, box, outcome)
        l_lo, l_hi = self._box_bounds(node.left, box, outcome)
        r_lo, r_hi = self._box_bounds(node.right, box, outcome)
        return min(l_lo, r_lo), max(l_hi, r_hi)

    def output_bounds(self, box: BoundingBox) -> Interval:
        """Bounds over the tree's own predictions for inputs in the box."""
        lo, hi = self._box_bounds(self.root, box, outcome=False)
        return Interval(lo, hi)

    def outcome_bounds(self, box: BoundingBox) -> Interval:
        """Bounds over observed outcomes for inputs in the box."""
        lo, hi = self._box_bounds(self.root, box, outcome=True)
        return Interval(lo, hi)

    # -- serialization -------------------------------------------------------------

    def to_dict(self) -> dict:
        """Query-exact structural dump; stored per-leaf examples are dropped,
        so a restored tree predicts identically but restarts its split
        candidate pool from new data."""

        def encode(node):
            if isinstance(node, _Leaf):
                return {
                    "leaf": True,
                    "count": node.count,
                    "mean": node.mean,
                    "m2": node.m2,
                    "y_min": node.y_min,
                    "y_max": node.y_max,
                }
            return {
                "leaf": False,
                "dim": node.dim,
                "threshold": node.threshold,
                "left": encode(node.left),
                "right": encode(node.right),
            }

        return {
            "max_leaves": self.max_leaves,
            "split_period": self.split_period,
            "confidence": 1.0 - self.delta,
            "tie_threshold": self.tie_threshold,
            "num_observed": self.num_observed,
            "root": encode(self.root),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegressionTree":
        tree = cls(
            max_leaves=data["max_leaves"],
            split_period=data["split_period"],
            confidence=data["confidence"],
            tie_threshold=data["tie_threshold"],
        )
        tree.num_observed = data["num_observed"]

        def decode(d):
            if d["leaf"]:
                leaf = _Leaf()
                leaf.count = d["count"]
                leaf.mean = d["mean"]
                leaf.m2 = d["m2"]
                leaf.y_min = d["y_min"]
                leaf.y_max = d["y_max"]
                return leaf
            return _Split(d["dim"], d["threshold"], decode(d["left"]), decode(d["right"]))

        tree.root = decode(data["root"])

        def leaves(node):
            if isinstance(node, _Leaf):
                return 1
            return leaves(node.left) + leaves(node.right)

        tree.num_leaves = leaves(tree.root)
        return tree
