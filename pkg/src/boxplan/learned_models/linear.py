"""Linear models with interval output/outcome bound queries.

An output bound covers the model's own predictions over an uncertain input
(every feature pushed to its extreme consistent with its sign); an outcome
bound additionally covers the spread of real outcomes via the extreme
residuals observed so far.  Features declared as a one-hot group contribute
their max/min single weight instead of the naive sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import BoundingBox, Interval


class NoDataError(RuntimeError):
    """An outcome bound was requested before any training example was seen."""


@dataclass(frozen=True)
class IdentityFeature:
    """phi(x) = x[dim]; its box extrema are the box bounds of that dimension."""

    dim: int

    def value(self, x) -> float:
        return float(x[self.dim])

    def bounds(self, box: BoundingBox) -> tuple[float, float]:
        return float(box.lower[self.dim]), float(box.upper[self.dim])


class LinearModel:
    """Prediction sum_i theta_i * phi_i(x) with residual tracking.

    ``one_hot_groups`` lists index tuples of features known to form a one-hot
    encoding (exactly one of them is 1, the rest 0).  Residual extrema may be
    tracked globally or binned along one input dimension.
    """

    def __init__(self, features, weights, one_hot_groups=(), bins=0, bin_dim=0, bin_range=(0.0, 1.0)):
        self.features = list(features)
        self.weights = np.asarray(weights, dtype=np.float64)
        if len(self.features) != self.weights.shape[0]:
            raise ValueError("feature/weight count mismatch")
        self.one_hot_groups = [tuple(g) for g in one_hot_groups]
        grouped = set()
        for g in self.one_hot_groups:
            grouped.update(g)
        self._ungrouped = [i for i in range(len(self.features)) if i not in grouped]
        self.num_observed = 0
        self.residual_min = math.inf
        self.residual_max = -math.inf
        self.bins = bins
        self.bin_dim = bin_dim
        self.bin_range = bin_range
        if bins:
            self._bin_min = np.full(bins, math.inf)
            self._bin_max = np.full(bins, -math.inf)

    def predict(self, x) -> float:
        return float(sum(w * f.value(x) for w, f in zip(self.weights, self.features)))

    def _bin_of(self, value: float) -> int:
        lo, hi = self.bin_range
        i = int((value - lo) / (hi - lo) * self.bins)
        return min(max(i, 0), self.bins - 1)

    def observe(self, x, y: float) -> None:
        """Record the residual of a real outcome; does not change weights."""
        z = float(y) - self.predict(x)
        self.num_observed += 1
        self.residual_min = min(self.residual_min, z)
        self.residual_max = max(self.residual_max, z)
        if self.bins:
            b = self._bin_of(float(x[self.bin_dim]))
            self._bin_min[b] = min(self._bin_min[b], z)
            self._bin_max[b] = max(self._bin_max[b], z)

    def output_bounds(self, box: BoundingBox) -> Interval:
        hi = 0.0
        lo = 0.0
        for i in self._ungrouped:
            f_lo, f_hi = self.features[i].bounds(box)
            w = self.weights[i]
            if w >= 0.0:
                hi += w * f_hi
                lo += w * f_lo
            else:
                hi += w * f_lo
                lo += w * f_hi
        for group in self.one_hot_groups:
            # Exactly one member is active; only members whose upper feature
            # bound allows activation can contribute.
            active = [i for i in group if self.features[i].bounds(box)[1] > 0.0]
            if not active:
                active = list(group)
            ws = self.weights[list(active)]
            hi += float(ws.max())
            lo += float(ws.min())
        return Interval(lo, hi)

    def _residual_extrema(self, box: BoundingBox) -> tuple[float, float]:
        if self.num_observed == 0:
            raise NoDataError("no residuals observed yet")
        if not self.bins:
            return self.residual_min, self.residual_max
        lo_b = self._bin_of(float(box.lower[self.bin_dim]))
        hi_b = self._bin_of(float(box.upper[self.bin_dim]))
        z_min = float(self._bin_min[lo_b : hi_b + 1].min())
        z_max = float(self._bin_max[lo_b : hi_b + 1].max())
        if not (math.isfinite(z_min) and math.isfinite(z_max)):
            # No data in the intersecting bins; fall back to global extrema.
            return self.residual_min, self.residual_max
        return z_min, z_max

    def outcome_bounds(self, box: BoundingBox) -> Interval:
        out = self.output_bounds(box)
        z_min, z_max = self._residual_extrema(box)
        return Interval(out.lo + z_min, out.hi + z_max)
