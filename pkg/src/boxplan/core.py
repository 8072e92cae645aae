"""Shared numeric primitives: intervals, bounding boxes, and seeded randomness.

Boxes are closed per-dimension intervals over observation vectors; they are
the carrier for all interval inference in the planner.  All randomness flows
through explicitly passed ``numpy.random.Generator`` streams so that a trial
is a pure function of its seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvalidInputError(ValueError):
    """Raised when an operation receives numerically invalid arguments."""


@dataclass(frozen=True)
class Interval:
    """Closed scalar interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise InvalidInputError(f"non-finite interval endpoints ({self.lo}, {self.hi})")
        if self.lo > self.hi:
            raise InvalidInputError(f"interval lower bound {self.lo} exceeds upper bound {self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def shift(self, offset: float) -> "Interval":
        return Interval(self.lo + offset, self.hi + offset)


def _as_vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"expected a 1-D observation vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("observation vector contains non-finite entries")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class BoundingBox:
    """Per-dimension closed intervals [lower[d], upper[d]] over observations.

    A point box has ``lower == upper``.  Instances are immutable and safe to
    share across threads.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", _as_vector(self.lower))
        object.__setattr__(self, "upper", _as_vector(self.upper))
        if self.lower.shape != self.upper.shape:
            raise InvalidInputError(
                f"box bound dimensions differ: {self.lower.shape} vs {self.upper.shape}"
            )
        if np.any(self.lower > self.upper):
            raise InvalidInputError("box has lower[d] > upper[d] in some dimension")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=np.float64)
        return bool(np.all(self.lower <= p) and np.all(p <= self.upper))

    def dim_interval(self, d: int) -> Interval:
        return Interval(float(self.lower[d]), float(self.upper[d]))


def box_from_point(point) -> BoundingBox:
    """Degenerate box containing exactly the given point."""
    v = _as_vector(point)
    return BoundingBox(v, v)


def box_hull(a: BoundingBox, b: BoundingBox) -> BoundingBox:
    """Smallest box containing both inputs (per-dimension min/max)."""
    if a.dim != b.dim:
        raise InvalidInputError(f"box dimension mismatch: {a.dim} vs {b.dim}")
    return BoundingBox(np.minimum(a.lower, b.lower), np.maximum(a.upper, b.upper))


def box_width(box: BoundingBox) -> np.ndarray:
    """Per-dimension widths, all >= 0."""
    return box.upper - box.lower


def box_shift(box: BoundingBox, offset) -> BoundingBox:
    """Translate both bounds; used to add predicted deltas to a state box."""
    off = np.asarray(offset, dtype=np.float64)
    return BoundingBox(box.lower + off, box.upper + off)


def rng_from_seed(seed: int) -> np.random.Generator:
    """Root random stream for one trial; identical seeds give identical draws."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent substream deterministically derived from (seed, keys)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=keys)))


def draw_index(rng: np.random.Generator, n: int) -> int:
    """Uniform draw from {0, ..., n-1}.

    Canonical form shared by the python and compiled paths so both consume
    one double per draw from the same stream.
    """
    i = int(rng.random() * n)
    return n - 1 if i >= n else i
