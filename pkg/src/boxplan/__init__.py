"""Selective model-based value expansion with interval uncertainty inference."""

from .core import (
    BoundingBox,
    Interval,
    InvalidInputError,
    box_from_point,
    box_hull,
    box_shift,
    box_width,
    draw_index,
    rng_from_seed,
    spawn_rng,
)
from .planning import (
    PlanDiagnostics,
    PlannerConfig,
    SelectivePlanner,
    Transition,
    softmin_weights,
    td_target,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "Interval",
    "InvalidInputError",
    "PlanDiagnostics",
    "PlannerConfig",
    "SelectivePlanner",
    "Transition",
    "box_from_point",
    "box_hull",
    "box_shift",
    "box_width",
    "draw_index",
    "rng_from_seed",
    "softmin_weights",
    "spawn_rng",
    "td_target",
    "__version__",
]
