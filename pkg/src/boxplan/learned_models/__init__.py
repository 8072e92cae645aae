"""Learned per-dimension predictors: linear models, incremental regression
trees, and small feed-forward networks, each with interval (output and
outcome) bound queries."""

from .bundles import (
    GoRightFullStateAdapter,
    LearnedModelSet,
    ObservationAdapter,
    make_adapter,
)
from .linear import IdentityFeature, LinearModel, NoDataError
from .networks import IqnNet, QuantileHeadNet, pinball_loss
from .trees import RegressionTree

__all__ = [
    "GoRightFullStateAdapter",
    "IdentityFeature",
    "IqnNet",
    "LearnedModelSet",
    "LinearModel",
    "NoDataError",
    "ObservationAdapter",
    "QuantileHeadNet",
    "RegressionTree",
    "make_adapter",
    "pinball_loss",
]
