"""Small feed-forward models trained online with adaptive moment estimation.

Two architectures share a ReLU hidden layer and linear outputs:

* :class:`QuantileHeadNet` predicts the expected outcome plus low/high
  quantiles trained by the pinball loss; its monotone activations allow
  layer-by-layer interval propagation, with outcome bounds read from the
  quantile heads.
* :class:`IqnNet` maps a sampled quantile level through a cosine embedding
  to the corresponding outcome quantile, so drawing a uniform level samples
  the learned outcome distribution.

Gradients are analytic (verified against finite differences in the tests);
batches are tiny so plain numpy is plenty.
"""
from __future__ import annotations

import math

import numpy as np

from ..core import BoundingBox, Interval

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def pinball_loss(residual, quantile: float):
    """rho_kappa(u) = u * (kappa - 1{u < 0}) for residual u = y - prediction."""
    u = np.asarray(residual, dtype=np.float64)
    return u * (quantile - (u < 0.0))


class Adam:
    def __init__(self, params: list[np.ndarray], stepsize: float = 1e-3):
        self.stepsize = stepsize
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        bias1 = 1.0 - ADAM_BETA1**self.t
        bias2 = 1.0 - ADAM_BETA2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m += (1.0 - ADAM_BETA1) * (g - m)
            v += (1.0 - ADAM_BETA2) * (g * g - v)
            p -= self.stepsize * (m / bias1) / (np.sqrt(v / bias2) + ADAM_EPS)


def _linear_bounds(W: np.ndarray, b: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Per-unit output interval of W x + b over the input box: positive
    weights take the input's upper end, negative its lower."""
    w_pos = np.maximum(W, 0.0)
    w_neg = np.minimum(W, 0.0)
    return w_pos @ lo + w_neg @ hi + b, w_pos @ hi + w_neg @ lo + b


class QuantileHeadNet:
    """Hidden ReLU layer feeding three linear heads: mean, low and high quantile."""

    def __init__(
        self,
        in_dim: int,
        hidden: int,
        rng: np.random.Generator,
        q_low: float = 0.05,
        q_high: float = 0.95,
        stepsize: float = 1e-3,
    ):
        self.q_low = q_low
        self.q_high = q_high
        scale1 = math.sqrt(2.0 / in_dim)
        self.W1 = rng.normal(0.0, scale1, size=(hidden, in_dim))
        self.b1 = np.zeros(hidden)
        scale2 = math.sqrt(1.0 / hidden)
        self.W2 = rng.normal(0.0, scale2, size=(3, hidden))
        self.b2 = np.zeros(3)
        self.opt = Adam(self.params, stepsize)

    @property
    def params(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.W2, self.b2]

    def forward(self, x) -> np.ndarray:
        """(mean, low quantile, high quantile) at a single input."""
        return self.forward_batch(np.asarray(x, dtype=np.float64)[None, :])[0]

    def forward_batch(self, X: np.ndarray) -> np.ndarray:
        H = np.maximum(X @ self.W1.T + self.b1, 0.0)
        return H @ self.W2.T + self.b2

    def predict(self, x) -> float:
        return float(self.forward(x)[0])

    def loss_and_grads(self, X: np.ndarray, y: np.ndarray):
        """Equally weighted squared error over the mean head plus pinball
        losses over the two quantile heads; returns (loss, grads)."""
        B = X.shape[0]
        Z1 = X @ self.W1.T + self.b1
        H = np.maximum(Z1, 0.0)
        out = H @ self.W2.T + self.b2
        res_mean = out[:, 0] - y
        res_low = y - out[:, 1]
        res_high = y - out[:, 2]
        loss = (
            float(np.mean(res_mean**2))
            + float(np.mean(pinball_loss(res_low, self.q_low)))
            + float(np.mean(pinball_loss(res_high, self.q_high)))
        )
        d_out = np.empty_like(out)
        d_out[:, 0] = 2.0 * res_mean / B
        d_out[:, 1] = ((res_low < 0.0) - self.q_low) / B
        d_out[:, 2] = ((res_high < 0.0) - self.q_high) / B
        dW2 = d_out.T @ H
        db2 = d_out.sum(axis=0)
        dH = d_out @ self.W2
        dZ1 = dH * (Z1 > 0.0)
        dW1 = dZ1.T @ X
        db1 = dZ1.sum(axis=0)
        return loss, [dW1, db1, dW2, db2]

    def train_batch(self, X: np.ndarray, y: np.ndarray) -> float:
        loss, grads = self.loss_and_grads(X, y)
        self.opt.step(self.params, grads)
        return loss

    def head_bounds(self, box: BoundingBox) -> tuple[Interval, Interval, Interval]:
        """Interval propagation: linear bounds per unit, monotone activation
        applied to both endpoints, then linear bounds per head."""
        lo1, hi1 = _linear_bounds(self.W1, self.b1, box.lower, box.upper)
        lo1 = np.maximum(lo1, 0.0)
        hi1 = np.maximum(hi1, 0.0)
        lo2, hi2 = _linear_bounds(self.W2, self.b2, lo1, hi1)
        return tuple(Interval(float(lo2[i]), float(hi2[i])) for i in range(3))

    def output_bounds(self, box: BoundingBox) -> Interval:
        return self.head_bounds(box)[0]

    def outcome_bounds(self, box: BoundingBox) -> Interval:
        """Lower bound of the low-quantile head, upper of the high-quantile head."""
        _, low, high = self.head_bounds(box)
        if low.lo > high.hi:  # crossed quantile heads; keep the interval valid
            return Interval(high.hi, low.lo)
        return Interval(low.lo, high.hi)


class IqnNet:
    """Implicit quantile network: output at a sampled quantile level.

    The level u is embedded as cos(pi * i * u), i = 0..embed-1, mixed through
    a ReLU layer, and multiplied elementwise with the state embedding.
    """

    def __init__(
        self,
        in_dim: int,
        hidden: int,
        rng: np.random.Generator,
        embed: int = 8,
        stepsize: float = 1e-3,
        num_quantile_samples: int = 8,
    ):
        self.embed = embed
        self.num_quantile_samples = num_quantile_samples
        self.W1 = rng.normal(0.0, math.sqrt(2.0 / in_dim), size=(hidden, in_dim))
        self.b1 = np.zeros(hidden)
        self.Wq = rng.normal(0.0, math.sqrt(2.0 / embed), size=(hidden, embed))
        self.bq = np.zeros(hidden)
        self.Wo = rng.normal(0.0, math.sqrt(1.0 / hidden), size=hidden)
        self.bo = np.zeros(1)
        self.opt = Adam(self.params, stepsize)
        self._i = np.arange(embed, dtype=np.float64)

    @property
    def params(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.Wq, self.bq, self.Wo, self.bo]

    def _embed(self, levels: np.ndarray) -> np.ndarray:
        return np.cos(math.pi * np.outer(levels, self._i))

    def quantile_values(self, x, levels) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        levels = np.atleast_1d(np.asarray(levels, dtype=np.float64))
        psi = np.maximum(self.W1 @ x + self.b1, 0.0)
        phi = np.maximum(self._embed(levels) @ self.Wq.T + self.bq, 0.0)
        return (phi * psi) @ self.Wo + self.bo[0]

    def quantile_value(self, x, level: float) -> float:
        return float(self.quantile_values(x, [level])[0])

    def sample(self, x, rng: np.random.Generator) -> float:
        """Draw u ~ Uniform(0,1) and return the output at that level."""
        return self.quantile_value(x, rng.random())

    def sample_many(self, x, k: int, rng: np.random.Generator) -> np.ndarray:
        return self.quantile_values(x, rng.random(k))

    def loss_and_grads(self, X: np.ndarray, y: np.ndarray, levels: np.ndarray):
        """Mean pinball loss over per-sample quantile levels (B, nq)."""
        B, nq = levels.shape
        Z1 = X @ self.W1.T + self.b1  # (B, hid)
        psi = np.maximum(Z1, 0.0)
        E = np.cos(math.pi * levels[:, :, None] * self._i)  # (B, nq, embed)
        Zq = E @ self.Wq.T + self.bq  # (B, nq, hid)
        phi = np.maximum(Zq, 0.0)
        G = phi * psi[:, None, :]
        out = G @ self.Wo + self.bo[0]  # (B, nq)
        res = y[:, None] - out
        loss = float(np.mean(pinball_loss(res, levels)))
        d_out = ((res < 0.0) - levels) / (B * nq)
        dWo = np.einsum("bq,bqh->h", d_out, G)
        dbo = np.array([d_out.sum()])
        dG = d_out[:, :, None] * self.Wo
        dphi = dG * psi[:, None, :]
        dpsi = (dG * phi).sum(axis=1)
        dZq = dphi * (Zq > 0.0)
        dWq = np.einsum("bqh,bqe->he", dZq, E)
        dbq = dZq.sum(axis=(0, 1))
        dZ1 = dpsi * (Z1 > 0.0)
        dW1 = dZ1.T @ X
        db1 = dZ1.sum(axis=0)
        return loss, [dW1, db1, dWq, dbq, dWo, dbo]

    def train_batch(self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> float:
        levels = rng.random((X.shape[0], self.num_quantile_samples))
        loss, grads = self.loss_and_grads(X, y, levels)
        self.opt.step(self.params, grads)
        return loss
