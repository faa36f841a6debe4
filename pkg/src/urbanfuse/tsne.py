"""Exact t-SNE for the 2-D projection views.

Dense O(n^2) formulation: per-point Gaussian bandwidths found by bisection so
each conditional distribution hits the target perplexity, symmetrized joint
affinities, Student-t low-dimensional kernel, and momentum gradient descent
with early exaggeration. Suited to desk-scale inputs (<= ~12k points).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .metrics import pairwise_euclidean

_EPS = 1e-12


@njit(cache=True)
def _tsne_gradient(y, p, exaggeration):
    """KL gradient for the Student-t embedding; exploits symmetry of p.

    Returns (grad, q_norm) with q_norm the normalizer of the t-kernel.
    """
    n = y.shape[0]
    total = 0.0
    for i in range(n):
        yi0 = y[i, 0]
        yi1 = y[i, 1]
        for j in range(i + 1, n):
            d0 = yi0 - y[j, 0]
            d1 = yi1 - y[j, 1]
            total += 2.0 / (1.0 + d0 * d0 + d1 * d1)
    inv_total = 1.0 / total
    grad = np.zeros((n, 2))
    for i in range(n):
        yi0 = y[i, 0]
        yi1 = y[i, 1]
        for j in range(i + 1, n):
            d0 = yi0 - y[j, 0]
            d1 = yi1 - y[j, 1]
            num = 1.0 / (1.0 + d0 * d0 + d1 * d1)
            g = (exaggeration * p[i, j] - num * inv_total) * num
            grad[i, 0] += g * d0
            grad[i, 1] += g * d1
            grad[j, 0] -= g * d0
            grad[j, 1] -= g * d1
    for i in range(n):
        grad[i, 0] *= 4.0
        grad[i, 1] *= 4.0
    return grad, total


@dataclass
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    learning_rate: float = 200.0
    momentum_low: float = 0.5
    momentum_high: float = 0.8
    momentum_switch: int = 250
    init_sigma: float = 1e-4
    seed: int = 0
    kl_every: int = 10  # KL trace granularity; iteration 0 and the end are always recorded

    def __post_init__(self) -> None:
        if self.iterations < 250:
            raise ValueError("iterations must be >= 250")
        if self.perplexity <= 1:
            raise ValueError("perplexity must be > 1")
        if self.kl_every < 1:
            raise ValueError("kl_every must be >= 1")

    def to_dict(self) -> dict:
        return {
            "perplexity": self.perplexity,
            "iterations": self.iterations,
            "early_exaggeration": self.early_exaggeration,
            "exaggeration_iters": self.exaggeration_iters,
            "learning_rate": self.learning_rate,
            "momentum_low": self.momentum_low,
            "momentum_high": self.momentum_high,
            "momentum_switch": self.momentum_switch,
            "init_sigma": self.init_sigma,
            "seed": self.seed,
            "kl_every": self.kl_every,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TsneConfig":
        return cls(**d)


@dataclass
class TsneResult:
    coords: np.ndarray                    # (n, 2)
    kl_trace: list[tuple[int, float]]     # (iteration, KL) samples; 0 and end included
    perplexity_error: np.ndarray          # (n,) |achieved - target| from the bisection

    @property
    def initial_kl(self) -> float:
        return self.kl_trace[0][1]

    @property
    def final_kl(self) -> float:
        return self.kl_trace[-1][1]


def _row_affinities(d2_row: np.ndarray, beta: float) -> np.ndarray:
    # shift by the min squared distance for exp stability; cancels in the ratio
    w = np.exp(-(d2_row - d2_row.min()) * beta)
    return w / w.sum()


def _row_perplexity(d2_row: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    p = _row_affinities(d2_row, beta)
    h = -(p * np.log(np.maximum(p, _EPS))).sum()
    return float(np.exp(h)), p


def conditional_probabilities(
    d2: np.ndarray, perplexity: float, tol: float = 1e-4, max_steps: int = 200
) -> tuple[np.ndarray, np.ndarray]:
    """Per-row conditional affinities matching the target perplexity.

    Bisection on the precision beta, expanding bounds by doubling first.
    Returns (P, perplexity_error); each P row sums to 1 with a zero diagonal.
    """
    n = d2.shape[0]
    p = np.zeros((n, n))
    err = np.zeros(n)
    idx = np.arange(n)
    for i in range(n):
        row = d2[i, np.concatenate([idx[:i], idx[i + 1 :]])]
        beta, lo, hi = 1.0, 0.0, np.inf
        perp, probs = _row_perplexity(row, beta)
        for _ in range(max_steps):
            if abs(perp - perplexity) <= tol:
                break
            if perp > perplexity:  # too flat: increase precision
                lo = beta
                beta = beta * 2.0 if np.isinf(hi) else 0.5 * (beta + hi)
            else:
                hi = beta
                beta = 0.5 * (beta + lo)
            perp, probs = _row_perplexity(row, beta)
        err[i] = abs(perp - perplexity)
        p[i, :i] = probs[:i]
        p[i, i + 1 :] = probs[i:]
    return p, err


def project(embedding: np.ndarray, config: TsneConfig) -> TsneResult:
    """Project to 2-D; records the KL(P||Q) trace (unexaggerated P throughout)."""
    x = np.asarray(embedding, dtype=np.float64)
    n = x.shape[0]
    if n < 10:
        raise ValueError("t-SNE requires at least 10 points")
    if not np.isfinite(x).all():
        raise ValueError("embedding contains non-finite values")
    if config.perplexity >= n / 3:
        raise ValueError(
            f"perplexity {config.perplexity} infeasible for n={n} (must be < n/3)"
        )

    d2 = pairwise_euclidean(x) ** 2
    cond, perp_err = conditional_probabilities(d2, config.perplexity)
    p = (cond + cond.T) / (2.0 * n)
    np.maximum(p, _EPS, out=p)
    np.fill_diagonal(p, 0.0)

    rng = np.random.default_rng(config.seed)
    y = rng.normal(0.0, config.init_sigma, size=(n, 2))
    update = np.zeros_like(y)
    gains = np.ones_like(y)  # per-coordinate adaptive gains, reference-style
    kl_trace: list[tuple[int, float]] = []

    def student_kernel(y_cur: np.ndarray) -> np.ndarray:
        """Unnormalized Student-t affinities 1/(1 + |y_i - y_j|^2), zero diagonal."""
        sq = (y_cur**2).sum(axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (y_cur @ y_cur.T)
        d2 += 1.0
        np.maximum(d2, 1.0, out=d2)
        num = 1.0 / d2
        np.fill_diagonal(num, 0.0)
        return num

    mask = p > 0
    p_masked = p[mask]

    def kl_of(y_cur: np.ndarray) -> float:
        num = student_kernel(y_cur)
        q = np.maximum(num[mask] / num.sum(), _EPS)
        return float((p_masked * np.log(p_masked / q)).sum())

    for it in range(config.iterations):
        exaggeration = config.early_exaggeration if it < config.exaggeration_iters else 1.0
        grad, total = _tsne_gradient(y, p, exaggeration)
        if it % config.kl_every == 0:
            q = np.maximum(student_kernel(y) / total, _EPS)
            kl = float((p_masked * np.log(p_masked / q[mask])).sum())
            kl_trace.append((it, kl))
        momentum = (
            config.momentum_low if it < config.momentum_switch else config.momentum_high
        )
        same_sign = (grad > 0) == (update > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        update = momentum * update - config.learning_rate * gains * grad
        y = y + update
    kl_trace.append((config.iterations, kl_of(y)))
    return TsneResult(coords=y, kl_trace=kl_trace, perplexity_error=perp_err)
