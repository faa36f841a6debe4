"""Controlled synthetic datasets with ground-truth spatial clusters.

Nodes of a supplied street graph are clustered geographically with k-means;
each cluster gets Gaussian static features (cluster-specific means, equal
variance) and a Fourier-based monthly series (cluster-specific offset,
amplitudes, integer frequencies and phases) with i.i.d. per-timestep node
noise, clamped at zero so series remain count-like.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import Dataset
from .graph import StreetGraph
from .metrics import kmeans

SYNTH_START_MONTH = (2005, 1)


@dataclass
class SynthConfig:
    k_clusters: int = 12
    n_static: int = 11
    n_timesteps: int = 144
    static_mean_range: tuple[float, float] = (0.0, 10.0)
    static_sigma: float = 1.0
    n_harmonics: int = 3
    amplitude_range: tuple[float, float] = (0.5, 2.5)
    offset_range: tuple[float, float] = (6.0, 12.0)
    frequency_range: tuple[int, int] = (1, 6)  # integer cycles per series
    noise_sigma: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k_clusters < 2:
            raise ValueError("k_clusters must be >= 2")
        if min(self.n_static, self.n_timesteps) < 1:
            raise ValueError("n_static and n_timesteps must be >= 1")
        for name in ("static_mean_range", "amplitude_range", "offset_range"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} must be a non-degenerate interval")
        if self.frequency_range[0] < 1 or self.frequency_range[0] > self.frequency_range[1]:
            raise ValueError("frequency_range must be [lo, hi] with 1 <= lo <= hi")
        if self.static_sigma < 0 or self.noise_sigma < 0:
            raise ValueError("sigma values must be >= 0")
        if self.n_harmonics < 0:
            raise ValueError("n_harmonics must be >= 0")

    def to_dict(self) -> dict:
        return {
            "k_clusters": self.k_clusters,
            "n_static": self.n_static,
            "n_timesteps": self.n_timesteps,
            "static_mean_range": list(self.static_mean_range),
            "static_sigma": self.static_sigma,
            "n_harmonics": self.n_harmonics,
            "amplitude_range": list(self.amplitude_range),
            "offset_range": list(self.offset_range),
            "frequency_range": list(self.frequency_range),
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        kwargs = dict(d)
        for name in ("static_mean_range", "amplitude_range", "offset_range", "frequency_range"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)


def _rng(config: SynthConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=config.seed, spawn_key=(stream,)))


def spatial_clusters(graph: StreetGraph, k: int, seed: int) -> np.ndarray:
    """Geographic k-means over (lon, lat); every cluster non-empty."""
    if k > graph.n:
        raise ValueError(f"k={k} exceeds node count {graph.n}")
    return kmeans(graph.coords(), k, seed).labels


def cluster_means(k: int, config: SynthConfig) -> np.ndarray:
    """Per-(cluster, feature) Gaussian means, uniform over static_mean_range."""
    lo, hi = config.static_mean_range
    u = _rng(config, 1).random((k, config.n_static))
    return lo + (hi - lo) * u


def gen_static(labels: np.ndarray, config: SynthConfig) -> np.ndarray:
    """Static features ~ Normal(mu[cluster], static_sigma^2), deterministic per seed."""
    labels = np.asarray(labels, dtype=np.int64)
    k = int(labels.max()) + 1
    rng = _rng(config, 1)
    lo, hi = config.static_mean_range
    mu = lo + (hi - lo) * rng.random((k, config.n_static))
    eps = rng.normal(0.0, config.static_sigma, size=(len(labels), config.n_static))
    return mu[labels] + eps


def base_patterns(k: int, config: SynthConfig) -> np.ndarray:
    """Cluster base series b_c(t) = offset_c + sum_h A_ch sin(2 pi f_ch t / T + phi_ch)."""
    rng = _rng(config, 2)
    t_axis = np.arange(config.n_timesteps)
    lo, hi = config.offset_range
    offsets = lo + (hi - lo) * rng.random(k)
    h = config.n_harmonics
    a_lo, a_hi = config.amplitude_range
    amps = a_lo + (a_hi - a_lo) * rng.random((k, h))
    freqs = rng.integers(config.frequency_range[0], config.frequency_range[1] + 1, size=(k, h))
    phases = rng.random((k, h)) * 2.0 * np.pi
    base = np.tile(offsets[:, None], (1, config.n_timesteps))
    for c in range(k):
        for j in range(h):
            base[c] += amps[c, j] * np.sin(
                2.0 * np.pi * freqs[c, j] * t_axis / config.n_timesteps + phases[c, j]
            )
    return base


def gen_dynamic(labels: np.ndarray, config: SynthConfig) -> np.ndarray:
    """Node series = max(0, b_cluster(t) + eps), eps iid Normal(0, noise_sigma^2)."""
    labels = np.asarray(labels, dtype=np.int64)
    k = int(labels.max()) + 1
    base = base_patterns(k, config)
    rng = _rng(config, 3)
    eps = rng.normal(0.0, config.noise_sigma, size=(len(labels), config.n_timesteps))
    return np.maximum(base[labels] + eps, 0.0)


def synthetic_time_axis(config: SynthConfig) -> list[tuple[int, int]]:
    y, m = SYNTH_START_MONTH
    axis = []
    for _ in range(config.n_timesteps):
        axis.append((y, m))
        m += 1
        if m > 12:
            y, m = y + 1, 1
    return axis


def generate(graph: StreetGraph, config: SynthConfig) -> Dataset:
    """Full synthetic dataset over the supplied graph, labels attached as ground truth."""
    labels = spatial_clusters(graph, config.k_clusters, config.seed)
    static = gen_static(labels, config)
    dynamic = gen_dynamic(labels, config)
    return Dataset(
        graph=graph,
        static=static,
        static_names=[f"static_{j + 1:02d}" for j in range(config.n_static)],
        dynamic=dynamic,
        time_axis=synthetic_time_axis(config),
        labels=labels,
    )
