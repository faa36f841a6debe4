from __future__ import annotations

import csv
import warnings
from pathlib import Path

import numpy as np
import pytest

from urbanfuse import pipeline as pl
from urbanfuse.data import Dataset
from urbanfuse.graph import StreetGraph, random_geometric_graph
from urbanfuse.synth import SynthConfig
from urbanfuse.tsne import TsneConfig

warnings.filterwarnings("ignore", message="constant column")


@pytest.fixture
def toy_graph() -> StreetGraph:
    """6-node graph with one degree-3 node and no isolates."""
    edges = np.array([[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [0, 5], [1, 4]])
    rng = np.random.default_rng(12)
    return StreetGraph(
        node_ids=np.arange(6),
        lon=rng.uniform(-46.7, -46.5, 6),
        lat=rng.uniform(-23.6, -23.5, 6),
        edges=edges,
    )


@pytest.fixture
def ring_graph() -> StreetGraph:
    """4-cycle; every node sees an isomorphic neighborhood."""
    return StreetGraph(
        node_ids=np.arange(4),
        lon=np.array([0.0, 1.0, 1.0, 0.0]),
        lat=np.array([0.0, 0.0, 1.0, 1.0]),
        edges=np.array([[0, 1], [1, 2], [2, 3], [0, 3]]),
    )


def small_experiment_config(seed: int = 5) -> pl.ExperimentConfig:
    return pl.ExperimentConfig(
        seed=seed,
        graph=pl.GraphConfig(n_nodes=150, seed=seed),
        synth=SynthConfig(k_clusters=4, n_timesteps=18, seed=seed),
        models=pl.ModelConfig(
            hidden_dim=16, latent_static=4, latent_dynamic=8, latent_fused=8, epochs=60
        ),
        eval=pl.EvalConfig(k=4, seed=seed),
        tsne=TsneConfig(perplexity=12.0, iterations=300, seed=seed),
    )


@pytest.fixture(scope="session")
def small_session(tmp_path_factory) -> "pl.Session":
    """One fully materialized tiny synthetic session shared across tests."""
    out = tmp_path_factory.mktemp("sessions")
    return pl.run_synthetic_experiment(small_experiment_config(), out)


REAL_FEATURES = [
    ("income_household", "BRL"),
    ("income_responsible", "BRL"),
    ("unemployment_rate", "%"),
    ("literacy_7_15", "%"),
    ("age_share_under_18", "%"),
    ("age_share_18_65", "%"),
    ("age_share_over_65", "%"),
    ("bus_stations_200m", "count"),
    ("metro_stations_200m", "count"),
    ("train_stations_200m", "count"),
    ("favela_within_500m", "flag"),
]


def write_real_miniature(root: Path, n: int = 50, months: int = 24, seed: int = 9) -> Path:
    """Schema-conformant miniature of the real dataset (11 features, monthly counts)."""
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    graph = random_geometric_graph(n, seed=seed, k_neighbors=3)
    with open(root / "nodes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "lon", "lat"])
        for i in range(n):
            w.writerow([i, repr(float(graph.lon[i])), repr(float(graph.lat[i]))])
    with open(root / "edges.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["src", "dst"])
        for a, b in graph.edges:
            w.writerow([int(a), int(b)])
    cont = rng.uniform(0, 1, size=(n, 7)) * [5000, 4000, 30, 100, 40, 70, 25]
    counts = rng.integers(0, 6, size=(n, 3))
    flag = rng.integers(0, 2, size=(n, 1))
    static = np.hstack([cont, counts, flag])
    with open(root / "static.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id"] + [name for name, _ in REAL_FEATURES])
        for i in range(n):
            w.writerow([i] + [repr(float(v)) for v in static[i]])
    dynamic = rng.poisson(3.0, size=(n, months)).astype(float)
    headers = []
    y, m = 2006, 1
    for _ in range(months):
        headers.append(f"{y:04d}-{m:02d}")
        m += 1
        if m > 12:
            y, m = y + 1, 1
    with open(root / "dynamic.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id"] + headers)
        for i in range(n):
            w.writerow([i] + [repr(float(v)) for v in dynamic[i]])
    return root


@pytest.fixture
def real_miniature(tmp_path) -> Path:
    return write_real_miniature(tmp_path / "real")


@pytest.fixture(scope="session")
def real_session(tmp_path_factory):
    """Real-schema miniature run end to end, plus a service client over it."""
    from fastapi.testclient import TestClient

    from urbanfuse.service.app import create_app

    base = tmp_path_factory.mktemp("real_session")
    data_dir = write_real_miniature(base / "data", n=60, months=24, seed=4)
    cfg = pl.ExperimentConfig(
        seed=4,
        models=pl.ModelConfig(
            hidden_dim=12, latent_static=4, latent_dynamic=6, latent_fused=6, epochs=40
        ),
        eval=pl.EvalConfig(k=3, seed=4),
        tsne=TsneConfig(perplexity=10.0, iterations=250, seed=4),
    )
    session = pl.run_real_experiment(data_dir, cfg, base / "out")
    return session, TestClient(create_app(session.root))
