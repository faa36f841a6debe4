"""Regenerate the frontend test fixtures from a deterministic miniature session.

Runs the real pipeline on a real-schema miniature dataset, captures the actual
service responses with the FastAPI test client, and copies the session CSVs so
the frontend tests can recompute every displayed number independently.

Usage: python3 scripts/make_frontend_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from fastapi.testclient import TestClient

from conftest import write_real_miniature
from urbanfuse import pipeline as pl
from urbanfuse.service.app import create_app
from urbanfuse.tsne import TsneConfig

N_SELECTIONS = 20
OUT = REPO / "frontend" / "tests" / "fixtures"


def main() -> None:
    warnings.filterwarnings("ignore")
    rng = np.random.default_rng(2024)
    with tempfile.TemporaryDirectory() as td:
        base = Path(td)
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
        client = TestClient(create_app(session.root))

        if OUT.exists():
            shutil.rmtree(OUT)
        (OUT / "session").mkdir(parents=True)
        for name in ("static.csv", "dynamic.csv", "nodes.csv", "normalization.json"):
            shutil.copy(session.root / "dataset" / name, OUT / "session" / name)

        def dump(name: str, payload) -> None:
            (OUT / name).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")

        dump("meta.json", client.get("/session/meta").json())
        dump("projections.json", client.get("/projections").json())
        dump("map.json", client.get("/map").json())
        dump("stats_empty.json", client.post("/stats", json={"node_ids": []}).json())

        all_ids = [int(i) for i in session.dataset.graph.node_ids]
        selections = []
        stats_payloads = []
        for i in range(N_SELECTIONS):
            size = int(rng.integers(1, 40))
            ids = sorted(int(v) for v in rng.choice(all_ids, size=size, replace=False))
            selections.append(ids)
            stats_payloads.append(
                client.post("/stats", json={"node_ids": ids, "source_model": "m2"}).json()
            )
        dump("selections.json", selections)
        dump("stats_selections.json", stats_payloads)

        node_ids = [all_ids[0], all_ids[17]]
        dump("nodes_detail.json", {str(i): client.get(f"/node/{i}").json() for i in node_ids})
        print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
