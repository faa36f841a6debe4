"""End-to-end orchestration: generate -> train -> evaluate -> project.

Every stage reads and writes one session directory so partial runs leave
debuggable artifacts. A stage failure aborts with the stage name attached.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import session as sess
from .data import (
    Dataset,
    load_dataset_dir,
    load_graph,
    normalize_features,
    save_dataset,
)
from .fusion import FusionSpecs, default_fusion_specs, train_all, EmbeddingSet
from .graph import StreetGraph, random_geometric_graph
from .metrics import evaluate_embedding, full_distance_matrices
from .session import MODEL_KEYS, Session, config_hash, write_eval_csv, write_json, write_projection_csv
from .synth import SynthConfig, generate
from .tsne import TsneConfig, project


class StageError(RuntimeError):
    """Pipeline stage failure; ``stage`` names the failed stage."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class GraphConfig:
    """Either CSV paths of a real street graph, or a generated geometric one."""

    nodes_path: Optional[str] = None
    edges_path: Optional[str] = None
    n_nodes: int = 2000
    k_neighbors: int = 4
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "nodes_path": self.nodes_path,
            "edges_path": self.edges_path,
            "n_nodes": self.n_nodes,
            "k_neighbors": self.k_neighbors,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GraphConfig":
        return cls(**d)


@dataclass
class ModelConfig:
    hidden_dim: int = 64
    latent_static: int = 8
    latent_dynamic: int = 32
    latent_fused: int = 32
    epochs: int = 300
    learning_rate: float = 1e-3
    m4_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "hidden_dim": self.hidden_dim,
            "latent_static": self.latent_static,
            "latent_dynamic": self.latent_dynamic,
            "latent_fused": self.latent_fused,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "m4_weights": list(self.m4_weights),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        kwargs = dict(d)
        if "m4_weights" in kwargs:
            kwargs["m4_weights"] = tuple(kwargs["m4_weights"])
        return cls(**kwargs)


@dataclass
class EvalConfig:
    k: int = 12
    seed: Optional[int] = None
    subsample_cap: Optional[int] = None

    def to_dict(self) -> dict:
        return {"k": self.k, "seed": self.seed, "subsample_cap": self.subsample_cap}

    @classmethod
    def from_dict(cls, d: dict) -> "EvalConfig":
        return cls(**d)


@dataclass
class ExperimentConfig:
    """Full config for one run; ``seed`` fans out to any unset stage seed."""

    seed: int = 0
    graph: GraphConfig = field(default_factory=GraphConfig)
    synth: Optional[SynthConfig] = None
    dataset_dir: Optional[str] = None  # real data: pre-existing CSV directory
    models: ModelConfig = field(default_factory=ModelConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    tsne: Optional[TsneConfig] = None
    normalization: str = "min-max"

    def resolved(self) -> "ExperimentConfig":
        """Fill unset stage seeds from the master seed."""
        import copy

        cfg = copy.deepcopy(self)
        if cfg.synth is None and cfg.dataset_dir is None:
            cfg.synth = SynthConfig(seed=cfg.seed)
        if cfg.graph.seed is None:
            cfg.graph.seed = cfg.seed
        if cfg.models.seed is None:
            cfg.models.seed = cfg.seed
        if cfg.eval.seed is None:
            cfg.eval.seed = cfg.seed
        if cfg.tsne is None:
            cfg.tsne = TsneConfig(seed=cfg.seed)
        return cfg

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "graph": self.graph.to_dict(),
            "synth": self.synth.to_dict() if self.synth else None,
            "dataset_dir": self.dataset_dir,
            "models": self.models.to_dict(),
            "eval": self.eval.to_dict(),
            "tsne": self.tsne.to_dict() if self.tsne else None,
            "normalization": self.normalization,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(
            seed=d.get("seed", 0),
            graph=GraphConfig.from_dict(d["graph"]) if d.get("graph") else GraphConfig(),
            synth=SynthConfig.from_dict(d["synth"]) if d.get("synth") else None,
            dataset_dir=d.get("dataset_dir"),
            models=ModelConfig.from_dict(d["models"]) if d.get("models") else ModelConfig(),
            eval=EvalConfig.from_dict(d["eval"]) if d.get("eval") else EvalConfig(),
            tsne=TsneConfig.from_dict(d["tsne"]) if d.get("tsne") else None,
            normalization=d.get("normalization", "min-max"),
        )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _fusion_specs(dataset: Dataset, mc: ModelConfig) -> FusionSpecs:
    specs = default_fusion_specs(
        dataset.n_static,
        dataset.n_timesteps,
        seed=mc.seed if mc.seed is not None else 0,
        hidden_dim=mc.hidden_dim,
        latent_static=mc.latent_static,
        latent_dynamic=mc.latent_dynamic,
        latent_fused=mc.latent_fused,
        epochs=mc.epochs,
        learning_rate=mc.learning_rate,
    )
    specs.m4_weights = tuple(mc.m4_weights)
    return specs


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def stage_generate(cfg: ExperimentConfig, session_dir: Path) -> Dataset:
    """Build or copy the dataset into <session>/dataset."""
    try:
        if cfg.dataset_dir is not None:
            dataset = load_dataset_dir(cfg.dataset_dir)
        else:
            if cfg.graph.nodes_path and cfg.graph.edges_path:
                graph = load_graph(cfg.graph.nodes_path, cfg.graph.edges_path)
            else:
                graph = random_geometric_graph(
                    cfg.graph.n_nodes, seed=cfg.graph.seed, k_neighbors=cfg.graph.k_neighbors
                )
            dataset = generate(graph, cfg.synth)
        save_dataset(dataset, session_dir / "dataset")
        return dataset
    except Exception as exc:
        raise StageError("generate", exc) from exc


def stage_train(cfg: ExperimentConfig, session_dir: Path, dataset: Optional[Dataset] = None) -> EmbeddingSet:
    try:
        if dataset is None:
            dataset = load_dataset_dir(session_dir / "dataset")
        normalized = normalize_features(dataset, cfg.normalization)
        write_json(
            session_dir / "dataset" / "normalization.json",
            normalized.normalization.to_dict(),
        )
        specs = _fusion_specs(dataset, cfg.models)
        embeddings = train_all(normalized, specs)
        embeddings.save(session_dir / "embeddings")
        return embeddings
    except StageError:
        raise
    except Exception as exc:
        raise StageError("train", exc) from exc


def stage_evaluate(
    cfg: ExperimentConfig, session_dir: Path,
    dataset: Optional[Dataset] = None, embeddings: Optional[EmbeddingSet] = None,
) -> dict[str, dict]:
    """k-means + dual silhouettes per model; writes eval and quadrant artifacts.

    With no subsample cap the original-space distance matrices are shared
    across the five models (they do not depend on the embedding).
    """
    try:
        if dataset is None:
            dataset = load_dataset_dir(session_dir / "dataset")
        if embeddings is None:
            embeddings = EmbeddingSet.load(session_dir / "embeddings")
        ec = cfg.eval
        dist_s = dist_d = None
        if ec.subsample_cap is None:
            dist_s, dist_d = full_distance_matrices(dataset)
        out = {}
        for key in MODEL_KEYS:
            ev = evaluate_embedding(
                dataset,
                embeddings.embeddings[key],
                k=ec.k,
                seed=ec.seed,
                subsample_cap=ec.subsample_cap,
                dist_static=dist_s,
                dist_dynamic=dist_d,
            )
            write_eval_csv(session_dir / "evaluation" / f"eval_{key}.csv", ev.pairs)
            payload = {
                "counts": ev.quadrants.counts,
                "fractions": ev.quadrants.fractions,
                "n_pairs": ev.quadrants.n_pairs,
                "k": ec.k,
                "kmeans_seed": ec.seed,
                "kmeans_inertia": ev.assignment.inertia,
                "subsample_cap": ec.subsample_cap,
            }
            write_json(session_dir / "evaluation" / f"quadrants_{key}.json", payload)
            out[key] = payload
        return out
    except StageError:
        raise
    except Exception as exc:
        raise StageError("evaluate", exc) from exc


def stage_project(
    cfg: ExperimentConfig, session_dir: Path, embeddings: Optional[EmbeddingSet] = None
) -> dict[str, np.ndarray]:
    try:
        if embeddings is None:
            embeddings = EmbeddingSet.load(session_dir / "embeddings")
        coords = {}
        meta = {}
        for key in MODEL_KEYS:
            result = project(embeddings.embeddings[key], cfg.tsne)
            coords[key] = result.coords
            write_projection_csv(
                session_dir / "projections" / f"proj_{key}.csv",
                embeddings.node_ids,
                result.coords,
            )
            meta[key] = {
                "initial_kl": result.initial_kl,
                "final_kl": result.final_kl,
                "max_perplexity_error": float(result.perplexity_error.max()),
            }
        write_json(
            session_dir / "projections" / "tsne_meta.json",
            {"config": cfg.tsne.to_dict(), "models": meta},
        )
        return coords
    except StageError:
        raise
    except Exception as exc:
        raise StageError("project", exc) from exc


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def _session_dir(cfg: ExperimentConfig, out_dir, force: bool) -> tuple[Path, dict]:
    snapshot = cfg.to_dict()
    digest = config_hash(snapshot)
    root = Path(out_dir) / digest[:12]
    if root.exists():
        if not force:
            raise FileExistsError(
                f"session {root} already exists; pass force=True (--force) to overwrite"
            )
        shutil.rmtree(root)
    root.mkdir(parents=True)
    snapshot["config_hash"] = digest
    write_json(root / "config.json", snapshot)
    return root, snapshot


def run_experiment(cfg: ExperimentConfig, out_dir, force: bool = False) -> Session:
    """generate -> train -> evaluate -> project; returns the loaded Session."""
    cfg = cfg.resolved()
    root, _ = _session_dir(cfg, out_dir, force)
    dataset = stage_generate(cfg, root)
    embeddings = stage_train(cfg, root, dataset)
    stage_evaluate(cfg, root, dataset, embeddings)
    stage_project(cfg, root, embeddings)
    return Session.load(root)


def run_synthetic_experiment(
    cfg: ExperimentConfig, out_dir, force: bool = False
) -> Session:
    if cfg.dataset_dir is not None:
        raise ValueError("synthetic experiment must not set dataset_dir")
    return run_experiment(cfg, out_dir, force=force)


def run_real_experiment(
    dataset_dir, cfg: ExperimentConfig, out_dir, force: bool = False
) -> Session:
    """Same pipeline over user-supplied CSVs (schema per dataset-core formats)."""
    cfg.dataset_dir = str(dataset_dir)
    cfg.synth = None
    if cfg.eval.subsample_cap is None:
        cfg.eval.subsample_cap = 200  # keep DTW tractable on city-scale data
    return run_experiment(cfg, out_dir, force=force)
