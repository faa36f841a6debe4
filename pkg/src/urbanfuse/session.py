"""Persisted experiment sessions: one directory per run, content-addressed.

Layout::

    <session>/
      config.json                 config snapshot + seeds + config_hash
      dataset/                    nodes/edges/static/dynamic[/labels].csv
      dataset/normalization.json  affine maps used for training & display
      embeddings/                 m1_static.csv .. m4.csv + manifest.json
      projections/                proj_<model>.csv + tsne_meta.json
      evaluation/                 eval_<model>.csv + quadrants_<model>.json

No artifact carries a timestamp, so identical configs regenerate identical
bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .data import Dataset, Normalization, load_dataset_dir
from .fusion import KIND_ORDER, EmbeddingSet
from .metrics import QUADRANTS, QuadrantSummary, SilhouettePair, quadrant_summary

MODEL_KEYS = [k.value for k in KIND_ORDER]
MODEL_TITLES = {
    "m1_static": "M1-Static",
    "m1_dynamic": "M1-Dynamic",
    "m2": "M2",
    "m3": "M3",
    "m4": "M4",
}


class IncompleteSessionError(RuntimeError):
    pass


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_projection_csv(path: Path, node_ids: np.ndarray, coords: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "x", "y"])
        for nid, (x, y) in zip(node_ids, coords):
            w.writerow([int(nid), repr(float(x)), repr(float(y))])


def read_projection_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    ids = np.array([int(r[0]) for r in rows[1:]], dtype=np.int64)
    coords = np.array([[float(r[1]), float(r[2])] for r in rows[1:]])
    return ids, coords


def write_eval_csv(path: Path, pairs: list[SilhouettePair]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["cluster_a", "cluster_b", "s_static", "s_dynamic"])
        for p in pairs:
            w.writerow([p.cluster_a, p.cluster_b, repr(p.s_static), repr(p.s_dynamic)])


def read_eval_csv(path: Path) -> list[SilhouettePair]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return [
        SilhouettePair(int(r[0]), int(r[1]), float(r[2]), float(r[3])) for r in rows[1:]
    ]


@dataclass
class Session:
    """Immutable bundle of dataset + embeddings + projections + evaluations."""

    root: Path
    config: dict
    dataset: Dataset
    normalization: Optional[Normalization]
    embeddings: EmbeddingSet
    projections: dict[str, np.ndarray]
    evaluations: dict[str, tuple[list[SilhouettePair], QuadrantSummary]]

    @property
    def config_hash(self) -> str:
        return self.config["config_hash"]

    @classmethod
    def load(cls, root) -> "Session":
        root = Path(root)
        cfg_path = root / "config.json"
        if not cfg_path.exists():
            raise IncompleteSessionError(f"no config.json under {root}")
        config = json.loads(cfg_path.read_text(encoding="utf-8"))
        dataset = load_dataset_dir(root / "dataset")
        norm_path = root / "dataset" / "normalization.json"
        normalization = (
            Normalization.from_dict(json.loads(norm_path.read_text(encoding="utf-8")))
            if norm_path.exists()
            else None
        )
        try:
            embeddings = EmbeddingSet.load(root / "embeddings")
        except FileNotFoundError as exc:
            raise IncompleteSessionError(str(exc)) from None
        projections: dict[str, np.ndarray] = {}
        evaluations: dict[str, tuple[list[SilhouettePair], QuadrantSummary]] = {}
        for key in MODEL_KEYS:
            proj_path = root / "projections" / f"proj_{key}.csv"
            if not proj_path.exists():
                raise IncompleteSessionError(
                    f"missing projection for {MODEL_TITLES[key]} ({proj_path.name})"
                )
            ids, coords = read_projection_csv(proj_path)
            if (ids != dataset.graph.node_ids).any():
                raise IncompleteSessionError(f"{proj_path.name}: node order mismatch")
            projections[key] = coords
            eval_path = root / "evaluation" / f"eval_{key}.csv"
            quad_path = root / "evaluation" / f"quadrants_{key}.json"
            if not eval_path.exists() or not quad_path.exists():
                raise IncompleteSessionError(
                    f"missing evaluation for {MODEL_TITLES[key]}"
                )
            pairs = read_eval_csv(eval_path)
            quad = json.loads(quad_path.read_text(encoding="utf-8"))
            evaluations[key] = (
                pairs,
                QuadrantSummary(
                    counts=quad["counts"], fractions=quad["fractions"], n_pairs=quad["n_pairs"]
                ),
            )
        return cls(
            root=root,
            config=config,
            dataset=dataset,
            normalization=normalization,
            embeddings=embeddings,
            projections=projections,
            evaluations=evaluations,
        )


# ---------------------------------------------------------------------------
# Report: a pure function of the on-disk artifacts
# ---------------------------------------------------------------------------

@dataclass
class Report:
    config_hash: str
    n_nodes: int
    models: dict[str, dict]
    file_index: list[str]

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "n_nodes": self.n_nodes,
            "models": self.models,
            "file_index": self.file_index,
        }

    def to_text(self) -> str:
        lines = [
            f"session {self.config_hash[:12]}  ({self.n_nodes} nodes)",
            "",
            f"{'model':<12}{'final loss':>12}  {'TR':>6}{'TL':>6}{'BR':>6}{'BL':>6}",
        ]
        for key in MODEL_KEYS:
            m = self.models[key]
            loss = f"{m['final_loss']:.6f}" if m["final_loss"] is not None else "-"
            fr = m["quadrant_fractions"]
            lines.append(
                f"{MODEL_TITLES[key]:<12}{loss:>12}  "
                + "".join(f"{fr[q]:>6.3f}" for q in QUADRANTS)
            )
        lines.append("")
        lines.append(f"artifacts ({len(self.file_index)}):")
        lines.extend(f"  {f}" for f in self.file_index)
        return "\n".join(lines)


def report(session_dir) -> Report:
    """Summarize a complete session from its artifacts.

    Quadrant fractions are recomputed from the eval CSVs and must agree with
    the persisted quadrant summaries; any missing artifact aborts naming the
    model.
    """
    root = Path(session_dir)
    cfg_path = root / "config.json"
    if not cfg_path.exists():
        raise IncompleteSessionError(f"no config.json under {root}")
    config = json.loads(cfg_path.read_text(encoding="utf-8"))

    manifest_path = root / "embeddings" / "manifest.json"
    if not manifest_path.exists():
        raise IncompleteSessionError("missing embeddings/manifest.json")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    models: dict[str, dict] = {}
    index: list[str] = []
    for key in MODEL_KEYS:
        title = MODEL_TITLES[key]
        emb = root / "embeddings" / f"{key}.csv"
        proj = root / "projections" / f"proj_{key}.csv"
        evl = root / "evaluation" / f"eval_{key}.csv"
        quad = root / "evaluation" / f"quadrants_{key}.json"
        for path, what in ((emb, "embedding"), (proj, "projection"), (evl, "evaluation")):
            if not path.exists():
                raise IncompleteSessionError(f"missing {what} artifact for {title}: {path.name}")
        if not quad.exists():
            raise IncompleteSessionError(f"missing quadrant summary for {title}")
        pairs = read_eval_csv(evl)
        recomputed = quadrant_summary(pairs)
        persisted = json.loads(quad.read_text(encoding="utf-8"))
        if persisted["counts"] != recomputed.counts:
            raise IncompleteSessionError(
                f"{title}: quadrant summary disagrees with eval CSV recomputation"
            )
        models[key] = {
            "final_loss": manifest["models"][key].get("final_loss"),
            "dim": manifest["models"][key].get("dim"),
            "n_pairs": recomputed.n_pairs,
            "quadrant_counts": recomputed.counts,
            "quadrant_fractions": recomputed.fractions,
        }
        index += [
            str(emb.relative_to(root)),
            str(proj.relative_to(root)),
            str(evl.relative_to(root)),
        ]
    return Report(
        config_hash=config["config_hash"],
        n_nodes=int(manifest["node_count"]),
        models=models,
        file_index=index,
    )
