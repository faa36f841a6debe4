"""The five fusion embeddings: M1-Static, M1-Dynamic, M2, M3, M4.

* M1: two autoencoders trained independently, one per modality (no gate).
* M2: early fusion, one gated autoencoder on [static | dynamic] input columns.
* M3: late fusion, columnwise concatenation of the two M1 embeddings.
* M4: hierarchical fusion, a third gated autoencoder over the concatenated
  intermediate embeddings, with all three models optimized jointly
  (total loss = w_s L_static + w_d L_dynamic + w_t L_top).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np

from .data import Dataset
from .gae import (
    Adam,
    Autoencoder,
    AutoencoderSpec,
    NeighborOp,
    TrainReport,
    TrainingDiverged,
    backward_autoencoder,
    forward_autoencoder,
    init_autoencoder,
    loss_gradient,
    reconstruction_loss,
    train,
)


class FusionModelKind(str, Enum):
    M1_STATIC = "m1_static"
    M1_DYNAMIC = "m1_dynamic"
    M2_EARLY = "m2"
    M3_LATE = "m3"
    M4_HIERARCHICAL = "m4"


KIND_ORDER = [
    FusionModelKind.M1_STATIC,
    FusionModelKind.M1_DYNAMIC,
    FusionModelKind.M2_EARLY,
    FusionModelKind.M3_LATE,
    FusionModelKind.M4_HIERARCHICAL,
]


@dataclass
class FusionSpecs:
    """Sub-model specs shared by the recipes.

    ``static``/``dynamic`` drive M1, M3 and M4's lower branches; ``early`` is
    M2's single gated model; ``top`` is M4's third model whose input width must
    equal latent_static + latent_dynamic.
    """

    static: AutoencoderSpec
    dynamic: AutoencoderSpec
    early: AutoencoderSpec
    top: AutoencoderSpec
    m4_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def validate(self, n_static: int, n_timesteps: int) -> None:
        if self.static.input_dim != n_static:
            raise ValueError("static spec input_dim does not match dataset")
        if self.dynamic.input_dim != n_timesteps:
            raise ValueError("dynamic spec input_dim does not match dataset")
        if self.early.input_dim != n_static + n_timesteps:
            raise ValueError("early-fusion spec input_dim must be p + T")
        if self.top.input_dim != self.static.latent_dim + self.dynamic.latent_dim:
            raise ValueError("top spec input_dim must equal latent_s + latent_d")


def default_fusion_specs(
    n_static: int,
    n_timesteps: int,
    seed: int = 0,
    hidden_dim: int = 64,
    latent_static: int = 8,
    latent_dynamic: int = 32,
    latent_fused: int = 32,
    epochs: int = 300,
    learning_rate: float = 1e-3,
) -> FusionSpecs:
    """Spec bundle with per-model seeds derived from one master seed."""
    def spec(input_dim, latent, use_gate, offset):
        return AutoencoderSpec(
            input_dim=input_dim,
            hidden_dim=hidden_dim,
            latent_dim=latent,
            use_gate=use_gate,
            epochs=epochs,
            learning_rate=learning_rate,
            seed=seed + offset,
        )

    return FusionSpecs(
        static=spec(n_static, min(latent_static, n_static - 1), False, 1),
        dynamic=spec(n_timesteps, latent_dynamic, False, 2),
        early=spec(n_static + n_timesteps, latent_fused, True, 3),
        top=spec(
            min(latent_static, n_static - 1) + latent_dynamic, latent_fused, True, 4
        ),
    )


@dataclass
class FusionTrainReport:
    total: TrainReport
    components: dict[str, TrainReport]


def _require_normalized(dataset: Dataset) -> None:
    if dataset.normalization is None:
        raise ValueError("dataset must be normalized before training (see normalize_features)")


def train_m1(
    dataset: Dataset, spec_s: AutoencoderSpec, spec_d: AutoencoderSpec
) -> tuple[np.ndarray, np.ndarray, dict[str, TrainReport]]:
    """Independent embeddings: one model on static features, one on dynamic series."""
    _require_normalized(dataset)
    if spec_s.use_gate or spec_d.use_gate:
        raise ValueError("M1 sub-models are ungated; the gate is a fusion mechanism")
    op = NeighborOp.from_graph(dataset.graph)
    _, z_s, rep_s = train(spec_s, dataset.static, op)
    _, z_d, rep_d = train(spec_d, dataset.dynamic, op)
    return z_s, z_d, {"static": rep_s, "dynamic": rep_d}


def train_m2(dataset: Dataset, spec: AutoencoderSpec) -> tuple[np.ndarray, TrainReport]:
    """Early fusion: single gated model on input-level concatenation."""
    _require_normalized(dataset)
    if not spec.use_gate:
        raise ValueError("M2 requires the feature gate")
    x = np.hstack([dataset.static, dataset.dynamic])
    _, z, report = train(spec, x, NeighborOp.from_graph(dataset.graph))
    return z, report


def train_m3(
    dataset: Dataset,
    spec_s: AutoencoderSpec,
    spec_d: AutoencoderSpec,
    z_static: Optional[np.ndarray] = None,
    z_dynamic: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Late fusion: columnwise concat of the independently trained embeddings.

    Precomputed M1 embeddings may be passed to avoid retraining; with the same
    specs and seeds the result is bit-identical either way.
    """
    if z_static is None or z_dynamic is None:
        z_static, z_dynamic, _ = train_m1(dataset, spec_s, spec_d)
    return np.hstack([z_static, z_dynamic])


def train_m4(
    dataset: Dataset,
    spec_s: AutoencoderSpec,
    spec_d: AutoencoderSpec,
    spec_top: AutoencoderSpec,
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> tuple[np.ndarray, FusionTrainReport]:
    """Hierarchical fusion trained jointly, end to end.

    The top model consumes the concatenated intermediate embeddings through its
    gate and is trained to reconstruct them; gradients flow into the lower
    branches both through the top model's input and through its moving target.
    Epoch count is taken from ``spec_top``.
    """
    _require_normalized(dataset)
    if spec_top.input_dim != spec_s.latent_dim + spec_d.latent_dim:
        raise ValueError("spec_top.input_dim must equal latent_s + latent_d")
    if not spec_top.use_gate:
        raise ValueError("M4's top model requires the feature gate")
    if spec_s.use_gate or spec_d.use_gate:
        raise ValueError("M4 lower branches are ungated")
    w_s, w_d, w_t = weights
    op = NeighborOp.from_graph(dataset.graph)
    x_s, x_d = dataset.static, dataset.dynamic
    ls = spec_s.latent_dim

    model_s = init_autoencoder(spec_s)
    model_d = init_autoencoder(spec_d)
    model_t = init_autoencoder(spec_top)
    tensors_s = [p for _, p in model_s.params()]
    tensors_d = [p for _, p in model_d.params()]
    tensors_t = [p for _, p in model_t.params()]
    opt_s = Adam(tensors_s, lr=spec_s.learning_rate)
    opt_d = Adam(tensors_d, lr=spec_d.learning_rate)
    opt_t = Adam(tensors_t, lr=spec_top.learning_rate)

    trace = {"total": [], "static": [], "dynamic": [], "top": []}

    def _forward():
        xs_hat, z_s, cache_s = forward_autoencoder(model_s, x_s, op)
        xd_hat, z_d, cache_d = forward_autoencoder(model_d, x_d, op)
        c = np.hstack([z_s, z_d])
        c_hat, z_t, cache_t = forward_autoencoder(model_t, c, op)
        losses = (
            reconstruction_loss(xs_hat, x_s),
            reconstruction_loss(xd_hat, x_d),
            reconstruction_loss(c_hat, c),
        )
        return (xs_hat, xd_hat, c, c_hat, z_t), (cache_s, cache_d, cache_t), losses

    for epoch in range(spec_top.epochs):
        (xs_hat, xd_hat, c, c_hat, _), (cache_s, cache_d, cache_t), losses = _forward()
        l_s, l_d, l_t = losses
        total = w_s * l_s + w_d * l_d + w_t * l_t
        if not np.isfinite(total):
            partial = TrainReport(trace["total"], trace["total"][-1] if trace["total"] else float("nan"))
            raise TrainingDiverged(epoch, partial)
        for key, val in zip(("total", "static", "dynamic", "top"), (total, l_s, l_d, l_t)):
            trace[key].append(val)

        d_chat = loss_gradient(c_hat, c, w_t)
        grads_t, dc_input = backward_autoencoder(model_t, cache_t, d_chat, op)
        dc = dc_input - d_chat  # second term: gradient through the moving target
        grads_s, _ = backward_autoencoder(
            model_s, cache_s, loss_gradient(xs_hat, x_s, w_s), op, d_z_extra=dc[:, :ls]
        )
        grads_d, _ = backward_autoencoder(
            model_d, cache_d, loss_gradient(xd_hat, x_d, w_d), op, d_z_extra=dc[:, ls:]
        )
        opt_s.step(tensors_s, grads_s)
        opt_d.step(tensors_d, grads_d)
        opt_t.step(tensors_t, grads_t)

    (_, _, _, _, z_t), _, losses = _forward()
    l_s, l_d, l_t = losses
    total = w_s * l_s + w_d * l_d + w_t * l_t
    if not np.isfinite(total):
        raise TrainingDiverged(spec_top.epochs, TrainReport(trace["total"], trace["total"][-1]))
    report = FusionTrainReport(
        total=TrainReport(trace["total"], total),
        components={
            "static": TrainReport(trace["static"], l_s),
            "dynamic": TrainReport(trace["dynamic"], l_d),
            "top": TrainReport(trace["top"], l_t),
        },
    )
    return z_t, report


def m4_joint_loss(
    model_s: Autoencoder,
    model_d: Autoencoder,
    model_t: Autoencoder,
    x_s: np.ndarray,
    x_d: np.ndarray,
    op: NeighborOp,
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
):
    """Joint loss and analytic gradients at the current parameters.

    Returns (total_loss, grads) with grads ordered static, dynamic, top —
    aligned with each model's ``params()``. Used by gradient checks.
    """
    w_s, w_d, w_t = weights
    xs_hat, z_s, cache_s = forward_autoencoder(model_s, x_s, op)
    xd_hat, z_d, cache_d = forward_autoencoder(model_d, x_d, op)
    c = np.hstack([z_s, z_d])
    c_hat, _, cache_t = forward_autoencoder(model_t, c, op)
    total = (
        w_s * reconstruction_loss(xs_hat, x_s)
        + w_d * reconstruction_loss(xd_hat, x_d)
        + w_t * reconstruction_loss(c_hat, c)
    )
    d_chat = loss_gradient(c_hat, c, w_t)
    grads_t, dc_input = backward_autoencoder(model_t, cache_t, d_chat, op)
    dc = dc_input - d_chat
    ls = model_s.spec.latent_dim
    grads_s, _ = backward_autoencoder(
        model_s, cache_s, loss_gradient(xs_hat, x_s, w_s), op, d_z_extra=dc[:, :ls]
    )
    grads_d, _ = backward_autoencoder(
        model_d, cache_d, loss_gradient(xd_hat, x_d, w_d), op, d_z_extra=dc[:, ls:]
    )
    return total, (grads_s, grads_d, grads_t)


# ---------------------------------------------------------------------------
# The full embedding set and its on-disk artifact
# ---------------------------------------------------------------------------

@dataclass
class EmbeddingSet:
    node_ids: np.ndarray
    embeddings: dict[str, np.ndarray]  # keyed by FusionModelKind values
    manifest: dict

    def __post_init__(self) -> None:
        missing = [k.value for k in KIND_ORDER if k.value not in self.embeddings]
        if missing:
            raise ValueError(f"embedding set incomplete, missing {missing}")
        n = len(self.node_ids)
        for key, z in self.embeddings.items():
            if z.shape[0] != n:
                raise ValueError(f"{key} row count {z.shape[0]} != node count {n}")

    def save(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for key, z in self.embeddings.items():
            with open(out / f"{key}.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["node_id"] + [f"z{i + 1}" for i in range(z.shape[1])])
                for nid, row in zip(self.node_ids, z):
                    w.writerow([int(nid)] + [repr(float(v)) for v in row])
        with open(out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, in_dir) -> "EmbeddingSet":
        src = Path(in_dir)
        manifest = json.loads((src / "manifest.json").read_text(encoding="utf-8"))
        node_ids = None
        embeddings = {}
        for kind in KIND_ORDER:
            path = src / f"{kind.value}.csv"
            if not path.exists():
                raise FileNotFoundError(f"missing embedding artifact {path.name}")
            with open(path, newline="", encoding="utf-8") as fh:
                rows = list(csv.reader(fh))
            ids = np.array([int(r[0]) for r in rows[1:]], dtype=np.int64)
            z = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
            if node_ids is None:
                node_ids = ids
            elif (ids != node_ids).any():
                raise ValueError(f"{path.name}: node order differs from other embeddings")
            embeddings[kind.value] = z
        return cls(node_ids=node_ids, embeddings=embeddings, manifest=manifest)


def train_all(dataset: Dataset, specs: FusionSpecs) -> EmbeddingSet:
    """Train the five recipes; M3 reuses M1's embeddings (identical by seed)."""
    _require_normalized(dataset)
    specs.validate(dataset.n_static, dataset.n_timesteps)
    z_s, z_d, m1_reports = train_m1(dataset, specs.static, specs.dynamic)
    z_m2, m2_report = train_m2(dataset, specs.early)
    z_m3 = train_m3(dataset, specs.static, specs.dynamic, z_static=z_s, z_dynamic=z_d)
    z_m4, m4_report = train_m4(
        dataset, specs.static, specs.dynamic, specs.top, specs.m4_weights
    )
    manifest = {
        "format_version": 1,
        "node_count": int(dataset.n),
        "models": {
            "m1_static": {
                "spec": specs.static.to_dict(),
                "final_loss": m1_reports["static"].final_loss,
                "loss_per_epoch": m1_reports["static"].loss_per_epoch,
                "dim": int(z_s.shape[1]),
            },
            "m1_dynamic": {
                "spec": specs.dynamic.to_dict(),
                "final_loss": m1_reports["dynamic"].final_loss,
                "loss_per_epoch": m1_reports["dynamic"].loss_per_epoch,
                "dim": int(z_d.shape[1]),
            },
            "m2": {
                "spec": specs.early.to_dict(),
                "final_loss": m2_report.final_loss,
                "loss_per_epoch": m2_report.loss_per_epoch,
                "dim": int(z_m2.shape[1]),
            },
            "m3": {
                "source": ["m1_static", "m1_dynamic"],
                "dim": int(z_m3.shape[1]),
            },
            "m4": {
                "specs": {
                    "static": specs.static.to_dict(),
                    "dynamic": specs.dynamic.to_dict(),
                    "top": specs.top.to_dict(),
                },
                "weights": list(specs.m4_weights),
                "final_loss": m4_report.total.final_loss,
                "loss_per_epoch": m4_report.total.loss_per_epoch,
                "component_final_losses": {
                    k: r.final_loss for k, r in m4_report.components.items()
                },
                "dim": int(z_m4.shape[1]),
            },
        },
    }
    return EmbeddingSet(
        node_ids=dataset.graph.node_ids.copy(),
        embeddings={
            FusionModelKind.M1_STATIC.value: z_s,
            FusionModelKind.M1_DYNAMIC.value: z_d,
            FusionModelKind.M2_EARLY.value: z_m2,
            FusionModelKind.M3_LATE.value: z_m3,
            FusionModelKind.M4_HIERARCHICAL.value: z_m4,
        },
        manifest=manifest,
    )
