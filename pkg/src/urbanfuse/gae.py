"""Graph autoencoder: GraphSAGE-mean layers, sigmoid feature gate, training.

The encoder stacks two GraphSAGE layers (mean aggregator with separate
self/neighbor transforms) with ReLU activations; the decoder mirrors it with
an identity output activation. Training reconstructs node features only (no
adjacency reconstruction) with full-batch adaptive-moment gradient descent.
All gradients are analytic; see ``backward_autoencoder``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .graph import StreetGraph


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; ``report`` holds the finite epochs seen so far."""

    def __init__(self, epoch: int, report: "TrainReport"):
        last = report.loss_per_epoch[-1] if report.loss_per_epoch else float("nan")
        super().__init__(
            f"training diverged at epoch {epoch}; last finite loss {last:.6g}"
        )
        self.epoch = epoch
        self.report = report


class GridSearchError(RuntimeError):
    pass


@dataclass
class AutoencoderSpec:
    input_dim: int
    hidden_dim: int = 64
    latent_dim: int = 16
    use_gate: bool = False
    epochs: int = 300
    learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.latent_dim >= self.input_dim:
            raise ValueError(
                f"latent_dim {self.latent_dim} must be < input_dim {self.input_dim}"
            )
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if min(self.input_dim, self.hidden_dim, self.latent_dim) < 1:
            raise ValueError("dimensions must be >= 1")

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "latent_dim": self.latent_dim,
            "use_gate": self.use_gate,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
        }


@dataclass
class TrainReport:
    loss_per_epoch: list[float]
    final_loss: float


@dataclass
class SageLayer:
    w_self: np.ndarray    # (d_out, d_in)
    w_neigh: np.ndarray   # (d_out, d_in)
    bias: np.ndarray      # (d_out,)
    activation: str = "relu"  # "relu" | "identity"


@dataclass
class FeatureGate:
    w: np.ndarray  # (d, d)
    b: np.ndarray  # (d,)


@dataclass
class Autoencoder:
    spec: AutoencoderSpec
    gate: Optional[FeatureGate]
    layers: list[SageLayer]  # enc1, enc2, dec1, dec2

    def params(self) -> list[tuple[str, np.ndarray]]:
        """Live parameter tensors in a fixed order (shared with gradients)."""
        out: list[tuple[str, np.ndarray]] = []
        if self.gate is not None:
            out += [("gate.w", self.gate.w), ("gate.b", self.gate.b)]
        for name, layer in zip(("enc1", "enc2", "dec1", "dec2"), self.layers):
            out += [
                (f"{name}.w_self", layer.w_self),
                (f"{name}.w_neigh", layer.w_neigh),
                (f"{name}.bias", layer.bias),
            ]
        return out


class NeighborOp:
    """Mean-over-neighbors operator and its transpose, cached as sparse matrices."""

    def __init__(self, mean: sp.csr_matrix):
        self.mean = mean.tocsr()
        self.mean_t = mean.T.tocsr()

    @classmethod
    def from_graph(cls, graph: StreetGraph) -> "NeighborOp":
        return cls(graph.mean_adjacency())

    def agg(self, h: np.ndarray) -> np.ndarray:
        return self.mean @ h

    def agg_t(self, h: np.ndarray) -> np.ndarray:
        return self.mean_t @ h


def _as_op(adjacency) -> NeighborOp:
    if isinstance(adjacency, NeighborOp):
        return adjacency
    if isinstance(adjacency, StreetGraph):
        return NeighborOp.from_graph(adjacency)
    raise TypeError("adjacency must be a StreetGraph or NeighborOp")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# ---------------------------------------------------------------------------
# Layer forward/backward
# ---------------------------------------------------------------------------

def _sage_forward(layer: SageLayer, h: np.ndarray, op: NeighborOp):
    m = op.agg(h)
    z = h @ layer.w_self.T + m @ layer.w_neigh.T + layer.bias
    if layer.activation == "relu":
        mask = z > 0
        return z * mask, (h, m, mask)
    return z, (h, m, None)


def _sage_backward(layer: SageLayer, d_out: np.ndarray, cache, op: NeighborOp):
    h, m, mask = cache
    dz = d_out * mask if mask is not None else d_out
    grads = {
        "w_self": dz.T @ h,
        "w_neigh": dz.T @ m,
        "bias": dz.sum(axis=0),
    }
    dh = dz @ layer.w_self + op.agg_t(dz @ layer.w_neigh)
    return dh, grads


def sage_forward(layer: SageLayer, h: np.ndarray, adjacency) -> np.ndarray:
    """One GraphSAGE layer: act(W_self h_v + W_neigh mean_{u in N(v)} h_u + b).

    Isolated nodes use a zero neighbor mean.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.shape[1] != layer.w_self.shape[1]:
        raise ValueError(
            f"feature dim {h.shape[1]} does not match layer input {layer.w_self.shape[1]}"
        )
    out, _ = _sage_forward(layer, h, _as_op(adjacency))
    return out


def _gate_forward(gate: FeatureGate, x: np.ndarray):
    weights = _sigmoid(x @ gate.w.T + gate.b)
    return x * weights, weights


def _gate_backward(gate: FeatureGate, d_gated: np.ndarray, x: np.ndarray, weights: np.ndarray):
    ds = d_gated * x * weights * (1.0 - weights)
    grads = {"w": ds.T @ x, "b": ds.sum(axis=0)}
    dx = d_gated * weights + ds @ gate.w
    return dx, grads


def gate_forward(gate: FeatureGate, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sigmoid feature gate: weights = sigmoid(x W^T + b), gated = x * weights.

    Weights are returned for inspection; they lie strictly in (0, 1).
    """
    x = np.asarray(x, dtype=np.float64)
    return _gate_forward(gate, x)


# ---------------------------------------------------------------------------
# Whole-model forward/backward
# ---------------------------------------------------------------------------

def forward_autoencoder(model: Autoencoder, x: np.ndarray, op: NeighborOp):
    """Returns (x_hat, z, caches); caches feed ``backward_autoencoder``."""
    caches: dict = {}
    h = x
    if model.gate is not None:
        gated, weights = _gate_forward(model.gate, x)
        caches["gate"] = (x, weights)
        h = gated
    acts = []
    for i, layer in enumerate(model.layers):
        h, cache = _sage_forward(layer, h, op)
        acts.append(cache)
        if i == 1:
            z = h
    caches["layers"] = acts
    return h, z, caches


def backward_autoencoder(
    model: Autoencoder,
    caches: dict,
    d_xhat: np.ndarray,
    op: NeighborOp,
    d_z_extra: Optional[np.ndarray] = None,
):
    """Backpropagate an upstream gradient on the reconstruction (and optionally
    an extra gradient flowing directly into the latent z).

    Returns (grads, d_input) with ``grads`` aligned to ``model.params()`` and
    ``d_input`` the gradient w.r.t. the model's input features.
    """
    acts = caches["layers"]
    d = d_xhat
    layer_grads: list[dict] = [None] * 4  # type: ignore[list-item]
    for i in (3, 2):
        d, layer_grads[i] = _sage_backward(model.layers[i], d, acts[i], op)
    if d_z_extra is not None:
        d = d + d_z_extra
    for i in (1, 0):
        d, layer_grads[i] = _sage_backward(model.layers[i], d, acts[i], op)
    grads: list[np.ndarray] = []
    if model.gate is not None:
        x, weights = caches["gate"]
        d, ggrads = _gate_backward(model.gate, d, x, weights)
        grads += [ggrads["w"], ggrads["b"]]
    for lg in layer_grads:
        grads += [lg["w_self"], lg["w_neigh"], lg["bias"]]
    return grads, d


def reconstruction_loss(x_hat: np.ndarray, x: np.ndarray) -> float:
    """Mean squared feature-reconstruction error over all entries."""
    return float(((x_hat - x) ** 2).mean())


def loss_gradient(x_hat: np.ndarray, x: np.ndarray, weight: float = 1.0) -> np.ndarray:
    """d(weight * mse)/d(x_hat); the gradient w.r.t. the target is its negation."""
    return (2.0 * weight / x.size) * (x_hat - x)


# ---------------------------------------------------------------------------
# Initialization and optimization
# ---------------------------------------------------------------------------

def _glorot(rng: np.random.Generator, d_out: int, d_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (d_in + d_out))
    return rng.uniform(-limit, limit, size=(d_out, d_in))


def init_autoencoder(spec: AutoencoderSpec) -> Autoencoder:
    """Seeded Glorot-uniform weights, zero biases; draw order is fixed."""
    rng = np.random.default_rng(spec.seed)
    gate = None
    if spec.use_gate:
        gate = FeatureGate(
            w=_glorot(rng, spec.input_dim, spec.input_dim),
            b=np.zeros(spec.input_dim),
        )
    # ReLU between layers; latent and reconstruction outputs stay linear
    dims = [
        (spec.input_dim, spec.hidden_dim, "relu"),
        (spec.hidden_dim, spec.latent_dim, "identity"),
        (spec.latent_dim, spec.hidden_dim, "relu"),
        (spec.hidden_dim, spec.input_dim, "identity"),
    ]
    layers = [
        SageLayer(
            w_self=_glorot(rng, d_out, d_in),
            w_neigh=_glorot(rng, d_out, d_in),
            bias=np.zeros(d_out),
            activation=act,
        )
        for d_in, d_out, act in dims
    ]
    return Autoencoder(spec=spec, gate=gate, layers=layers)


class Adam:
    """Adaptive-moment full-batch optimizer over a fixed list of tensors."""

    def __init__(self, params: Sequence[np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(
    spec: AutoencoderSpec,
    x: np.ndarray,
    adjacency,
) -> tuple[Autoencoder, np.ndarray, TrainReport]:
    """Train one autoencoder to reconstruct ``x``; returns (model, embedding, report).

    ``x`` is expected normalized. Deterministic per ``spec.seed``. Raises
    ``TrainingDiverged`` if the loss leaves the finite range.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] != spec.input_dim:
        raise ValueError(f"input width {x.shape[1]} does not match spec {spec.input_dim}")
    op = _as_op(adjacency)
    model = init_autoencoder(spec)
    tensors = [p for _, p in model.params()]
    opt = Adam(tensors, lr=spec.learning_rate)
    losses: list[float] = []
    for epoch in range(spec.epochs):
        x_hat, _, caches = forward_autoencoder(model, x, op)
        loss = reconstruction_loss(x_hat, x)
        if not np.isfinite(loss):
            raise TrainingDiverged(epoch, TrainReport(losses, losses[-1] if losses else float("nan")))
        losses.append(loss)
        grads, _ = backward_autoencoder(model, caches, loss_gradient(x_hat, x), op)
        opt.step(tensors, grads)
    x_hat, z, _ = forward_autoencoder(model, x, op)
    final = reconstruction_loss(x_hat, x)
    if not np.isfinite(final):
        raise TrainingDiverged(spec.epochs, TrainReport(losses, losses[-1]))
    return model, z, TrainReport(loss_per_epoch=losses, final_loss=final)


# ---------------------------------------------------------------------------
# Grid search
# ---------------------------------------------------------------------------

GRID_KEYS = ("hidden_dim", "latent_dim", "learning_rate", "use_gate")


@dataclass
class GridCell:
    spec: AutoencoderSpec
    final_loss: Optional[float]  # None if the cell diverged


def grid_search(
    base_spec: AutoencoderSpec,
    grid: Mapping[str, Sequence],
    x: np.ndarray,
    adjacency,
) -> tuple[AutoencoderSpec, list[GridCell]]:
    """Exhaustive search minimizing final reconstruction loss.

    Ties break toward smaller latent_dim, then lower learning_rate.
    """
    for key in grid:
        if key not in GRID_KEYS:
            raise ValueError(f"unknown grid key {key!r}; allowed: {GRID_KEYS}")
    axes = [(key, list(grid[key])) for key in GRID_KEYS if key in grid]
    if any(len(vals) == 0 for _, vals in axes) or not axes:
        raise ValueError("grid must be non-empty")
    op = _as_op(adjacency)
    cells: list[GridCell] = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        spec = replace(base_spec, **dict(zip((k for k, _ in axes), combo)))
        try:
            _, _, report = train(spec, x, op)
            cells.append(GridCell(spec=spec, final_loss=report.final_loss))
        except TrainingDiverged:
            cells.append(GridCell(spec=spec, final_loss=None))
    alive = [c for c in cells if c.final_loss is not None]
    if not alive:
        raise GridSearchError("every grid cell diverged")
    best = min(alive, key=lambda c: (c.final_loss, c.spec.latent_dim, c.spec.learning_rate))
    return best.spec, cells
