"""Spatial street graph: nodes with coordinates, undirected edges, adjacency."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Raised when graph construction violates a structural invariant."""


@dataclass
class StreetGraph:
    """Undirected spatial graph with per-node coordinates.

    Nodes keep their external integer ids (``node_ids``); everywhere else the
    graph is addressed by position 0..n-1 in file order. ``edges`` holds
    positional index pairs with ``edges[:, 0] < edges[:, 1]``.
    """

    node_ids: np.ndarray          # (n,) int64, unique external ids
    lon: np.ndarray               # (n,) float64, degrees
    lat: np.ndarray               # (n,) float64, degrees
    edges: np.ndarray             # (m, 2) int64, positional indices, src < dst
    _adjacency: list[np.ndarray] = field(default=None, repr=False)  # type: ignore[assignment]
    _id_to_index: dict[int, int] = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.node_ids = np.asarray(self.node_ids, dtype=np.int64)
        self.lon = np.asarray(self.lon, dtype=np.float64)
        self.lat = np.asarray(self.lat, dtype=np.float64)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self._validate()
        self._id_to_index = {int(i): pos for pos, i in enumerate(self.node_ids)}
        self._adjacency = self._build_adjacency()

    def _validate(self) -> None:
        n = len(self.node_ids)
        if len(np.unique(self.node_ids)) != n:
            raise GraphError("duplicate node ids")
        if self.lon.shape != (n,) or self.lat.shape != (n,):
            raise GraphError("coordinate arrays do not match node count")
        if not (np.isfinite(self.lon).all() and np.isfinite(self.lat).all()):
            raise GraphError("non-finite node coordinate")
        if self.edges.size:
            if self.edges.min() < 0 or self.edges.max() >= n:
                raise GraphError("edge endpoint out of range")
            if (self.edges[:, 0] == self.edges[:, 1]).any():
                bad = int(np.flatnonzero(self.edges[:, 0] == self.edges[:, 1])[0])
                raise GraphError(f"self-loop at edge row {bad}")
            canon = np.sort(self.edges, axis=1)
            keys = canon[:, 0] * n + canon[:, 1]
            if len(np.unique(keys)) != len(keys):
                raise GraphError("duplicate undirected edge")
            self.edges = canon

    def _build_adjacency(self) -> list[np.ndarray]:
        neigh: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            neigh[a].append(int(b))
            neigh[b].append(int(a))
        return [np.array(sorted(v), dtype=np.int64) for v in neigh]

    @property
    def n(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def adjacency(self) -> list[np.ndarray]:
        """Per-node sorted neighbor index lists (symmetric by construction)."""
        return self._adjacency

    def index_of(self, node_id: int) -> int:
        try:
            return self._id_to_index[int(node_id)]
        except KeyError:
            raise GraphError(f"unknown node id {node_id}") from None

    def coords(self) -> np.ndarray:
        """(n, 2) lon/lat matrix."""
        return np.column_stack([self.lon, self.lat])

    def mean_adjacency(self) -> sp.csr_matrix:
        """Row-normalized adjacency D^-1 A; rows of isolated nodes are zero."""
        n = self.n
        if self.n_edges == 0:
            return sp.csr_matrix((n, n))
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        a = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        deg = np.asarray(a.sum(axis=1)).ravel()
        inv = np.zeros(n)
        nz = deg > 0
        inv[nz] = 1.0 / deg[nz]
        return sp.diags(inv) @ a

    @classmethod
    def from_id_edges(
        cls,
        node_ids,
        lon,
        lat,
        edge_ids,
    ) -> "StreetGraph":
        """Build from edges given as external-id pairs (as read from edges.csv)."""
        node_ids = np.asarray(node_ids, dtype=np.int64)
        idx = {int(i): pos for pos, i in enumerate(node_ids)}
        edges = []
        for row, (a, b) in enumerate(edge_ids):
            if int(a) not in idx:
                raise GraphError(f"edge row {row + 1}: endpoint {a} is not a declared node")
            if int(b) not in idx:
                raise GraphError(f"edge row {row + 1}: endpoint {b} is not a declared node")
            edges.append((idx[int(a)], idx[int(b)]))
        edges_arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
        return cls(node_ids=node_ids, lon=lon, lat=lat, edges=edges_arr)


def random_geometric_graph(
    n: int,
    seed: int,
    k_neighbors: int = 4,
    lon_range: tuple[float, float] = (-46.85, -46.40),
    lat_range: tuple[float, float] = (-23.75, -23.40),
) -> StreetGraph:
    """Street-like random graph: uniform points joined to their k nearest neighbors.

    Edges are symmetrized and deduplicated, giving typical intersection degrees
    close to ``k_neighbors``. Used for synthetic experiments when no real
    street graph is supplied.
    """
    if n < 2:
        raise GraphError("need at least 2 nodes")
    rng = np.random.default_rng(seed)
    lon = rng.uniform(*lon_range, size=n)
    lat = rng.uniform(*lat_range, size=n)
    # aspect-corrected planar coords for neighbor search
    x = lon * np.cos(np.deg2rad(np.mean(lat_range)))
    y = lat
    pts = np.column_stack([x, y])
    edges = set()
    k = min(k_neighbors, n - 1)
    for i in range(n):
        d2 = ((pts - pts[i]) ** 2).sum(axis=1)
        d2[i] = np.inf
        for j in np.argsort(d2, kind="stable")[:k]:
            a, b = (i, int(j)) if i < j else (int(j), i)
            edges.add((a, b))
    edge_arr = np.array(sorted(edges), dtype=np.int64)
    return StreetGraph(node_ids=np.arange(n), lon=lon, lat=lat, edges=edge_arr)
