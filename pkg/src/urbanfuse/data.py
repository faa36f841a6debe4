"""Dataset model, CSV ingestion/validation, normalization, incident mapping.

File formats (all UTF-8, header row mandatory, '.' decimal separator):

* ``nodes.csv``   -- ``node_id,lon,lat``
* ``edges.csv``   -- ``src,dst``
* ``static.csv``  -- ``node_id,<feature headers...>``
* ``dynamic.csv`` -- ``node_id,<YYYY-MM headers...>``
* ``labels.csv``  -- ``node_id,cluster`` (optional)
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .graph import StreetGraph

EARTH_RADIUS_M = 6_371_000.0

# Static schema used for the real-world data; synthetic datasets reuse the arity.
REAL_STATIC_FEATURES = [
    "income_household",
    "income_responsible",
    "unemployment_rate",
    "literacy_7_15",
    "age_share_under_18",
    "age_share_18_65",
    "age_share_over_65",
    "bus_stations_200m",
    "metro_stations_200m",
    "train_stations_200m",
    "favela_within_500m",
]


class SchemaError(ValueError):
    """Dataset file violates the expected schema; message carries the locus."""


def _fmt_month(ym: tuple[int, int]) -> str:
    return f"{ym[0]:04d}-{ym[1]:02d}"


def _parse_month(label: str, locus: str) -> tuple[int, int]:
    parts = label.split("-")
    if len(parts) != 2:
        raise SchemaError(f"{locus}: time header {label!r} is not YYYY-MM")
    try:
        y, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise SchemaError(f"{locus}: time header {label!r} is not YYYY-MM") from None
    if not 1 <= m <= 12:
        raise SchemaError(f"{locus}: month out of range in {label!r}")
    return y, m


@dataclass
class Normalization:
    """Per-column affine maps applied to a dataset: v = (x - offset) / scale."""

    scheme: str                       # "min-max" | "z-score" | "none"
    static_offset: np.ndarray         # (p,)
    static_scale: np.ndarray          # (p,)
    dynamic_offset: np.ndarray        # (T,)
    dynamic_scale: np.ndarray         # (T,)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "static_offset": self.static_offset.tolist(),
            "static_scale": self.static_scale.tolist(),
            "dynamic_offset": self.dynamic_offset.tolist(),
            "dynamic_scale": self.dynamic_scale.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Normalization":
        return cls(
            scheme=d["scheme"],
            static_offset=np.asarray(d["static_offset"], dtype=np.float64),
            static_scale=np.asarray(d["static_scale"], dtype=np.float64),
            dynamic_offset=np.asarray(d["dynamic_offset"], dtype=np.float64),
            dynamic_scale=np.asarray(d["dynamic_scale"], dtype=np.float64),
        )


@dataclass
class Dataset:
    """Aligned static matrix, dynamic matrix, graph topology and optional labels.

    Matrices are raw (original units) unless ``normalization`` is set, in which
    case ``original_static()`` / ``original_dynamic()`` invert the maps.
    """

    graph: StreetGraph
    static: np.ndarray                # (n, p) float64
    static_names: list[str]
    dynamic: np.ndarray               # (n, T) float64
    time_axis: list[tuple[int, int]]  # T ordered (year, month)
    labels: Optional[np.ndarray] = None          # (n,) int64 in [0, k)
    normalization: Optional[Normalization] = None
    static_units: Optional[list[str]] = None

    def __post_init__(self) -> None:
        self.static = np.asarray(self.static, dtype=np.float64)
        self.dynamic = np.asarray(self.dynamic, dtype=np.float64)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
        self.validate()

    def validate(self) -> None:
        n = self.graph.n
        if self.static.shape[0] != n:
            raise SchemaError(
                f"static row count {self.static.shape[0]} does not match node count {n}"
            )
        if self.dynamic.shape[0] != n:
            raise SchemaError(
                f"dynamic row count {self.dynamic.shape[0]} does not match node count {n}"
            )
        if len(self.static_names) != self.static.shape[1]:
            raise SchemaError("static header arity does not match matrix width")
        if len(self.time_axis) != self.dynamic.shape[1]:
            raise SchemaError("time axis length does not match dynamic width")
        if not np.isfinite(self.static).all():
            r, c = np.argwhere(~np.isfinite(self.static))[0]
            raise SchemaError(
                f"non-finite static value at node row {r}, column {self.static_names[c]!r}"
            )
        if not np.isfinite(self.dynamic).all():
            r, c = np.argwhere(~np.isfinite(self.dynamic))[0]
            raise SchemaError(
                f"non-finite dynamic value at node row {r}, column {_fmt_month(self.time_axis[c])}"
            )
        if self.normalization is None and self.dynamic.size and self.dynamic.min() < 0:
            r, c = np.argwhere(self.dynamic < 0)[0]
            raise SchemaError(
                f"negative dynamic count at node row {r}, column {_fmt_month(self.time_axis[c])}"
            )
        for a, b in zip(self.time_axis, self.time_axis[1:]):
            if not (a[0], a[1]) < (b[0], b[1]):
                raise SchemaError(f"time axis not strictly increasing at {_fmt_month(b)}")
        if self.labels is not None:
            if self.labels.shape != (n,):
                raise SchemaError("labels length does not match node count")
            if self.labels.min() < 0:
                raise SchemaError("negative cluster label")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def n_static(self) -> int:
        return self.static.shape[1]

    @property
    def n_timesteps(self) -> int:
        return self.dynamic.shape[1]

    def original_static(self) -> np.ndarray:
        if self.normalization is None:
            return self.static
        nm = self.normalization
        return self.static * nm.static_scale + nm.static_offset

    def original_dynamic(self) -> np.ndarray:
        if self.normalization is None:
            return self.dynamic
        nm = self.normalization
        return self.dynamic * nm.dynamic_scale + nm.dynamic_offset


def _column_affine(mat: np.ndarray, scheme: str, names: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Per-column (offset, scale) so that (x - offset) / scale is the normalized value."""
    if scheme == "none":
        return np.zeros(mat.shape[1]), np.ones(mat.shape[1])
    if scheme == "min-max":
        lo, hi = mat.min(axis=0), mat.max(axis=0)
        scale = hi - lo
        const = scale == 0
        if const.any():
            warnings.warn(
                f"constant column(s) under min-max left at 0: {[names[i] for i in np.flatnonzero(const)]}"
            )
            scale = np.where(const, 1.0, scale)
        return lo, scale
    if scheme == "z-score":
        mu, sd = mat.mean(axis=0), mat.std(axis=0)
        const = sd == 0
        if const.any():
            warnings.warn(
                f"constant column(s) under z-score left at 0: {[names[i] for i in np.flatnonzero(const)]}"
            )
            sd = np.where(const, 1.0, sd)
        return mu, sd
    raise ValueError(f"unknown normalization scheme {scheme!r}")


def normalize_features(dataset: Dataset, scheme: str = "min-max") -> Dataset:
    """Return a normalized copy; the affine parameters ride along for inversion."""
    if dataset.normalization is not None:
        raise ValueError("dataset is already normalized")
    s_off, s_scale = _column_affine(dataset.static, scheme, dataset.static_names)
    d_off, d_scale = _column_affine(
        dataset.dynamic, scheme, [_fmt_month(t) for t in dataset.time_axis]
    )
    norm = Normalization(scheme, s_off, s_scale, d_off, d_scale)
    return Dataset(
        graph=dataset.graph,
        static=(dataset.static - s_off) / s_scale,
        static_names=list(dataset.static_names),
        dynamic=(dataset.dynamic - d_off) / d_scale,
        time_axis=list(dataset.time_axis),
        labels=dataset.labels,
        normalization=norm,
        static_units=dataset.static_units,
    )


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def _read_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path.name}: empty file, header row mandatory") from None
        return [h.strip() for h in header], [row for row in reader if row]


def _parse_float(cell: str, path: Path, line: int, column: str) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise SchemaError(
            f"{path.name} line {line}: column {column!r}: {cell!r} is not a number"
        ) from None
    if not math.isfinite(v):
        raise SchemaError(
            f"{path.name} line {line}: column {column!r}: non-finite value {cell!r}"
        )
    return v


def _parse_int(cell: str, path: Path, line: int, column: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise SchemaError(
            f"{path.name} line {line}: column {column!r}: {cell!r} is not an integer"
        ) from None


def _node_table(
    path: Path, header: list[str], rows: list[list[str]], graph: StreetGraph
) -> np.ndarray:
    """Rows keyed by node_id, reordered to graph node order; values as floats."""
    width = len(header) - 1
    out = np.full((graph.n, width), np.nan)
    seen = np.zeros(graph.n, dtype=bool)
    for i, row in enumerate(rows):
        line = i + 2
        if len(row) != len(header):
            raise SchemaError(
                f"{path.name} line {line}: expected {len(header)} cells, got {len(row)}"
            )
        nid = _parse_int(row[0], path, line, header[0])
        try:
            pos = graph.index_of(nid)
        except Exception:
            raise SchemaError(
                f"{path.name} line {line}: node id {nid} not declared in nodes.csv"
            ) from None
        if seen[pos]:
            raise SchemaError(f"{path.name} line {line}: duplicate node id {nid}")
        seen[pos] = True
        out[pos] = [
            _parse_float(cell, path, line, header[j + 1]) for j, cell in enumerate(row[1:])
        ]
    if not seen.all():
        missing = int(graph.node_ids[np.flatnonzero(~seen)[0]])
        raise SchemaError(
            f"{path.name}: row count {len(rows)} does not match node count {graph.n}"
            f" (first missing node id {missing})"
        )
    return out


def load_graph(nodes_path, edges_path) -> StreetGraph:
    nodes_path, edges_path = Path(nodes_path), Path(edges_path)
    header, rows = _read_rows(nodes_path)
    if header != ["node_id", "lon", "lat"]:
        raise SchemaError(f"{nodes_path.name}: header must be node_id,lon,lat, got {header}")
    ids, lons, lats = [], [], []
    for i, row in enumerate(rows):
        line = i + 2
        if len(row) != 3:
            raise SchemaError(f"{nodes_path.name} line {line}: expected 3 cells")
        ids.append(_parse_int(row[0], nodes_path, line, "node_id"))
        lons.append(_parse_float(row[1], nodes_path, line, "lon"))
        lats.append(_parse_float(row[2], nodes_path, line, "lat"))

    header, rows = _read_rows(edges_path)
    if header != ["src", "dst"]:
        raise SchemaError(f"{edges_path.name}: header must be src,dst, got {header}")
    edge_ids = []
    for i, row in enumerate(rows):
        line = i + 2
        if len(row) != 2:
            raise SchemaError(f"{edges_path.name} line {line}: expected 2 cells")
        edge_ids.append(
            (
                _parse_int(row[0], edges_path, line, "src"),
                _parse_int(row[1], edges_path, line, "dst"),
            )
        )
    try:
        return StreetGraph.from_id_edges(ids, lons, lats, edge_ids)
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(f"{edges_path.name}: {exc}") from None


def load_dataset(
    nodes_path,
    edges_path,
    static_path,
    dynamic_path,
    labels_path=None,
) -> Dataset:
    """Load and validate a dataset from its CSV files.

    Static/dynamic/label rows may appear in any order; they are aligned to the
    node order of ``nodes.csv``. Column order of static features is preserved
    from the file header.
    """
    graph = load_graph(nodes_path, edges_path)

    static_path = Path(static_path)
    header, rows = _read_rows(static_path)
    if not header or header[0] != "node_id" or len(header) < 2:
        raise SchemaError(f"{static_path.name}: header must be node_id,<features...>")
    static_names = header[1:]
    static = _node_table(static_path, header, rows, graph)

    dynamic_path = Path(dynamic_path)
    header, rows = _read_rows(dynamic_path)
    if not header or header[0] != "node_id" or len(header) < 2:
        raise SchemaError(f"{dynamic_path.name}: header must be node_id,<YYYY-MM...>")
    time_axis = [_parse_month(h, f"{dynamic_path.name} header") for h in header[1:]]
    dynamic = _node_table(dynamic_path, header, rows, graph)

    labels = None
    if labels_path is not None:
        labels_path = Path(labels_path)
        header, rows = _read_rows(labels_path)
        if header != ["node_id", "cluster"]:
            raise SchemaError(f"{labels_path.name}: header must be node_id,cluster")
        table = _node_table(labels_path, header, rows, graph)
        labels = table[:, 0].astype(np.int64)
        if (table[:, 0] != labels).any():
            raise SchemaError(f"{labels_path.name}: cluster ids must be integers")

    return Dataset(
        graph=graph,
        static=static,
        static_names=static_names,
        dynamic=dynamic,
        time_axis=time_axis,
        labels=labels,
    )


def save_dataset(dataset: Dataset, out_dir) -> dict[str, Path]:
    """Write the dataset CSVs (raw values); returns the file map."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = dataset.graph
    files: dict[str, Path] = {}

    def _write(name: str, header: list[str], rows: Iterable[list]) -> None:
        path = out / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        files[name] = path

    _write(
        "nodes.csv",
        ["node_id", "lon", "lat"],
        ([int(g.node_ids[i]), repr(float(g.lon[i])), repr(float(g.lat[i]))] for i in range(g.n)),
    )
    _write(
        "edges.csv",
        ["src", "dst"],
        ([int(g.node_ids[a]), int(g.node_ids[b])] for a, b in g.edges),
    )
    static = dataset.original_static()
    _write(
        "static.csv",
        ["node_id"] + list(dataset.static_names),
        (
            [int(g.node_ids[i])] + [repr(float(v)) for v in static[i]]
            for i in range(g.n)
        ),
    )
    dynamic = dataset.original_dynamic()
    _write(
        "dynamic.csv",
        ["node_id"] + [_fmt_month(t) for t in dataset.time_axis],
        (
            [int(g.node_ids[i])] + [repr(float(v)) for v in dynamic[i]]
            for i in range(g.n)
        ),
    )
    if dataset.labels is not None:
        _write(
            "labels.csv",
            ["node_id", "cluster"],
            ([int(g.node_ids[i]), int(dataset.labels[i])] for i in range(g.n)),
        )
    return files


def load_dataset_dir(directory) -> Dataset:
    d = Path(directory)
    labels = d / "labels.csv"
    return load_dataset(
        d / "nodes.csv",
        d / "edges.csv",
        d / "static.csv",
        d / "dynamic.csv",
        labels if labels.exists() else None,
    )


# ---------------------------------------------------------------------------
# Incident mapping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IncidentRecord:
    lon: float
    lat: float
    year: int
    month: int
    day: int


@dataclass
class SkipReport:
    assigned: int = 0
    skipped_out_of_range: int = 0


def month_axis(start: tuple[int, int], end: tuple[int, int]) -> list[tuple[int, int]]:
    """Inclusive month range [(y, m), ...] from start to end."""
    if (start[0], start[1]) > (end[0], end[1]):
        raise ValueError("empty time range")
    axis = []
    y, m = start
    while (y, m) <= (end[0], end[1]):
        axis.append((y, m))
        m += 1
        if m > 12:
            y, m = y + 1, 1
    return axis


def _planar(lon: np.ndarray, lat: np.ndarray, lon0: float, lat0: float) -> np.ndarray:
    """Equirectangular local projection (meters) around (lon0, lat0)."""
    x = np.deg2rad(lon - lon0) * math.cos(math.radians(lat0)) * EARTH_RADIUS_M
    y = np.deg2rad(lat - lat0) * EARTH_RADIUS_M
    return np.column_stack([x, y])


def assign_incidents(
    graph: StreetGraph,
    incidents: Sequence[IncidentRecord],
    time_range: tuple[tuple[int, int], tuple[int, int]],
) -> tuple[np.ndarray, SkipReport]:
    """Map incidents to monthly per-node counts.

    Each in-range incident is snapped to the nearest street edge
    (point-to-segment Euclidean distance in a local planar projection) and then
    to the closer of that edge's endpoints; endpoint ties go to the lower
    node id, edge ties to the lower edge index. Out-of-range incidents are
    skipped and tallied in the report.
    """
    if graph.n_edges == 0:
        raise ValueError("graph has no edges")
    axis = month_axis(*time_range)
    bin_of = {ym: t for t, ym in enumerate(axis)}
    counts = np.zeros((graph.n, len(axis)))
    report = SkipReport()

    lon0, lat0 = float(graph.lon.mean()), float(graph.lat.mean())
    nodes_xy = _planar(graph.lon, graph.lat, lon0, lat0)
    a_xy = nodes_xy[graph.edges[:, 0]]
    b_xy = nodes_xy[graph.edges[:, 1]]
    ab = b_xy - a_xy
    ab_len2 = (ab**2).sum(axis=1)
    ab_len2_safe = np.where(ab_len2 == 0, 1.0, ab_len2)

    for inc in incidents:
        if (inc.year, inc.month) not in bin_of:
            report.skipped_out_of_range += 1
            continue
        if not (math.isfinite(inc.lon) and math.isfinite(inc.lat)):
            raise ValueError(f"non-finite incident coordinates ({inc.lon}, {inc.lat})")
        p = _planar(np.array([inc.lon]), np.array([inc.lat]), lon0, lat0)[0]
        t = ((p - a_xy) * ab).sum(axis=1) / ab_len2_safe
        t = np.clip(t, 0.0, 1.0)
        proj = a_xy + t[:, None] * ab
        d2 = ((p - proj) ** 2).sum(axis=1)
        e = int(np.argmin(d2))  # ties: lowest edge index
        ia, ib = int(graph.edges[e, 0]), int(graph.edges[e, 1])
        da = ((p - nodes_xy[ia]) ** 2).sum()
        db = ((p - nodes_xy[ib]) ** 2).sum()
        if da < db:
            node = ia
        elif db < da:
            node = ib
        else:
            node = ia if graph.node_ids[ia] < graph.node_ids[ib] else ib
        counts[node, bin_of[(inc.year, inc.month)]] += 1
        report.assigned += 1
    return counts, report
