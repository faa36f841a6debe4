from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from urbanfuse import data
from urbanfuse.data import (
    Dataset,
    IncidentRecord,
    SchemaError,
    assign_incidents,
    load_dataset,
    load_dataset_dir,
    month_axis,
    normalize_features,
    save_dataset,
)
from urbanfuse.graph import GraphError, StreetGraph

from .oracles import point_to_segment_distance


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def _toy_files(tmp_path: Path, static_cell="1.5", with_labels=False):
    nodes = _write(
        tmp_path / "nodes.csv",
        "node_id,lon,lat\n0,-46.60,-23.55\n1,-46.61,-23.55\n2,-46.60,-23.56\n3,-46.59,-23.54\n",
    )
    edges = _write(tmp_path / "edges.csv", "src,dst\n0,1\n1,2\n2,3\n")
    static = _write(
        tmp_path / "static.csv",
        f"node_id,income,flag\n0,{static_cell},1\n1,2.5,0\n2,3.5,1\n3,4.5,0\n",
    )
    dynamic = _write(
        tmp_path / "dynamic.csv",
        "node_id,2006-01,2006-02,2006-03\n0,1,0,2\n1,0,0,1\n2,3,1,0\n3,2,2,2\n",
    )
    labels = None
    if with_labels:
        labels = _write(tmp_path / "labels.csv", "node_id,cluster\n0,0\n1,0\n2,1\n3,1\n")
    return nodes, edges, static, dynamic, labels


class TestLoadDataset:
    def test_toy_round_trip(self, tmp_path):
        nodes, edges, static, dynamic, labels = _toy_files(tmp_path, with_labels=True)
        ds = load_dataset(nodes, edges, static, dynamic, labels)
        assert ds.n == 4
        assert ds.n_static == 2
        assert ds.n_timesteps == 3
        assert ds.static_names == ["income", "flag"]
        assert ds.time_axis == [(2006, 1), (2006, 2), (2006, 3)]
        assert (ds.labels == [0, 0, 1, 1]).all()

    def test_dangling_edge_endpoint(self, tmp_path):
        nodes, edges, static, dynamic, _ = _toy_files(tmp_path)
        _write(tmp_path / "edges.csv", "src,dst\n0,1\n1,99\n")
        with pytest.raises(SchemaError, match="99"):
            load_dataset(nodes, edges, static, dynamic)

    def test_nan_static_cell_names_row_and_column(self, tmp_path):
        nodes, edges, static, dynamic, _ = _toy_files(tmp_path, static_cell="NaN")
        with pytest.raises(SchemaError) as excinfo:
            load_dataset(nodes, edges, static, dynamic)
        msg = str(excinfo.value)
        assert "income" in msg and "line 2" in msg

    def test_row_count_mismatch(self, tmp_path):
        nodes, edges, static, dynamic, _ = _toy_files(tmp_path)
        _write(tmp_path / "static.csv", "node_id,income,flag\n0,1.0,1\n1,2.0,0\n")
        with pytest.raises(SchemaError, match="does not match node count"):
            load_dataset(nodes, edges, static, dynamic)

    def test_duplicate_edge_rejected(self, tmp_path):
        nodes, edges, static, dynamic, _ = _toy_files(tmp_path)
        _write(tmp_path / "edges.csv", "src,dst\n0,1\n1,0\n")
        with pytest.raises((SchemaError, GraphError), match="duplicate"):
            load_dataset(nodes, edges, static, dynamic)

    def test_negative_dynamic_rejected(self, tmp_path):
        nodes, edges, static, dynamic, _ = _toy_files(tmp_path)
        _write(
            tmp_path / "dynamic.csv",
            "node_id,2006-01\n0,1\n1,0\n2,-3\n3,2\n",
        )
        with pytest.raises(SchemaError, match="negative"):
            load_dataset(nodes, edges, static, dynamic)

    def test_save_load_idempotent(self, tmp_path):
        nodes, edges, static, dynamic, labels = _toy_files(tmp_path, with_labels=True)
        ds = load_dataset(nodes, edges, static, dynamic, labels)
        out1 = tmp_path / "round1"
        save_dataset(ds, out1)
        ds2 = load_dataset_dir(out1)
        out2 = tmp_path / "round2"
        save_dataset(ds2, out2)
        for name in ("nodes.csv", "edges.csv", "static.csv", "dynamic.csv", "labels.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        assert (ds.static == ds2.static).all()
        assert (ds.dynamic == ds2.dynamic).all()

    def test_adjacency_symmetric(self, tmp_path):
        nodes, edges, static, dynamic, _ = _toy_files(tmp_path)
        ds = load_dataset(nodes, edges, static, dynamic)
        adj = ds.graph.adjacency
        for v, neigh in enumerate(adj):
            for u in neigh:
                assert v in adj[u]


class TestNormalize:
    def _dataset(self, static):
        graph = StreetGraph(
            node_ids=np.arange(3),
            lon=np.zeros(3),
            lat=np.zeros(3),
            edges=np.array([[0, 1], [1, 2]]),
        )
        return Dataset(
            graph=graph,
            static=np.asarray(static, dtype=float),
            static_names=[f"c{j}" for j in range(np.asarray(static).shape[1])],
            dynamic=np.array([[1.0, 2.0], [0.0, 1.0], [3.0, 5.0]]),
            time_axis=[(2006, 1), (2006, 2)],
        )

    def test_min_max_column(self):
        ds = self._dataset([[0.0], [5.0], [10.0]])
        out = normalize_features(ds, "min-max")
        assert out.static[:, 0].tolist() == [0.0, 0.5, 1.0]

    def test_constant_column_left_at_zero_with_warning(self):
        ds = self._dataset([[7.0], [7.0], [7.0]])
        with pytest.warns(UserWarning, match="constant"):
            out = normalize_features(ds, "min-max")
        assert out.static[:, 0].tolist() == [0.0, 0.0, 0.0]

    def test_zscore_constant_column(self):
        ds = self._dataset([[7.0], [7.0], [7.0]])
        with pytest.warns(UserWarning, match="constant"):
            out = normalize_features(ds, "z-score")
        assert out.static[:, 0].tolist() == [0.0, 0.0, 0.0]

    def test_round_trip_identity(self):
        rng = np.random.default_rng(5)
        ds = self._dataset(rng.uniform(-4, 9, size=(3, 6)))
        for scheme in ("min-max", "z-score", "none"):
            out = normalize_features(ds, scheme)
            back_s = out.original_static()
            back_d = out.original_dynamic()
            assert np.abs(back_s - ds.static).max() < 1e-12
            assert np.abs(back_d - ds.dynamic).max() < 1e-12

    def test_unknown_scheme(self):
        ds = self._dataset([[1.0], [2.0], [3.0]])
        with pytest.raises(ValueError, match="scheme"):
            normalize_features(ds, "robust")


def _incident_graph() -> StreetGraph:
    # three edges forming a path with a spur; ids deliberately not sorted by position
    return StreetGraph(
        node_ids=np.array([7, 3, 11, 5]),
        lon=np.array([0.0, 2.0, 4.0, 2.0]),
        lat=np.array([0.0, 0.0, 0.0, 2.0]),
        edges=np.array([[0, 1], [1, 2], [1, 3]]),
    )


class TestAssignIncidents:
    RANGE = ((2006, 1), (2006, 3))

    def test_incident_on_node_coordinates(self):
        g = _incident_graph()
        inc = [IncidentRecord(lon=0.0, lat=0.0, year=2006, month=2, day=14)]
        counts, rep = assign_incidents(g, inc, self.RANGE)
        assert counts[0, 1] == 1
        assert counts.sum() == 1
        assert rep.assigned == 1

    def test_equidistant_endpoints_take_lower_node_id(self):
        g = _incident_graph()
        # midpoint of the edge between ids 7 (lon 0) and 3 (lon 2): exact tie
        inc = [IncidentRecord(lon=1.0, lat=0.0, year=2006, month=1, day=1)]
        counts, _ = assign_incidents(g, inc, self.RANGE)
        winner = int(np.flatnonzero(counts.sum(axis=1))[0])
        assert int(g.node_ids[winner]) == 3

    def test_out_of_range_skipped_and_counted(self):
        g = _incident_graph()
        inc = [
            IncidentRecord(lon=0.0, lat=0.0, year=2005, month=12, day=31),
            IncidentRecord(lon=0.0, lat=0.0, year=2006, month=1, day=1),
        ]
        counts, rep = assign_incidents(g, inc, self.RANGE)
        assert counts.sum() == 1
        assert rep.assigned == 1
        assert rep.skipped_out_of_range == 1

    def test_mass_conservation_and_oracle_agreement(self):
        g = _incident_graph()
        rng = np.random.default_rng(101)
        incidents = [
            IncidentRecord(
                lon=float(rng.uniform(-1, 5)),
                lat=float(rng.uniform(-1, 3)),
                year=2006,
                month=int(rng.integers(1, 4)),
                day=1,
            )
            for _ in range(10)
        ]
        counts, rep = assign_incidents(g, incidents, self.RANGE)
        assert counts.sum() == rep.assigned == 10

        # independent scan over every edge and endpoint in the same projection
        lon0, lat0 = float(g.lon.mean()), float(g.lat.mean())
        def planar(lon, lat):
            r = data.EARTH_RADIUS_M
            return (
                math.radians(lon - lon0) * math.cos(math.radians(lat0)) * r,
                math.radians(lat - lat0) * r,
            )

        expected = np.zeros_like(counts)
        for inc in incidents:
            p = planar(inc.lon, inc.lat)
            best_edge, best_d = None, math.inf
            for e, (ia, ib) in enumerate(g.edges):
                d = point_to_segment_distance(
                    p, planar(g.lon[ia], g.lat[ia]), planar(g.lon[ib], g.lat[ib])
                )
                if d < best_d - 1e-12:
                    best_edge, best_d = e, d
            ia, ib = g.edges[best_edge]
            da = math.dist(p, planar(g.lon[ia], g.lat[ia]))
            db = math.dist(p, planar(g.lon[ib], g.lat[ib]))
            if abs(da - db) < 1e-12:
                node = ia if g.node_ids[ia] < g.node_ids[ib] else ib
            else:
                node = ia if da < db else ib
            expected[node, inc.month - 1] += 1
        assert (counts == expected).all()

    def test_empty_time_range_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            month_axis((2007, 1), (2006, 12))

    def test_graph_without_edges_rejected(self):
        g = StreetGraph(node_ids=np.arange(2), lon=np.zeros(2), lat=np.zeros(2), edges=np.empty((0, 2)))
        with pytest.raises(ValueError, match="edge"):
            assign_incidents(g, [], self.RANGE)


class TestGraph:
    def test_self_loop_rejected(self):
        with pytest.raises(GraphError, match="self-loop"):
            StreetGraph(
                node_ids=np.arange(2),
                lon=np.zeros(2),
                lat=np.zeros(2),
                edges=np.array([[1, 1]]),
            )

    def test_mean_adjacency_rows(self):
        g = _incident_graph()
        a = g.mean_adjacency().toarray()
        assert a[0].sum() == pytest.approx(1.0)  # degree-1 node
        assert a[1, 0] == pytest.approx(1.0 / 3.0)  # degree-3 node
        assert (a.sum(axis=1) > 0).all()
