"""Read-only explorer API over one completed session.

The session is loaded once at startup and never mutated; selections live in
the request body, so concurrent clients cannot affect each other and identical
requests always produce identical responses. Every response carries the
session config hash for client-side cache validation.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from ..data import Dataset, Normalization
from ..metrics import kmeans
from ..session import MODEL_KEYS, Session
from .schemas import (
    BarData,
    BoxData,
    BoxStats,
    Dispersion,
    FeatureInfo,
    MapPoint,
    MapResponse,
    ModelProjection,
    NodeResponse,
    NormInfo,
    ProjectionsResponse,
    SelectionRequest,
    SessionMeta,
    SeriesData,
    StaticValue,
    StatsResponse,
)

_INTEGRALITY_TOL = 1e-9


def _box_stats(values: np.ndarray) -> BoxStats:
    q1, med, q3 = (float(np.percentile(values, q)) for q in (25, 50, 75))
    iqr = q3 - q1
    in_lo = values[values >= q1 - 1.5 * iqr]
    in_hi = values[values <= q3 + 1.5 * iqr]
    return BoxStats(
        q1=q1,
        median=med,
        q3=q3,
        whisker_low=float(in_lo.min()) if in_lo.size else q1,
        whisker_high=float(in_hi.max()) if in_hi.size else q3,
        mean=float(values.mean()),
    )


class ExplorerState:
    """Derived read-only views over the session used by the endpoints."""

    def __init__(self, session: Session):
        self.session = session
        ds = session.dataset
        self.dataset: Dataset = ds
        self.node_ids = ds.graph.node_ids
        self.index_of = {int(i): pos for pos, i in enumerate(self.node_ids)}
        self.static_original = ds.original_static()
        norm = session.normalization
        if norm is None:
            # sessions are trained before serving, but fall back to min-max
            from ..data import normalize_features

            normalized = normalize_features(ds, "min-max")
            norm = normalized.normalization
            self.static_display = normalized.static
        else:
            self.static_display = (ds.static - norm.static_offset) / norm.static_scale
        self.normalization: Normalization = norm
        self.dynamic_original = ds.original_dynamic()
        self.time_axis = [f"{y:04d}-{m:02d}" for y, m in ds.time_axis]
        self.discrete = [
            bool(np.all(np.abs(col - np.round(col)) <= _INTEGRALITY_TOL))
            for col in self.static_original.T
        ]
        self.bins = {
            j: np.unique(np.round(self.static_original[:, j]))
            for j, disc in enumerate(self.discrete)
            if disc
        }
        self.global_mean_series = self.dynamic_original.mean(axis=0)
        eval_cfg = session.config.get("eval") or {}
        self.k = int(eval_cfg.get("k", 12))
        k_seed = eval_cfg.get("seed") or 0
        self.clusters = {
            key: kmeans(session.embeddings.embeddings[key], self.k, k_seed).labels
            for key in MODEL_KEYS
        }

    def norm_info(self, j: int) -> NormInfo:
        nm = self.normalization
        return NormInfo(
            scheme=nm.scheme,
            offset=float(nm.static_offset[j]),
            scale=float(nm.static_scale[j]),
        )

    def unit(self, j: int) -> Optional[str]:
        units = self.dataset.static_units
        return units[j] if units else None

    def resolve(self, node_ids: list[int]) -> np.ndarray:
        rows = []
        for nid in node_ids:
            if int(nid) not in self.index_of:
                raise HTTPException(status_code=404, detail=f"unknown node id {nid}")
            rows.append(self.index_of[int(nid)])
        return np.array(sorted(set(rows)), dtype=np.int64)


def create_app(session_dir) -> FastAPI:
    session = Session.load(Path(session_dir))
    state = ExplorerState(session)
    app = FastAPI(title="urbanfuse explorer", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    shash = session.config_hash

    @app.get("/session/meta", response_model=SessionMeta)
    def meta() -> SessionMeta:
        return SessionMeta(
            session_hash=shash,
            n_nodes=state.dataset.n,
            models=MODEL_KEYS,
            static_features=[
                FeatureInfo(
                    name=name,
                    unit=state.unit(j),
                    discrete=state.discrete[j],
                    norm=state.norm_info(j),
                )
                for j, name in enumerate(state.dataset.static_names)
            ],
            time_axis=state.time_axis,
            k=state.k,
        )

    @app.get("/projections", response_model=ProjectionsResponse)
    def projections() -> ProjectionsResponse:
        models = {}
        for key in MODEL_KEYS:
            coords = session.projections[key]
            models[key] = ModelProjection(
                ids=[int(i) for i in state.node_ids],
                x=[float(v) for v in coords[:, 0]],
                y=[float(v) for v in coords[:, 1]],
                cluster=[int(c) for c in state.clusters[key]],
            )
        return ProjectionsResponse(session_hash=shash, models=models)

    @app.get("/map", response_model=MapResponse)
    def map_points() -> MapResponse:
        g = state.dataset.graph
        return MapResponse(
            session_hash=shash,
            points=[
                MapPoint(id=int(g.node_ids[i]), lon=float(g.lon[i]), lat=float(g.lat[i]))
                for i in range(g.n)
            ],
        )

    @app.post("/stats", response_model=StatsResponse)
    def stats(request: SelectionRequest) -> StatsResponse:
        if request.source_model is not None and request.source_model not in MODEL_KEYS:
            raise HTTPException(status_code=400, detail=f"unknown model {request.source_model}")
        rows = state.resolve(request.node_ids)
        selected = rows.size > 0
        g = state.dataset.graph

        bar_data = []
        for j, disc in enumerate(state.discrete):
            if not disc:
                continue
            bins = state.bins[j]
            col = np.round(state.static_original[:, j])
            global_counts = [int((col == b).sum()) for b in bins]
            selected_counts = (
                [int((col[rows] == b).sum()) for b in bins] if selected else None
            )
            bar_data.append(
                BarData(
                    feature=state.dataset.static_names[j],
                    bins=[float(b) for b in bins],
                    global_counts=global_counts,
                    selected_counts=selected_counts,
                )
            )

        box_data = []
        for j, name in enumerate(state.dataset.static_names):
            col = state.static_display[:, j]
            sel_vals = col[rows] if selected else np.empty(0)
            box_data.append(
                BoxData(
                    feature=name,
                    unit=state.unit(j),
                    norm=state.norm_info(j),
                    global_box=_box_stats(col),
                    selected_box=_box_stats(sel_vals) if selected else None,
                    dispersion=Dispersion(
                        global_std=float(col.std()),
                        selected_std=float(sel_vals.std()) if selected else None,
                        selected_values=[float(v) for v in sel_vals],
                    ),
                )
            )

        series = state.dynamic_original[rows] if selected else np.empty((0, state.dataset.n_timesteps))
        mean_series = series.mean(axis=0) if selected else state.global_mean_series
        return StatsResponse(
            session_hash=shash,
            selection_size=int(rows.size),
            source_model=request.source_model,
            map_points=[
                MapPoint(id=int(g.node_ids[i]), lon=float(g.lon[i]), lat=float(g.lat[i]))
                for i in rows
            ],
            bar_data=bar_data,
            box_data=box_data,
            series_data=SeriesData(
                time_axis=state.time_axis,
                node_ids=[int(g.node_ids[i]) for i in rows],
                series=[[float(v) for v in row] for row in series],
                mean_series=[float(v) for v in mean_series],
            ),
        )

    @app.get("/node/{node_id}", response_model=NodeResponse)
    def node(node_id: int) -> NodeResponse:
        if node_id not in state.index_of:
            raise HTTPException(status_code=404, detail=f"unknown node id {node_id}")
        i = state.index_of[node_id]
        g = state.dataset.graph
        return NodeResponse(
            session_hash=shash,
            id=node_id,
            lon=float(g.lon[i]),
            lat=float(g.lat[i]),
            static=[
                StaticValue(
                    name=name,
                    value=float(state.static_original[i, j]),
                    unit=state.unit(j),
                )
                for j, name in enumerate(state.dataset.static_names)
            ],
            series=[float(v) for v in state.dynamic_original[i]],
            time_axis=state.time_axis,
        )

    return app
