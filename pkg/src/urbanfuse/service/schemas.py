"""Pydantic request/response models for the explorer API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class NormInfo(BaseModel):
    scheme: str
    offset: float
    scale: float


class FeatureInfo(BaseModel):
    name: str
    unit: Optional[str] = None
    discrete: bool
    norm: NormInfo


class SessionMeta(BaseModel):
    session_hash: str
    n_nodes: int
    models: list[str]
    static_features: list[FeatureInfo]
    time_axis: list[str]
    k: int


class ModelProjection(BaseModel):
    ids: list[int]
    x: list[float]
    y: list[float]
    cluster: list[int]


class ProjectionsResponse(BaseModel):
    session_hash: str
    models: dict[str, ModelProjection]


class MapPoint(BaseModel):
    id: int
    lon: float
    lat: float


class MapResponse(BaseModel):
    session_hash: str
    points: list[MapPoint]


class SelectionRequest(BaseModel):
    node_ids: list[int] = Field(default_factory=list)
    source_model: Optional[str] = None


class BarData(BaseModel):
    feature: str
    bins: list[float]
    global_counts: list[int]
    selected_counts: Optional[list[int]] = None


class BoxStats(BaseModel):
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    mean: float


class Dispersion(BaseModel):
    global_std: float
    selected_std: Optional[float] = None
    selected_values: list[float] = Field(default_factory=list)


class BoxData(BaseModel):
    feature: str
    unit: Optional[str] = None
    norm: NormInfo
    global_box: BoxStats
    selected_box: Optional[BoxStats] = None
    dispersion: Dispersion


class SeriesData(BaseModel):
    time_axis: list[str]
    node_ids: list[int]
    series: list[list[float]]
    mean_series: list[float]


class StatsResponse(BaseModel):
    session_hash: str
    selection_size: int
    source_model: Optional[str] = None
    map_points: list[MapPoint]
    bar_data: list[BarData]
    box_data: list[BoxData]
    series_data: SeriesData


class StaticValue(BaseModel):
    name: str
    value: float
    unit: Optional[str] = None


class NodeResponse(BaseModel):
    session_hash: str
    id: int
    lon: float
    lat: float
    static: list[StaticValue]
    series: list[float]
    time_axis: list[str]
