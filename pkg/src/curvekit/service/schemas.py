"""Request/response models for the HTTP service.

Binary LTNT/LBND payloads travel base64-encoded inside JSON bodies; every
other field is plain JSON.
"""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    error: str
    detail: str


# --- gen ---

class GenRequest(BaseModel):
    shape: Literal["sphere", "ellipsoid", "patch"]
    n: int = Field(ge=1)
    seed: int = 0
    radius: float = 1.0
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    intrinsic_dim: int = 2
    ambient_dim: int = 3
    extent: float = 1.0
    noise_sigma: float = 0.0
    hessians: list[list[list[float]]] | None = None


class GenResponse(BaseModel):
    ltnt_b64: str
    rows: int
    cols: int


# --- neighborhoods ---

class NeighborhoodRequest(BaseModel):
    method: Literal["svd", "knn", "affine"]
    ltnt_b64: str
    tail_size: int = 10
    k: int = 100
    index: int = 0
    count: int = 64
    seed: int = 0


class NeighborhoodResponse(BaseModel):
    batch_b64: str
    k: int
    ambient_dim: int
    method: str
    mean_distance_to_center: float


# --- dimension ---

class IdRequest(BaseModel):
    ltnt_b64: str
    method: Literal["twonn", "pcid", "both"] = "both"
    variance_threshold: float = 0.9
    discard_fraction: float = 0.1


class TwoNnOut(BaseModel):
    id: float
    n_used: int
    discard_fraction: float


class SpectrumOut(BaseModel):
    pc_id: int
    mge: float
    eigenvalues: list[float]


class IdResponse(BaseModel):
    twonn: TwoNnOut | None = None
    pcid: SpectrumOut | None = None
    rd: float | None = None


# --- curvature ---

class CurvatureRequest(BaseModel):
    batch_b64: str
    d: Union[int, Literal["auto"]] = "auto"
    include_hessians: bool = False


class PointCurvature(BaseModel):
    d: int
    rank_ok: bool
    ill_conditioned: bool
    principal_curvatures: list[list[float]]
    mapc: float
    gaussian_curvature: float | None = None
    hessians: list[list[list[float]]] | None = None


class BundleCurvatureRequest(BaseModel):
    bundle_b64: str
    d: Union[int, Literal["auto"]] = "auto"
    k: int = 100
    points: int = 100
    seed: int = 0
    include_hessians: bool = False


class LayerCurvatures(BaseModel):
    layer_name: str
    layer_index: int
    relative_depth: float
    d_used: int
    points: list[PointCurvature]


class BundleCurvatureResponse(BaseModel):
    layers: list[LayerCurvatures]


# --- metrics ---

class MetricsRequest(BaseModel):
    curvature: dict
    metric: Literal["mapc", "mamc", "marc", "masc"]
    planes: str = "coord"  # "coord" or "random:<n>"
    seed: int = 0


class MetricsResponse(BaseModel):
    metric: str
    value: float
    n_points: int


# --- profile / gap ---

class ProfileRequest(BaseModel):
    bundle_b64: str
    points: int = 100
    k: int = 100
    d: int | None = None
    bins: int = 61
    seed: int = 0
    variance_threshold: float = 0.9
    discard_fraction: float = 0.1


class ProfileLayerOut(BaseModel):
    name: str
    layer_index: int
    relative_depth: float
    mapc: float
    mapc_std: float
    id: float
    pc_id: int
    rd: float
    mge: float
    d_used: int
    n_points: int
    hist_edges: list[float]
    hist_counts: list[int]


class ProfileResponse(BaseModel):
    meta: dict
    layers: list[ProfileLayerOut]
    csv: str


class GapRequest(BaseModel):
    profile: dict | None = None
    mapc_values: list[float] | None = None


class GapResponse(BaseModel):
    mapc_gap: float
    mean_mapc: float
    nmapc_gap: float
