"""Layer-wise curvature/dimension profiles and the gap statistic.

A layer tensor either carries a BLK0 sidecar — rows grouped as
(base, neighbors...) blocks, the neighborhoods having been generated in
input space before export — or is a plain point cloud, in which case
neighborhoods are built by kNN around sampled base rows.

The per-layer standard deviation is taken over base points. (Profiles over
retrained-model seeds need many trained checkpoints; the substitution is
recorded in the profile metadata as ``std_over``.)
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .caml import CurvatureResult, estimate_point_curvature, feasible_intrinsic_dim
from .dimension import pc_id, relative_difference, round_id_for_caml, twonn_id
from .errors import (
    EmptyInput,
    InvalidSpec,
    MisalignedBundle,
    SizeTooLarge,
    ZeroMeanMapc,
)
from .manifolds import rng_for
from .neighborhoods import NeighborhoodBatch, knn_neighborhood
from .tensor_io import BlockMeta, LayerBundle


@dataclass(frozen=True)
class ProfileConfig:
    points: int = 100            # base points per layer
    k: int = 100                 # kNN size for layers without block structure
    d: int | None = None         # fixed intrinsic dimension; None = TwoNN per layer
    variance_threshold: float = 0.9
    discard_fraction: float = 0.1
    bins: int = 61
    seed: int = 0


@dataclass(frozen=True)
class LayerRecord:
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


@dataclass(frozen=True)
class LayerProfile:
    layers: list[LayerRecord]
    meta: dict

    def mapc_values(self) -> list[float]:
        return [l.mapc for l in self.layers]

    def to_dict(self) -> dict:
        return {"meta": dict(self.meta), "layers": [asdict(l) for l in self.layers]}

    @staticmethod
    def from_dict(payload: dict) -> "LayerProfile":
        layers = [LayerRecord(**l) for l in payload["layers"]]
        return LayerProfile(
            layers=sorted(layers, key=lambda l: l.relative_depth),
            meta=dict(payload.get("meta", {})),
        )


@dataclass(frozen=True)
class GapReport:
    mapc_gap: float
    mean_mapc: float
    nmapc_gap: float


def relative_depth(layer_index: int, total_layers: int) -> float:
    """layer_index / (total_layers - 1): endpoints land exactly on 0 and 1."""
    if total_layers < 2:
        raise InvalidSpec(f"need >= 2 layers for a depth axis, got {total_layers}")
    return layer_index / (total_layers - 1)


def _layer_batches(
    bundle: LayerBundle, config: ProfileConfig
) -> tuple[np.ndarray, list[NeighborhoodBatch]]:
    """Base-point dataset and one neighborhood per sampled base point."""
    tensor = bundle.tensor
    rows = tensor.data
    g = rng_for(config.seed)
    if isinstance(tensor.meta, BlockMeta) and tensor.meta.block_size > 1:
        bs = tensor.meta.block_size
        if rows.shape[0] % bs:
            raise MisalignedBundle(
                f"layer {bundle.layer_name!r}: {rows.shape[0]} rows are not a "
                f"multiple of block size {bs}"
            )
        n_blocks = rows.shape[0] // bs
        chosen = np.sort(g.choice(n_blocks, size=min(config.points, n_blocks), replace=False))
        bases = rows[0::bs]
        batches = [
            NeighborhoodBatch(
                base=rows[b * bs],
                neighbors=rows[b * bs + 1 : (b + 1) * bs],
                method=tensor.meta.method or "knn",
            )
            for b in chosen
        ]
        id_rows = bases if len(bases) >= 3 else rows
        return id_rows, batches
    n = rows.shape[0]
    chosen = np.sort(g.choice(n, size=min(config.points, n), replace=False))
    batches = [knn_neighborhood(rows, int(i), min(config.k, n - 1)) for i in chosen]
    return rows, batches


def build_profile(bundles: Sequence[LayerBundle], config: ProfileConfig | None = None) -> LayerProfile:
    """Dimension + curvature summary per layer, sorted by relative depth."""
    config = config or ProfileConfig()
    if len(bundles) < 2:
        raise InvalidSpec(f"need >= 2 layers, got {len(bundles)}")
    sizes = {b.tensor.rows for b in bundles}
    if len(sizes) > 1:
        raise MisalignedBundle(f"layers disagree on sample count: {sorted(sizes)}")

    records = []
    for bundle in sorted(bundles, key=lambda b: b.layer_index):
        id_rows, batches = _layer_batches(bundle, config)
        id_est = twonn_id(id_rows, config.discard_fraction)
        spectrum = pc_id(id_rows, config.variance_threshold)
        d_used = config.d if config.d is not None else round_id_for_caml(id_est.id)
        d_used = feasible_intrinsic_dim(d_used, bundle.tensor.cols, min(b.k for b in batches))

        results = [estimate_point_curvature(b, d_used) for b in batches]
        point_mapcs = np.array([np.mean(np.abs(r.values)) for r in results])
        edges, counts = curvature_histogram(results, config.bins)
        records.append(
            LayerRecord(
                name=bundle.layer_name,
                layer_index=bundle.layer_index,
                relative_depth=relative_depth(bundle.layer_index, bundle.total_layers),
                mapc=float(point_mapcs.mean()),
                mapc_std=float(point_mapcs.std()),
                id=id_est.id,
                pc_id=spectrum.pc_id,
                rd=relative_difference(spectrum.pc_id, id_est.id),
                mge=spectrum.mge,
                d_used=d_used,
                n_points=len(batches),
                hist_edges=[float(e) for e in edges],
                hist_counts=[int(c) for c in counts],
            )
        )

    records.sort(key=lambda r: r.relative_depth)
    meta = {
        "points": config.points,
        "k": config.k,
        "seed": config.seed,
        "d_source": "fixed" if config.d is not None else "twonn",
        "std_over": "base_points",
        "bins": config.bins,
    }
    return LayerProfile(layers=records, meta=meta)


def gap_from_mapcs(mapcs: Sequence[float]) -> GapReport:
    """Gap between the last two layers, normalized by the all-layer mean."""
    if len(mapcs) < 2:
        raise InvalidSpec(f"need >= 2 layers, got {len(mapcs)}")
    gap = float(mapcs[-1] - mapcs[-2])
    mean = float(np.mean(mapcs))
    if mean <= 0:
        raise ZeroMeanMapc(f"mean curvature {mean} cannot normalize the gap")
    return GapReport(mapc_gap=gap, mean_mapc=mean, nmapc_gap=gap / mean)


def nmapc_gap(profile: LayerProfile) -> GapReport:
    return gap_from_mapcs(profile.mapc_values())


def curvature_histogram(
    results: CurvatureResult | Sequence[CurvatureResult], bins: int
) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of all principal curvatures on symmetric log-spaced bins.

    Odd ``bins`` put a linear bin astride zero; even ``bins`` place an edge
    at zero. The log range spans nine decades below the largest magnitude.
    """
    if bins < 1:
        raise InvalidSpec(f"bins must be >= 1, got {bins}")
    if isinstance(results, CurvatureResult):
        results = [results]
    results = list(results)
    if not results:
        raise EmptyInput("no curvature results given")
    values = np.concatenate([r.values for r in results])
    if values.size == 0:
        raise EmptyInput("curvature results carry no eigenvalues")

    amax = float(np.max(np.abs(values)))
    if amax == 0.0:
        edges = np.linspace(-1.0, 1.0, bins + 1)
    elif bins == 1:
        edges = np.array([-amax, amax])
    else:
        delta = amax * 1e-9
        if bins % 2:
            pos = np.geomspace(delta, amax, (bins - 1) // 2 + 1)
            edges = np.concatenate([-pos[::-1], pos])
        else:
            nside = bins // 2
            pos = np.geomspace(delta, amax, nside) if nside >= 2 else np.array([amax])
            edges = np.concatenate([-pos[::-1], [0.0], pos])
    counts, edges = np.histogram(values, bins=edges)
    return edges, counts


def subsample_stability(
    batch: NeighborhoodBatch,
    d: int,
    sizes: Sequence[int],
    trials: int,
    seed: int,
) -> list[tuple[int, float, float]]:
    """Mean/std of the point's curvature summary over repeated subsampling.

    Each trial draws ``size`` neighbors without replacement (indices kept in
    canonical order, so size == K repeats the identical full set).
    """
    if trials < 1:
        raise InvalidSpec(f"need >= 1 trial, got {trials}")
    for size in sizes:
        if size > batch.k:
            raise SizeTooLarge(f"size {size} exceeds neighborhood size {batch.k}")
    g = rng_for(seed)
    table = []
    for size in sizes:
        mapcs = []
        for _ in range(trials):
            idx = np.sort(g.choice(batch.k, size=size, replace=False))
            sub = NeighborhoodBatch(
                base=batch.base, neighbors=batch.neighbors[idx], method=batch.method
            )
            result = estimate_point_curvature(sub, d)
            mapcs.append(np.mean(np.abs(result.values)))
        table.append((int(size), float(np.mean(mapcs)), float(np.std(mapcs))))
    return table


CSV_COLUMNS = ["relative_depth", "mapc", "mapc_std", "id", "pc_id", "rd", "mge"]


def profile_to_csv(profile: LayerProfile) -> str:
    """Plot-ready CSV with one row per layer."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CSV_COLUMNS)
    for l in profile.layers:
        writer.writerow([l.relative_depth, l.mapc, l.mapc_std, l.id, l.pc_id, l.rd, l.mge])
    return buf.getvalue()
