"""Intrinsic and linear dimension estimation.

The nearest-neighbor estimator uses the two-NN distance-ratio statistic:
under locally uniform sampling on a d-manifold, log(r2/r1) is exponential
with rate d. The maximum-likelihood fit keeps the smallest (1 - discard)
fraction of ratios; the discarded ones enter as censored observations at
the cutoff, which keeps the estimate unbiased (a naive mean over the kept
ratios alone would overestimate d by ~1/3 at 10% discard).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import AllPointsDuplicate, DegenerateData, InvalidSpec, TooFewPoints
from .tensor_io import Tensor2D


@dataclass(frozen=True)
class IdEstimate:
    id: float
    n_used: int
    discard_fraction: float


@dataclass(frozen=True)
class SpectrumSummary:
    """Covariance eigenvalues (descending) with PC-ID and max-gap summary."""

    eigenvalues: np.ndarray
    pc_id: int
    mge: float


def _as_array(data) -> np.ndarray:
    return data.data if isinstance(data, Tensor2D) else np.asarray(data, dtype=np.float64)


def twonn_id(data, discard_fraction: float = 0.1) -> IdEstimate:
    """Two-NN intrinsic dimension (MLE with censored top ratios).

    Exact duplicate rows are removed first so the first-neighbor distance is
    always positive. Equal distances are resolved by lower row index.
    """
    if not 0 <= discard_fraction < 1:
        raise InvalidSpec(f"discard_fraction must be in [0, 1), got {discard_fraction}")
    arr = _as_array(data)
    unique = np.unique(arr, axis=0)
    if len(unique) == 1 and len(arr) > 1:
        raise AllPointsDuplicate(f"all {len(arr)} points are identical")
    if len(unique) < 3:
        raise TooFewPoints(f"need >= 3 distinct points, got {len(unique)}")

    n = len(unique)
    dist, _ = cKDTree(unique).query(unique, k=3)
    mu = np.sort(dist[:, 2] / dist[:, 1])
    n_used = max(2, int(math.floor(n * (1.0 - discard_fraction))))
    log_kept = np.log(mu[:n_used])
    denom = float(log_kept.sum() + (n - n_used) * log_kept[-1])
    if denom <= 0:
        raise DegenerateData("all neighbor-distance ratios are 1; no dimension signal")
    return IdEstimate(id=n_used / denom, n_used=n_used, discard_fraction=discard_fraction)


def pc_id(data, variance_threshold: float = 0.9) -> SpectrumSummary:
    """Linear dimension: principal components covering the variance threshold.

    Eigenvalues come from the (1/(N-1))-normalized covariance of the
    mean-centered data; mge is the largest consecutive gap after min-max
    scaling the spectrum to [0, 1].
    """
    if not 0 < variance_threshold <= 1:
        raise InvalidSpec(f"variance_threshold must be in (0, 1], got {variance_threshold}")
    arr = _as_array(data)
    n, d = arr.shape
    if n < 2:
        raise TooFewPoints(f"need >= 2 points, got {n}")
    centered = arr - arr.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    lam = np.zeros(d)
    lam[: len(s)] = s**2 / (n - 1)
    total = lam.sum()
    if total == 0:
        raise DegenerateData("all points identical; covariance spectrum is zero")
    k = int(np.searchsorted(np.cumsum(lam), variance_threshold * total * (1 - 1e-12)) + 1)
    k = min(k, d)

    span = lam[0] - lam[-1]
    if d < 2 or span == 0:
        mge = 0.0
    else:
        scaled = (lam - lam[-1]) / span
        mge = float(np.max(scaled[:-1] - scaled[1:]))
    return SpectrumSummary(eigenvalues=lam, pc_id=k, mge=mge)


def relative_difference(pc_id_value: int, id_value: float) -> float:
    """|PC-ID - ID| / ID."""
    if id_value <= 0:
        raise InvalidSpec(f"id must be positive, got {id_value}")
    return abs(pc_id_value - id_value) / id_value


def round_id_for_caml(id_value: float) -> int:
    """Nearest integer, minimum 1, ties rounding up."""
    if id_value <= 0:
        raise InvalidSpec(f"id must be positive, got {id_value}")
    return max(1, int(math.floor(id_value + 0.5)))
