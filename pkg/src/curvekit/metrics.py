"""Scalar and tensor summaries of estimated curvature.

Component convention for the Gauss-equation tensor, with h_a the Hessians
of the normal coordinates:

    R[i, l, j, k] = sum_a (h_a[i, j] h_a[l, k] - h_a[i, k] h_a[l, j])

so that the sectional curvature K(u, v) = R(u, v, u, v) / gram(u, v) of a
radius-r sphere patch comes out +1/r^2 (R[0, 1, 0, 1] = h11 h22 - h12^2
for d = 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .caml import CurvatureResult, TaylorFit
from .errors import (
    DegeneratePlane,
    DimensionTooLarge,
    EmptyInput,
    WrongDimensions,
)

RIEMANN_DIM_CAP = 16
_GRAM_TOL = 1e-12


@dataclass(frozen=True)
class RiemannTensor:
    d: int
    components: np.ndarray  # (d, d, d, d)


def _as_results(results) -> list[CurvatureResult]:
    if isinstance(results, CurvatureResult):
        return [results]
    out = list(results)
    if not out:
        raise EmptyInput("no curvature results given")
    return out


def mapc(results: CurvatureResult | Iterable[CurvatureResult]) -> float:
    """Mean absolute principal curvature over all points and directions."""
    values = np.concatenate([r.values for r in _as_results(results)])
    if values.size == 0:
        raise EmptyInput("curvature results carry no eigenvalues")
    return float(np.mean(np.abs(values)))


def mamc(results: CurvatureResult | Iterable[CurvatureResult]) -> float:
    """Mean absolute mean curvature: |mean eigenvalue| per Hessian, averaged."""
    means = np.concatenate(
        [r.principal_curvatures.mean(axis=1) for r in _as_results(results)]
    )
    if means.size == 0:
        raise EmptyInput("curvature results carry no eigenvalues")
    return float(np.mean(np.abs(means)))


def riemann_tensor(fit: TaylorFit | np.ndarray, max_dim: int = RIEMANN_DIM_CAP) -> RiemannTensor:
    """Gauss-equation curvature tensor from the fitted Hessians.

    Accepts a TaylorFit or a raw (codim, d, d) Hessian stack. The d^4
    storage is guarded by ``max_dim``.
    """
    h = fit.hessians if isinstance(fit, TaylorFit) else np.asarray(fit, dtype=np.float64)
    if h.ndim == 2:
        h = h[None]
    d = h.shape[1]
    if d > max_dim:
        raise DimensionTooLarge(f"d={d} exceeds the d^4 cap (max_dim={max_dim})")
    components = np.einsum("aij,alk->iljk", h, h) - np.einsum("aik,alj->iljk", h, h)
    return RiemannTensor(d=d, components=components)


def sectional_curvature(tensor: RiemannTensor, u, v) -> float:
    """K(u, v) = R(u, v, u, v) / (<u,u><v,v> - <u,v>^2)."""
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if u.shape[0] != tensor.d or v.shape[0] != tensor.d:
        raise WrongDimensions(f"plane vectors must have dimension {tensor.d}")
    gram = u @ u * (v @ v) - (u @ v) ** 2
    if gram <= _GRAM_TOL:
        raise DegeneratePlane(f"u, v are (near) linearly dependent (gram={gram:.3e})")
    numer = np.einsum("iljk,i,l,j,k->", tensor.components, u, v, u, v)
    return float(numer / gram)


def marc(tensor: RiemannTensor) -> float:
    """Mean absolute value over all d^4 tensor components."""
    return float(np.mean(np.abs(tensor.components)))


def masc(tensor: RiemannTensor, planes: Sequence[tuple[np.ndarray, np.ndarray]] | None = None) -> float:
    """Mean absolute sectional curvature.

    Defaults to the d(d-1)/2 coordinate-basis planes; pass explicit (u, v)
    pairs for Monte-Carlo planes.
    """
    if planes is None:
        if tensor.d < 2:
            raise WrongDimensions("sectional curvature needs d >= 2")
        eye = np.eye(tensor.d)
        planes = [(eye[i], eye[j]) for i, j in combinations(range(tensor.d), 2)]
    values = [sectional_curvature(tensor, u, v) for u, v in planes]
    if not values:
        raise EmptyInput("no planes given")
    return float(np.mean(np.abs(values)))


def random_planes(d: int, count: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Independent Gaussian plane spans for Monte-Carlo MASC."""
    g = np.random.Generator(np.random.Philox(seed))
    planes = []
    while len(planes) < count:
        u, v = g.normal(size=(2, d))
        if u @ u * (v @ v) - (u @ v) ** 2 > _GRAM_TOL:
            planes.append((u, v))
    return planes


def gaussian_curvature_2d(result: CurvatureResult) -> float:
    """Product of the two principal curvatures (d = 2, one normal direction)."""
    pc = result.principal_curvatures
    if result.d != 2 or pc.shape != (1, 2):
        raise WrongDimensions(
            f"needs d=2 with a single normal direction, got d={result.d}, shape {pc.shape}"
        )
    return float(pc[0, 0] * pc[0, 1])
