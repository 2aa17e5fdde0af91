"""Second-order local curvature estimation.

Per base point the pipeline is:

1. ``build_frame``: SVD of the base-centered neighbor matrix splits the
   ambient space into a tangent basis (top d right-singular vectors) and a
   normal basis (the rest). Neighbors are projected onto both.
2. ``fit_taylor``: each normal coordinate is regressed on the tangent
   coordinates through the quadratic design matrix
   [u_1..u_d, u_1^2..u_d^2, u_1 u_2, ..., u_{d-1} u_d]
   via a rank-revealing least-squares solve. The squared-column coefficient
   equals half the Hessian diagonal (the model carries the 1/2 on the
   quadratic form while the design matrix uses raw u^2), the cross-column
   coefficient equals the off-diagonal entry directly.
3. ``principal_curvatures``: eigenvalues of each symmetric Hessian, sorted
   descending.

The whole chain is pure and deterministic; per-point work is independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DTooLarge, NonFiniteValue, RankDeficient, ShapeMismatch, TooFewNeighbors
from .neighborhoods import NeighborhoodBatch

LSTSQ_RCOND = 1e-10          # relative singular value cutoff in the solve
CONDITION_LIMIT = 1e8        # above this the fit is flagged ill-conditioned
ORTHONORMAL_TOL = 1e-10


@dataclass(frozen=True)
class LocalFrame:
    """Orthonormal tangent/normal split at a base point.

    ``normal_basis`` spans the data-supported normal directions: with K
    neighbors in ambient dimension D it has min(K, D) - d columns. Ambient
    directions outside the neighborhood span carry identically zero
    coordinates and are reported as zero curvature downstream.
    """

    base: np.ndarray            # (D,)
    tangent_basis: np.ndarray   # (D, d)
    normal_basis: np.ndarray    # (D, m - d), m = min(K, D)
    tangent_coords: np.ndarray  # (K, d)
    normal_coords: np.ndarray   # (K, m - d)
    rank_ok: bool
    singular_values: np.ndarray

    @property
    def d(self) -> int:
        return self.tangent_basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.base.shape[0]

    @property
    def full_codim(self) -> int:
        return self.ambient_dim - self.d

    @property
    def observed_codim(self) -> int:
        return self.normal_basis.shape[1]

    @property
    def k(self) -> int:
        return self.tangent_coords.shape[0]


@dataclass(frozen=True)
class TaylorFit:
    """Per normal direction: gradient, symmetric Hessian, residual."""

    gradients: np.ndarray       # (m - d, d)
    hessians: np.ndarray        # (m - d, d, d), exactly symmetric
    residual_norms: np.ndarray  # (m - d,)
    condition_number: float
    ill_conditioned: bool
    rank_ok: bool
    d: int
    ambient_dim: int

    @property
    def full_codim(self) -> int:
        return self.ambient_dim - self.d

    @property
    def observed_codim(self) -> int:
        return self.hessians.shape[0]


@dataclass(frozen=True)
class CurvatureResult:
    """Principal curvatures: (D - d) rows of d Hessian eigenvalues."""

    principal_curvatures: np.ndarray  # (D - d, d), rows sorted descending
    d: int
    rank_ok: bool
    ill_conditioned: bool = False

    @property
    def values(self) -> np.ndarray:
        return self.principal_curvatures.reshape(-1)


def design_matrix(u: np.ndarray) -> np.ndarray:
    """Quadratic design rows [u, u^2, ordered cross products u_a u_b (a<b)]."""
    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    d = u.shape[1]
    cross = [u[:, a] * u[:, b] for a, b in combinations(range(d), 2)]
    blocks = [u, u**2] + ([np.stack(cross, axis=1)] if cross else [])
    return np.hstack(blocks)


def n_design_columns(d: int) -> int:
    return 2 * d + d * (d - 1) // 2


def build_design_matrix(frame: LocalFrame) -> np.ndarray:
    return design_matrix(frame.tangent_coords)


def feasible_intrinsic_dim(d: int, ambient_dim: int, k: int) -> int:
    """Largest d' <= d that fits the ambient dimension and neighbor budget."""
    d = min(d, ambient_dim - 1)
    while d > 1 and n_design_columns(d) > k:
        d -= 1
    return max(d, 1)


def build_frame(batch: NeighborhoodBatch, d: int) -> LocalFrame:
    """SVD frame at the base point.

    The centered neighborhood must have rank >= d + 1 for the normal
    component to be observable; ``rank_ok`` records whether it does (exactly
    flat data fails the check yet still yields valid zero curvature).
    Each normal direction is oriented so the neighbors' mean coordinate
    along it is nonnegative, making curvature signs reproducible and
    invariant under rigid motions of the input.
    """
    ambient = batch.ambient_dim
    if d >= ambient:
        raise DTooLarge(f"d={d} must be smaller than the ambient dimension {ambient}")
    if d < 1:
        raise DTooLarge(f"d must be >= 1, got {d}")
    if batch.k < d + 1:
        raise RankDeficient(f"K={batch.k} neighbors cannot span rank {d + 1}")

    centered = batch.neighbors - batch.base
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    rank = int(np.sum(s > max(centered.shape) * np.finfo(np.float64).eps * (s[0] if len(s) else 0.0)))

    tangent = vt[:d].T
    normal = vt[d:].T
    t_coords = centered @ tangent
    n_coords = centered @ normal
    flip = np.where(n_coords.sum(axis=0) < 0, -1.0, 1.0)
    normal = normal * flip
    n_coords = n_coords * flip

    return LocalFrame(
        base=batch.base,
        tangent_basis=tangent,
        normal_basis=normal,
        tangent_coords=t_coords,
        normal_coords=n_coords,
        rank_ok=rank >= d + 1,
        singular_values=s,
    )


def frame_from_basis(
    base: np.ndarray,
    neighbors: np.ndarray,
    tangent_basis: np.ndarray,
    normal_basis: np.ndarray,
) -> LocalFrame:
    """Frame with caller-supplied orthonormal axes (for known geometries)."""
    base = np.asarray(base, dtype=np.float64).reshape(-1)
    neighbors = np.asarray(neighbors, dtype=np.float64)
    joint = np.hstack([tangent_basis, normal_basis])
    gram = joint.T @ joint
    if np.max(np.abs(gram - np.eye(gram.shape[0]))) > ORTHONORMAL_TOL:
        raise ShapeMismatch("supplied tangent/normal bases are not orthonormal")
    centered = neighbors - base
    s = np.linalg.svd(centered, compute_uv=False)
    d = tangent_basis.shape[1]
    rank = int(np.sum(s > max(centered.shape) * np.finfo(np.float64).eps * (s[0] if len(s) else 0.0)))
    return LocalFrame(
        base=base,
        tangent_basis=np.asarray(tangent_basis, dtype=np.float64),
        normal_basis=np.asarray(normal_basis, dtype=np.float64),
        tangent_coords=centered @ tangent_basis,
        normal_coords=centered @ normal_basis,
        rank_ok=rank >= d + 1,
        singular_values=s,
    )


def fit_taylor(frame: LocalFrame) -> TaylorFit:
    """Least-squares fit of gradient + Hessian per normal coordinate.

    One factorization of the design matrix is shared across all normal
    directions. Singular values below LSTSQ_RCOND * max are truncated; a
    condition number above CONDITION_LIMIT flags (not fails) the fit.
    """
    d = frame.d
    cols = n_design_columns(d)
    if frame.k < cols:
        raise TooFewNeighbors(
            f"K={frame.k} neighbors < {cols} design columns for d={d}"
        )
    psi = design_matrix(frame.tangent_coords)
    coef, _, rank, svals = np.linalg.lstsq(psi, frame.normal_coords, rcond=LSTSQ_RCOND)
    if not np.all(np.isfinite(coef)):
        raise NonFiniteValue("least-squares solution contains non-finite values")

    smin = svals[rank - 1] if rank > 0 else 0.0
    condition = float(svals[0] / smin) if smin > 0 else np.inf
    codim = frame.normal_coords.shape[1]

    hessians = np.zeros((codim, d, d))
    diag_idx = np.arange(d)
    hessians[:, diag_idx, diag_idx] = 2.0 * coef[d : 2 * d].T
    for c, (a, b) in enumerate(combinations(range(d), 2)):
        hessians[:, a, b] = coef[2 * d + c]
        hessians[:, b, a] = coef[2 * d + c]

    residuals = np.linalg.norm(psi @ coef - frame.normal_coords, axis=0)
    return TaylorFit(
        gradients=coef[:d].T.copy(),
        hessians=hessians,
        residual_norms=residuals,
        condition_number=condition,
        ill_conditioned=bool(condition > CONDITION_LIMIT or rank < cols),
        rank_ok=frame.rank_ok,
        d=d,
        ambient_dim=frame.ambient_dim,
    )


def principal_curvatures(fit: TaylorFit) -> CurvatureResult:
    """Eigenvalues of every Hessian, each row sorted descending.

    Normal directions not spanned by the data (when K < D) are appended as
    zero rows so the result always carries (D - d) x d curvatures.
    """
    d = fit.d
    full = fit.full_codim
    values = np.zeros((full, d))
    if fit.observed_codim:
        eig = np.linalg.eigvalsh(fit.hessians)
        values[: fit.observed_codim] = eig[:, ::-1]
    return CurvatureResult(
        principal_curvatures=values,
        d=d,
        rank_ok=fit.rank_ok,
        ill_conditioned=fit.ill_conditioned,
    )


def estimate_point_curvature(batch: NeighborhoodBatch, d: int) -> CurvatureResult:
    """Full per-point pipeline: frame, quadratic fit, eigendecomposition."""
    return principal_curvatures(fit_taylor(build_frame(batch, d)))
