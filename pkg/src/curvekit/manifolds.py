"""Sampled manifolds with known geometry, plus their closed-form oracles.

Generators use a counter-based PRNG (Philox) keyed by the caller's seed, so
fixed seeds reproduce bit-identical clouds; parallel callers should derive
per-task seeds rather than share a stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidRadius, InvalidSpec, OffSurface
from .tensor_io import Tensor2D

SURFACE_TOL = 1e-6


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class EllipsoidSpec:
    """Semi-axes of (x/a)^2 + (y/b)^2 + (z/c)^2 = 1."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0:
            raise InvalidSpec(f"semi-axes must be positive, got {(self.a, self.b, self.c)}")


@dataclass(frozen=True)
class QuadraticPatchSpec:
    """Graph patch (x, f(x)) with f_a(x) = x^T H_a x / 2 over [-extent, extent]^d.

    ``hessians`` has shape (D-d, d, d); each matrix must be symmetric, so the
    patch's principal curvatures at the origin are exactly their eigenvalues.
    """

    hessians: np.ndarray
    extent: float = 1.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.hessians, dtype=np.float64)
        if h.ndim != 3 or h.shape[1] != h.shape[2]:
            raise InvalidSpec(f"hessians must have shape (D-d, d, d), got {h.shape}")
        if h.shape[0] < 1 or h.shape[1] < 1:
            raise InvalidSpec("need D > d >= 1")
        asym = np.max(np.abs(h - h.transpose(0, 2, 1))) if h.size else 0.0
        if asym > 1e-12:
            raise InvalidSpec(f"hessians must be symmetric within 1e-12, worst {asym:.3e}")
        if self.extent <= 0:
            raise InvalidSpec(f"extent must be positive, got {self.extent}")
        if self.noise_sigma < 0:
            raise InvalidSpec(f"noise_sigma must be nonnegative, got {self.noise_sigma}")
        h.setflags(write=False)
        object.__setattr__(self, "hessians", h)

    @property
    def intrinsic_dim(self) -> int:
        return self.hessians.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.hessians.shape[1] + self.hessians.shape[0]


def sample_sphere(radius: float, n: int, seed: int) -> Tensor2D:
    """Uniform sample on the radius-r sphere via normalized Gaussians."""
    if radius <= 0:
        raise InvalidRadius(f"radius must be positive, got {radius}")
    if n < 1:
        raise InvalidSpec(f"need n >= 1, got {n}")
    v = rng_for(seed).normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return Tensor2D(radius * v)


def sample_ellipsoid(spec: EllipsoidSpec, n: int, seed: int) -> Tensor2D:
    """Sphere sample scaled by the semi-axes.

    Not area-uniform on the ellipsoid (the scaling distorts density); fine
    for per-point error statistics, which is how the samples are consumed.
    """
    sphere = sample_sphere(1.0, n, seed)
    return Tensor2D(sphere.data * np.array([spec.a, spec.b, spec.c]))


def ellipsoid_gauss_curvature(spec: EllipsoidSpec, p) -> float | np.ndarray:
    """Analytic Gaussian curvature at on-surface point(s) p.

    K(x,y,z) = 1 / (a^2 b^2 c^2 (x^2/a^4 + y^2/b^4 + z^2/c^4)^2). Accepts a
    single 3-vector or an (N, 3) array.
    """
    pts = np.asarray(p, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != 3:
        raise InvalidSpec(f"points must be 3-vectors, got shape {pts.shape}")
    a, b, c = spec.a, spec.b, spec.c
    residual = (pts[:, 0] / a) ** 2 + (pts[:, 1] / b) ** 2 + (pts[:, 2] / c) ** 2 - 1.0
    worst = int(np.argmax(np.abs(residual)))
    if abs(residual[worst]) > SURFACE_TOL:
        raise OffSurface(
            f"point {pts[worst]} misses the surface by {abs(residual[worst]):.3e} "
            f"(tolerance {SURFACE_TOL})"
        )
    s = pts[:, 0] ** 2 / a**4 + pts[:, 1] ** 2 / b**4 + pts[:, 2] ** 2 / c**4
    k = 1.0 / (a * a * b * b * c * c * s * s)
    return float(k[0]) if single else k


def sample_quadratic_patch(spec: QuadraticPatchSpec, n: int, seed: int) -> Tensor2D:
    """Rows [x, f_1(x) .. f_{D-d}(x)] with x uniform in [-extent, extent]^d.

    With noise_sigma > 0, i.i.d. Gaussian noise is added to all ambient
    coordinates.
    """
    if n < 1:
        raise InvalidSpec(f"need n >= 1, got {n}")
    g = rng_for(seed)
    d = spec.intrinsic_dim
    x = g.uniform(-spec.extent, spec.extent, size=(n, d))
    f = 0.5 * np.einsum("ni,aij,nj->na", x, spec.hessians, x)
    pts = np.hstack([x, f])
    if spec.noise_sigma > 0:
        pts = pts + g.normal(scale=spec.noise_sigma, size=pts.shape)
    return Tensor2D(pts)
