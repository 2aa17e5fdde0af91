"""Dense local neighborhoods: SVD spectral truncation, kNN, affine jitter.

The SVD builder follows the low-rank route: each channel of the base image
is decomposed once, and every mask in the plan zeroes a subset of the tail
singular values before reconstruction. The empty mask reproduces the
original image, so the base point is a member of its own neighborhood.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy import ndimage

from .errors import EmptyMaskSet, InvalidSpec, KTooLarge, NonFiniteValue, ShapeMismatch
from .manifolds import rng_for
from .tensor_io import BlockMeta, ImageTensor, Tensor2D, load_tensor, save_tensor

DEFAULT_TAIL = 10

ROTATION_RANGE = (-10.0, 10.0)   # degrees
SHEAR_RANGE = (-10.0, 10.0)      # degrees, both axes
TRANSLATION_FRACTION = 0.1       # of width / height


@dataclass(frozen=True)
class NeighborhoodBatch:
    """Base point plus K generated neighbors in the same ambient space."""

    base: np.ndarray       # (D,)
    neighbors: np.ndarray  # (K, D)
    method: str            # "svd" | "knn" | "affine"

    def __post_init__(self):
        base = np.ascontiguousarray(np.asarray(self.base, dtype=np.float64).reshape(-1))
        nbrs = np.ascontiguousarray(np.asarray(self.neighbors, dtype=np.float64))
        if nbrs.ndim != 2 or nbrs.shape[0] < 1 or nbrs.shape[1] != base.shape[0]:
            raise ShapeMismatch(
                f"neighbors must be (K>=1, {base.shape[0]}), got {nbrs.shape}"
            )
        if not (np.all(np.isfinite(base)) and np.all(np.isfinite(nbrs))):
            raise NonFiniteValue("neighborhood contains non-finite values")
        base.setflags(write=False)
        nbrs.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "neighbors", nbrs)

    @property
    def k(self) -> int:
        return self.neighbors.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.base.shape[0]


@dataclass(frozen=True)
class SvdTruncationPlan:
    """Bitmasks over the ``tail_size`` smallest singular values per channel."""

    tail_size: int = DEFAULT_TAIL
    mask_set: np.ndarray | None = None  # (M, tail_size) bool; None = exhaustive

    def __post_init__(self):
        if self.tail_size < 1:
            raise InvalidSpec(f"tail_size must be >= 1, got {self.tail_size}")
        masks = self.mask_set
        if masks is None:
            masks = np.array(
                list(product((False, True), repeat=self.tail_size)), dtype=bool
            )
        else:
            masks = np.asarray(masks, dtype=bool)
            if masks.ndim != 2 or masks.shape[1] != self.tail_size:
                raise InvalidSpec(
                    f"mask_set must be (M, {self.tail_size}), got {masks.shape}"
                )
            if masks.shape[0] == 0:
                raise EmptyMaskSet("mask_set is empty")
            if len(np.unique(masks, axis=0)) != masks.shape[0]:
                raise InvalidSpec("mask_set contains duplicate masks")
        masks.setflags(write=False)
        object.__setattr__(self, "mask_set", masks)

    @property
    def n_masks(self) -> int:
        return self.mask_set.shape[0]


def svd_neighborhood(img: ImageTensor, plan: SvdTruncationPlan | None = None) -> NeighborhoodBatch:
    """Rebuild the image once per mask with the masked tail singular values zeroed.

    Mask column j addresses the (j+1)-th smallest singular value of each
    channel; columns that reach past a channel's spectrum are no-ops.
    Reconstructions that collide byte-for-byte (possible on low-rank
    channels) are de-duplicated, keeping first occurrence.
    """
    plan = plan or SvdTruncationPlan()
    c, m, n = img.channels, img.height, img.width
    q = min(m, n)

    svds = []
    for j in range(c):
        u, s, vt = np.linalg.svd(img.data[j], full_matrices=False)
        # clamp numerical noise to exact zeros so masks over absent singular
        # values are byte-exact no-ops (enables the dedup below)
        s[s <= max(m, n) * np.finfo(np.float64).eps * (s[0] if len(s) else 0.0)] = 0.0
        svds.append((u, s, vt))
    # mask column j -> spectrum index q-1-j (ascending tail)
    tail_idx = np.array([q - 1 - j for j in range(plan.tail_size) if q - 1 - j >= 0])
    tail_cols = np.arange(len(tail_idx))

    rows = np.empty((plan.n_masks, c * m * n))
    for r, mask in enumerate(plan.mask_set):
        planes = []
        for u, s, vt in svds:
            s_masked = s.copy()
            if len(tail_idx):
                s_masked[tail_idx[mask[tail_cols]]] = 0.0
            planes.append((u * s_masked) @ vt)
        rows[r] = np.stack(planes).reshape(-1)

    first_seen: dict[bytes, int] = {}
    for r in range(rows.shape[0]):
        first_seen.setdefault(rows[r].tobytes(), r)
    rows = rows[sorted(first_seen.values())]
    return NeighborhoodBatch(base=img.flatten(), neighbors=rows, method="svd")


def knn_neighborhood(data: Tensor2D | np.ndarray, index: int, k: int) -> NeighborhoodBatch:
    """Exact k nearest rows to row ``index`` (excluded), ties by lower row index."""
    arr = data.data if isinstance(data, Tensor2D) else np.asarray(data, dtype=np.float64)
    n = arr.shape[0]
    if not 0 <= index < n:
        raise ShapeMismatch(f"base index {index} out of range for {n} rows")
    if k >= n:
        raise KTooLarge(f"k={k} but only {n - 1} candidate neighbors exist")
    dist = np.linalg.norm(arr - arr[index], axis=1)
    order = np.argsort(dist, kind="stable")
    order = order[order != index]
    return NeighborhoodBatch(base=arr[index], neighbors=arr[order[:k]], method="knn")


def affine_image(
    img: ImageTensor,
    rotation_deg: float,
    shear_x_deg: float,
    shear_y_deg: float,
    translate_x: float,
    translate_y: float,
) -> ImageTensor:
    """Apply rotate-then-shear about the image center plus a translation.

    Bilinear resampling with zero padding outside the source frame.
    """
    theta = np.deg2rad(rotation_deg)
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    shear = np.array([[1.0, np.tan(np.deg2rad(shear_x_deg))],
                      [np.tan(np.deg2rad(shear_y_deg)), 1.0]])
    fwd = rot @ shear  # acts on (x, y)
    inv = np.linalg.inv(fwd)

    h, w = img.height, img.width
    ctr = np.array([(w - 1) / 2.0, (h - 1) / 2.0])
    t = np.array([translate_x, translate_y])
    # output (x,y) -> input (x,y): q = inv @ (p - ctr - t) + ctr
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    inv_rc = swap @ inv @ swap  # same map in (row, col) index order
    offset_rc = (ctr - inv @ (ctr + t))[::-1]

    planes = [
        ndimage.affine_transform(
            img.data[j], inv_rc, offset=offset_rc, order=1, mode="grid-constant", cval=0.0
        )
        for j in range(img.channels)
    ]
    return ImageTensor(np.stack(planes))


def affine_neighborhood(img: ImageTensor, n: int, seed: int) -> NeighborhoodBatch:
    """n random affine jitters of the image (rotation/shear/translation)."""
    if n < 1:
        raise InvalidSpec(f"need n >= 1, got {n}")
    g = rng_for(seed)
    rot = g.uniform(*ROTATION_RANGE, size=n)
    shx = g.uniform(*SHEAR_RANGE, size=n)
    shy = g.uniform(*SHEAR_RANGE, size=n)
    tx = g.uniform(-TRANSLATION_FRACTION * img.width, TRANSLATION_FRACTION * img.width, size=n)
    ty = g.uniform(-TRANSLATION_FRACTION * img.height, TRANSLATION_FRACTION * img.height, size=n)
    rows = np.stack([
        affine_image(img, rot[i], shx[i], shy[i], tx[i], ty[i]).flatten()
        for i in range(n)
    ])
    return NeighborhoodBatch(base=img.flatten(), neighbors=rows, method="affine")


def mean_distance_to_center(batch: NeighborhoodBatch) -> float:
    """Mean Euclidean distance of the neighbors to the base point."""
    return float(np.mean(np.linalg.norm(batch.neighbors - batch.base, axis=1)))


def batch_to_tensor(batch: NeighborhoodBatch) -> Tensor2D:
    """(base, neighbors...) rows with a BLK0 sidecar."""
    rows = np.vstack([batch.base[None, :], batch.neighbors])
    return Tensor2D(rows, meta=BlockMeta(block_size=batch.k + 1, method=batch.method))


def save_batch(batch: NeighborhoodBatch, path, *, dtype: str = "float64") -> None:
    """Serialize as an LTNT file: row 0 is the base, then the neighbors."""
    save_tensor(batch_to_tensor(batch), path, dtype=dtype)


def batch_from_tensor(t: Tensor2D) -> NeighborhoodBatch:
    """Interpret a (base, neighbors...) tensor as one neighborhood.

    Honors a BLK0 sidecar when present (and requires a single block);
    otherwise row 0 is taken as the base.
    """
    if t.rows < 2:
        raise ShapeMismatch(f"need at least 2 rows (base + neighbor), got {t.rows}")
    method = "knn"
    if isinstance(t.meta, BlockMeta):
        if t.meta.block_size != t.rows:
            raise ShapeMismatch(
                f"tensor holds {t.rows} rows but declares blocks of {t.meta.block_size}; "
                "load multi-block data through the profile pipeline"
            )
        method = t.meta.method or "knn"
    return NeighborhoodBatch(base=t.data[0], neighbors=t.data[1:], method=method)


def load_batch(path) -> NeighborhoodBatch:
    return batch_from_tensor(load_tensor(path))
