"""Binary and CSV point-cloud I/O.

Tensor files ("LTNT") are little-endian throughout:

    bytes 0..3   magic b"LTNT"
    byte  4      format version (1)
    byte  5      dtype tag: 0 = float64, 1 = float32
    bytes 6..9   u32 N (rows)
    bytes 10..13 u32 D (cols)
    bytes 14..15 u16 extension length E
    bytes 16..16+E  extension payload (optional sidecar, see below)
    then N*D little-endian floats, row-major

float32 payloads are widened to float64 in memory; all analysis runs in
float64. The extension payload is a single tagged record:

    b"IMGD" + u32 height + u32 width + u32 channels
        the tensor is an image stored as (channels, height*width)
    b"BLK0" + u32 block_size + u8 method
        rows are grouped as (base, neighbors...) blocks of block_size rows;
        method: 0 unspecified, 1 svd, 2 knn, 3 affine

Bundle files ("LBND") concatenate per-layer LTNT records:

    b"LBND", u32 layer_count, then per layer:
    u16 name length, UTF-8 name, u32 layer_index, u32 total_layers,
    embedded LTNT record

Loaders reject trailing bytes, shape/length mismatches and non-finite
values; loaded containers are immutable and safe to share across threads.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Sequence

import numpy as np

from .errors import (
    DuplicateLayerIndex,
    IoFailure,
    MagicMismatch,
    MisalignedBundle,
    NonFiniteValue,
    OrdinalOutOfRange,
    ShapeMismatch,
)

TENSOR_MAGIC = b"LTNT"
BUNDLE_MAGIC = b"LBND"
_VERSION = 1
_DTYPES = {0: np.dtype("<f8"), 1: np.dtype("<f4")}
_DTYPE_TAGS = {np.dtype("float64"): 0, np.dtype("float32"): 1}

NEIGHBOR_METHODS = {0: None, 1: "svd", 2: "knn", 3: "affine"}
_METHOD_TAGS = {v: k for k, v in NEIGHBOR_METHODS.items()}


@dataclass(frozen=True)
class ImageMeta:
    """Sidecar dimensions for an image stored as a (c, m*n) tensor."""

    height: int
    width: int
    channels: int


@dataclass(frozen=True)
class BlockMeta:
    """Rows grouped as (base, neighbors...) blocks of ``block_size`` rows."""

    block_size: int
    method: str | None = None


@dataclass(frozen=True)
class Tensor2D:
    """N x D float64 matrix, the universal point-cloud container."""

    data: np.ndarray
    meta: ImageMeta | BlockMeta | None = None

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 2:
            raise ShapeMismatch(f"Tensor2D needs 2 dimensions, got {arr.ndim}")
        if not np.all(np.isfinite(arr)):
            bad = int(np.argmin(np.isfinite(arr).ravel()))
            raise NonFiniteValue(f"non-finite value at row {bad // arr.shape[1]}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ImageTensor:
    """Image with ``channels`` planes of shape (height, width), float64."""

    data: np.ndarray  # (c, m, n), channel-major

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ShapeMismatch(f"ImageTensor needs (c, m, n) with all >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValue("non-finite value in image data")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def flatten(self) -> np.ndarray:
        """Channel-major flat vector of length c*m*n."""
        return self.data.reshape(-1).copy()

    def to_tensor(self) -> Tensor2D:
        c, m, n = self.data.shape
        return Tensor2D(self.data.reshape(c, m * n), meta=ImageMeta(m, n, c))

    @staticmethod
    def from_tensor(t: Tensor2D) -> "ImageTensor":
        if not isinstance(t.meta, ImageMeta):
            raise ShapeMismatch("tensor has no image sidecar (IMGD extension)")
        m, n, c = t.meta.height, t.meta.width, t.meta.channels
        if t.rows != c or t.cols != m * n:
            raise ShapeMismatch(
                f"image sidecar ({c}, {m}x{n}) disagrees with tensor shape {t.rows}x{t.cols}"
            )
        return ImageTensor(t.data.reshape(c, m, n))


@dataclass(frozen=True)
class LayerBundle:
    """One layer's latent codes plus its position in the network."""

    layer_name: str
    layer_index: int
    total_layers: int
    tensor: Tensor2D

    def __post_init__(self):
        if not 0 <= self.layer_index < self.total_layers:
            raise OrdinalOutOfRange(
                f"layer {self.layer_name!r}: index {self.layer_index} "
                f"not in [0, {self.total_layers})"
            )

    @property
    def block_size(self) -> int | None:
        meta = self.tensor.meta
        return meta.block_size if isinstance(meta, BlockMeta) else None


# --- extension block encoding ---

def _encode_ext(meta: ImageMeta | BlockMeta | None) -> bytes:
    if meta is None:
        return b""
    if isinstance(meta, ImageMeta):
        return b"IMGD" + struct.pack("<III", meta.height, meta.width, meta.channels)
    if isinstance(meta, BlockMeta):
        return b"BLK0" + struct.pack("<IB", meta.block_size, _METHOD_TAGS[meta.method])
    raise IoFailure(f"unknown extension meta {type(meta).__name__}")


def _decode_ext(ext: bytes, offset: int) -> ImageMeta | BlockMeta | None:
    if not ext:
        return None
    tag, body = ext[:4], ext[4:]
    if tag == b"IMGD" and len(body) == 12:
        m, n, c = struct.unpack("<III", body)
        return ImageMeta(m, n, c)
    if tag == b"BLK0" and len(body) == 5:
        block, method = struct.unpack("<IB", body)
        if method not in NEIGHBOR_METHODS:
            raise ShapeMismatch(f"unknown neighborhood method tag {method} at offset {offset}")
        return BlockMeta(block, NEIGHBOR_METHODS[method])
    raise ShapeMismatch(f"unknown extension block {tag!r} at offset {offset}")


# --- stream-level reader/writer ---

def _read_exact(f: BinaryIO, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise ShapeMismatch(
            f"truncated file: wanted {n} bytes for {what}, got {len(data)} "
            f"(offset {f.tell() - len(data)})"
        )
    return data


def _write_tensor(f: BinaryIO, t: Tensor2D, dtype: str) -> None:
    np_dtype = np.dtype(dtype)
    if np_dtype not in _DTYPE_TAGS:
        raise IoFailure(f"unsupported dtype {dtype!r} (use float64 or float32)")
    ext = _encode_ext(t.meta)
    f.write(TENSOR_MAGIC)
    f.write(struct.pack("<BBIIH", _VERSION, _DTYPE_TAGS[np_dtype], t.rows, t.cols, len(ext)))
    f.write(ext)
    f.write(np.ascontiguousarray(t.data, dtype=np_dtype.newbyteorder("<")).tobytes())


def _read_tensor(f: BinaryIO) -> Tensor2D:
    start = f.tell()
    magic = _read_exact(f, 4, "magic")
    if magic != TENSOR_MAGIC:
        raise MagicMismatch(f"expected {TENSOR_MAGIC!r} at offset {start}, found {magic!r}")
    version, dtype_tag, rows, cols, ext_len = struct.unpack(
        "<BBIIH", _read_exact(f, 12, "header")
    )
    if version != _VERSION:
        raise MagicMismatch(f"unsupported version {version} at offset {start + 4}")
    if dtype_tag not in _DTYPES:
        raise MagicMismatch(f"unknown dtype tag {dtype_tag} at offset {start + 5}")
    ext_offset = f.tell()
    meta = _decode_ext(_read_exact(f, ext_len, "extension block"), ext_offset)
    np_dtype = _DTYPES[dtype_tag]
    payload_offset = f.tell()
    payload = _read_exact(f, rows * cols * np_dtype.itemsize, "payload")
    values = np.frombuffer(payload, dtype=np_dtype).astype(np.float64)
    finite = np.isfinite(values)
    if not finite.all():
        bad = int(np.argmin(finite))
        raise NonFiniteValue(
            f"non-finite value at row {bad // cols if cols else 0} "
            f"(byte offset {payload_offset + bad * np_dtype.itemsize})"
        )
    return Tensor2D(values.reshape(rows, cols), meta=meta)


def _expect_eof(f: BinaryIO, path) -> None:
    extra = f.read(1)
    if extra:
        raise ShapeMismatch(f"{path}: {1 + len(f.read())} trailing byte(s) after payload")


# --- public API ---

def save_tensor(t: Tensor2D, path, *, dtype: str = "float64") -> None:
    """Write ``t`` as an LTNT file. float64 round-trips bit-exactly."""
    try:
        with open(path, "wb") as f:
            _write_tensor(f, t, dtype)
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def load_tensor(path) -> Tensor2D:
    """Load an LTNT binary or headerless comma-separated CSV file."""
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    if raw[:4] == TENSOR_MAGIC:
        f = io.BytesIO(raw)
        t = _read_tensor(f)
        _expect_eof(f, path)
        return t
    return _parse_csv(raw, path)


def dumps_tensor(t: Tensor2D, *, dtype: str = "float64") -> bytes:
    buf = io.BytesIO()
    _write_tensor(buf, t, dtype)
    return buf.getvalue()


def loads_tensor(data: bytes) -> Tensor2D:
    if data[:4] == TENSOR_MAGIC:
        f = io.BytesIO(data)
        t = _read_tensor(f)
        _expect_eof(f, "<bytes>")
        return t
    return _parse_csv(data, "<bytes>")


def _parse_csv(raw: bytes, path) -> Tensor2D:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise MagicMismatch(f"{path}: no LTNT magic and not UTF-8 CSV ({e})") from e
    rows: list[list[float]] = []
    width = None
    for lineno, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            values = [float(tok) for tok in line.split(",")]
        except ValueError as e:
            raise MagicMismatch(f"{path}: no LTNT magic and CSV parse failed at row {lineno}: {e}") from e
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ShapeMismatch(f"{path}: row {lineno} has {len(values)} fields, expected {width}")
        for col, v in enumerate(values):
            if not np.isfinite(v):
                raise NonFiniteValue(f"{path}: non-finite value at row {lineno}, column {col}")
        rows.append(values)
    if width is None:
        raise MagicMismatch(f"{path}: empty file")
    return Tensor2D(np.array(rows, dtype=np.float64).reshape(len(rows), width))


def save_image(img: ImageTensor, path, *, dtype: str = "float64") -> None:
    save_tensor(img.to_tensor(), path, dtype=dtype)


def load_image(path) -> ImageTensor:
    return ImageTensor.from_tensor(load_tensor(path))


def save_bundle(bundles: Sequence[LayerBundle], path, *, dtype: str = "float64") -> None:
    """Write per-layer records as one LBND file."""
    try:
        with open(path, "wb") as f:
            _write_bundle(f, bundles, dtype)
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def dumps_bundle(bundles: Sequence[LayerBundle], *, dtype: str = "float64") -> bytes:
    buf = io.BytesIO()
    _write_bundle(buf, bundles, dtype)
    return buf.getvalue()


def _write_bundle(f: BinaryIO, bundles: Sequence[LayerBundle], dtype: str) -> None:
    f.write(BUNDLE_MAGIC)
    f.write(struct.pack("<I", len(bundles)))
    for b in bundles:
        name = b.layer_name.encode("utf-8")
        f.write(struct.pack("<H", len(name)))
        f.write(name)
        f.write(struct.pack("<II", b.layer_index, b.total_layers))
        _write_tensor(f, b.tensor, dtype)


def load_bundle(path) -> list[LayerBundle]:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    return _loads_bundle(raw, path)


def loads_bundle(data: bytes) -> list[LayerBundle]:
    return _loads_bundle(data, "<bytes>")


def _loads_bundle(raw: bytes, path) -> list[LayerBundle]:
    f = io.BytesIO(raw)
    magic = _read_exact(f, 4, "bundle magic")
    if magic != BUNDLE_MAGIC:
        raise MagicMismatch(f"{path}: expected {BUNDLE_MAGIC!r}, found {magic!r}")
    (count,) = struct.unpack("<I", _read_exact(f, 4, "layer count"))
    layers: list[LayerBundle] = []
    for _ in range(count):
        (name_len,) = struct.unpack("<H", _read_exact(f, 2, "name length"))
        name = _read_exact(f, name_len, "layer name").decode("utf-8")
        index, total = struct.unpack("<II", _read_exact(f, 8, "layer ordinals"))
        tensor = _read_tensor(f)
        layers.append(LayerBundle(name, index, total, tensor))
    _expect_eof(f, path)

    seen: dict[int, str] = {}
    for b in layers:
        if b.layer_index in seen:
            raise DuplicateLayerIndex(
                f"{path}: layers {seen[b.layer_index]!r} and {b.layer_name!r} "
                f"share index {b.layer_index}"
            )
        seen[b.layer_index] = b.layer_name
    sizes = {b.tensor.rows for b in layers}
    if len(sizes) > 1:
        raise MisalignedBundle(f"{path}: layers disagree on sample count: {sorted(sizes)}")
    return sorted(layers, key=lambda b: b.layer_index)
