import hashlib
import struct

import numpy as np
import pytest

from curvekit.errors import (
    DuplicateLayerIndex,
    MagicMismatch,
    MisalignedBundle,
    NonFiniteValue,
    OrdinalOutOfRange,
    ShapeMismatch,
)
from curvekit.tensor_io import (
    BlockMeta,
    ImageMeta,
    ImageTensor,
    LayerBundle,
    Tensor2D,
    dumps_tensor,
    load_bundle,
    load_image,
    load_tensor,
    loads_tensor,
    save_bundle,
    save_image,
    save_tensor,
)

GOLDEN_SHA256 = "6b0a1e272a254824b90b06bd78369d6026f8f14e69d44b37d278b891ad4c1003"


def test_roundtrip_2x3(tmp_path):
    t = Tensor2D(np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]))
    path = tmp_path / "t.ltnt"
    save_tensor(t, path)
    back = load_tensor(path)
    assert back.rows == 2 and back.cols == 3
    assert np.array_equal(back.data, t.data)


def test_roundtrip_bit_exact_random(tmp_path):
    rng = np.random.default_rng(20240817)
    t = Tensor2D(rng.normal(size=(1024, 512)))
    p1, p2 = tmp_path / "a.ltnt", tmp_path / "b.ltnt"
    save_tensor(t, p1)
    save_tensor(load_tensor(p1), p2)
    assert hashlib.sha256(p1.read_bytes()).digest() == hashlib.sha256(p2.read_bytes()).digest()


def test_roundtrip_zero_rows(tmp_path):
    t = Tensor2D(np.empty((0, 3)))
    path = tmp_path / "empty.ltnt"
    save_tensor(t, path)
    back = load_tensor(path)
    assert back.rows == 0 and back.cols == 3


def test_golden_fixture(fixtures_dir):
    raw = (fixtures_dir / "golden_3x2.ltnt").read_bytes()
    assert hashlib.sha256(raw).hexdigest() == GOLDEN_SHA256
    t = loads_tensor(raw)
    assert np.array_equal(t.data, np.array([[1.5, -2.25], [0.0, 1e-3], [42.0, 7.0]]))


def test_float32_widened(tmp_path):
    values = np.array([[0.1, 0.2], [0.3, 0.4]])
    path = tmp_path / "t32.ltnt"
    save_tensor(Tensor2D(values), path, dtype="float32")
    back = load_tensor(path)
    assert back.data.dtype == np.float64
    assert np.array_equal(back.data, values.astype(np.float32).astype(np.float64))


def test_declared_shape_vs_payload_mismatch(tmp_path):
    # header says 4x4 but only 15 values follow
    payload = np.arange(15, dtype="<f8").tobytes()
    raw = b"LTNT" + struct.pack("<BBIIH", 1, 0, 4, 4, 0) + payload
    path = tmp_path / "bad.ltnt"
    path.write_bytes(raw)
    with pytest.raises(ShapeMismatch):
        load_tensor(path)


def test_trailing_bytes_rejected(tmp_path):
    t = Tensor2D(np.ones((2, 2)))
    path = tmp_path / "trail.ltnt"
    path.write_bytes(dumps_tensor(t) + b"\x00")
    with pytest.raises(ShapeMismatch, match="trailing"):
        load_tensor(path)


def test_magic_mismatch(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"\x89PNG garbage that is not CSV either \xff")
    with pytest.raises(MagicMismatch):
        load_tensor(path)


def test_nonfinite_rejected_names_row(tmp_path):
    raw = b"LTNT" + struct.pack("<BBIIH", 1, 0, 2, 2, 0)
    raw += np.array([1.0, 2.0, np.nan, 4.0], dtype="<f8").tobytes()
    path = tmp_path / "nan.ltnt"
    path.write_bytes(raw)
    with pytest.raises(NonFiniteValue, match="row 1"):
        load_tensor(path)


def test_csv_load(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("0.5,0.5\n1.0,0.0\n")
    t = load_tensor(path)
    assert t.rows == 2 and t.cols == 2
    assert np.array_equal(t.data, np.array([[0.5, 0.5], [1.0, 0.0]]))


def test_csv_ragged_rejected(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("1,2,3\n4,5\n")
    with pytest.raises(ShapeMismatch, match="row 1"):
        load_tensor(path)


def test_csv_nonfinite_rejected(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text("1,2\nnan,4\n")
    with pytest.raises(NonFiniteValue):
        load_tensor(path)


def test_image_roundtrip(tmp_path):
    img = ImageTensor(np.arange(24, dtype=float).reshape(2, 3, 4))
    path = tmp_path / "img.ltnt"
    save_image(img, path)
    back = load_image(path)
    assert back.channels == 2 and back.height == 3 and back.width == 4
    assert np.array_equal(back.data, img.data)
    # generic loader sees the (c, m*n) container with the sidecar
    t = load_tensor(path)
    assert t.rows == 2 and t.cols == 12
    assert t.meta == ImageMeta(3, 4, 2)


def test_block_meta_roundtrip(tmp_path):
    t = Tensor2D(np.ones((6, 2)), meta=BlockMeta(block_size=3, method="svd"))
    path = tmp_path / "blk.ltnt"
    save_tensor(t, path)
    assert load_tensor(path).meta == BlockMeta(3, "svd")


def test_bundle_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    layers = [
        LayerBundle(f"layer{i}", i, 5, Tensor2D(rng.normal(size=(8, 3 + i))))
        for i in range(5)
    ]
    path = tmp_path / "five.lbnd"
    save_bundle(layers, path)
    back = load_bundle(path)
    assert [b.layer_name for b in back] == [f"layer{i}" for i in range(5)]
    assert all(b.total_layers == 5 for b in back)
    for orig, loaded in zip(layers, back):
        assert np.array_equal(orig.tensor.data, loaded.tensor.data)


def test_bundle_sorted_by_index(tmp_path):
    t = Tensor2D(np.zeros((2, 2)))
    path = tmp_path / "b.lbnd"
    save_bundle([LayerBundle("fc", 1, 2, t), LayerBundle("conv1", 0, 2, t)], path)
    names = [b.layer_name for b in load_bundle(path)]
    assert names == ["conv1", "fc"]


def test_bundle_duplicate_index_rejected(tmp_path):
    t = Tensor2D(np.zeros((2, 2)))
    path = tmp_path / "dup.lbnd"
    save_bundle([LayerBundle("a", 0, 2, t), LayerBundle("b", 1, 2, t)], path)
    raw = bytearray(path.read_bytes())
    # rewrite second record's index to 0: locate the second name "b"
    pos = raw.index(b"\x01\x00b") + 3
    raw[pos : pos + 4] = struct.pack("<I", 0)
    path.write_bytes(bytes(raw))
    with pytest.raises(DuplicateLayerIndex):
        load_bundle(path)


def test_bundle_ordinal_out_of_range():
    with pytest.raises(OrdinalOutOfRange):
        LayerBundle("late", 2, 2, Tensor2D(np.zeros((1, 1))))


def test_bundle_misaligned_sample_counts(tmp_path):
    path = tmp_path / "mis.lbnd"
    save_bundle(
        [
            LayerBundle("a", 0, 2, Tensor2D(np.zeros((3, 2)))),
            LayerBundle("b", 1, 2, Tensor2D(np.zeros((4, 2)))),
        ],
        path,
    )
    with pytest.raises(MisalignedBundle):
        load_bundle(path)


def test_constructor_rejects_nonfinite():
    with pytest.raises(NonFiniteValue):
        Tensor2D(np.array([[1.0, np.inf]]))


def test_loaded_tensor_immutable(tmp_path):
    path = tmp_path / "ro.ltnt"
    save_tensor(Tensor2D(np.ones((2, 2))), path)
    t = load_tensor(path)
    with pytest.raises(ValueError):
        t.data[0, 0] = 5.0
