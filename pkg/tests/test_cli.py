import json

import numpy as np
import pytest

from curvekit.cli import main
from curvekit.manifolds import sample_sphere
from curvekit.tensor_io import (
    ImageTensor,
    LayerBundle,
    Tensor2D,
    load_tensor,
    save_bundle,
    save_image,
    save_tensor,
)


def run(*argv):
    return main([str(a) for a in argv])


def test_gen_id_roundtrip(tmp_path, capsys):
    out = tmp_path / "plane.ltnt"
    assert run("gen", "--shape", "sphere", "--n", "3000", "--seed", "1",
               "--radius", "2.0", "--out", out) == 0
    t = load_tensor(out)
    assert t.rows == 3000
    assert np.allclose(np.linalg.norm(t.data, axis=1), 2.0)

    report = tmp_path / "id.json"
    assert run("id", "--in", out, "--json", report) == 0
    body = json.loads(report.read_text())
    assert 1.7 < body["twonn"]["id"] < 2.3
    assert body["pcid"]["pc_id"] == 3  # sphere spans all of R^3 linearly


def test_gen_patch_with_hessian_file(tmp_path):
    hfile = tmp_path / "h.json"
    hfile.write_text(json.dumps([[[4.0, 0.0], [0.0, -2.0]]]))
    out = tmp_path / "patch.ltnt"
    assert run("gen", "--shape", "patch", "--n", "100", "--seed", "0",
               "--hessians", hfile, "--extent", "0.5", "--out", out) == 0
    t = load_tensor(out)
    x = t.data[:, :2]
    assert np.allclose(t.data[:, 2], 0.5 * (4 * x[:, 0] ** 2 - 2 * x[:, 1] ** 2))


def test_neighborhood_curvature_metrics_chain(tmp_path, capsys):
    cloud = tmp_path / "sphere.ltnt"
    run("gen", "--shape", "sphere", "--n", "5000", "--seed", "2", "--out", cloud)

    batch = tmp_path / "batch.ltnt"
    assert run("neighborhoods", "--method", "knn", "--in", cloud, "--out", batch,
               "--k", "150", "--index", "7") == 0
    bt = load_tensor(batch)
    assert bt.rows == 151 and bt.meta.block_size == 151

    report = tmp_path / "curv.json"
    assert run("curvature", "--in", batch, "--d", "2", "--with-hessians",
               "--json", report) == 0
    body = json.loads(report.read_text())
    assert body["gaussian_curvature"] == pytest.approx(1.0, rel=0.15)

    metric_out = tmp_path / "mapc.json"
    assert run("metrics", "--in", report, "--metric", "mapc", "--json", metric_out) == 0
    assert json.loads(metric_out.read_text())["value"] == pytest.approx(1.0, rel=0.15)

    assert run("metrics", "--in", report, "--metric", "masc",
               "--planes", "random:8", "--json", metric_out) == 0
    assert json.loads(metric_out.read_text())["value"] == pytest.approx(1.0, rel=0.2)


def test_svd_neighborhood_cli(tmp_path):
    g = np.random.default_rng(3)
    img_path = tmp_path / "img.ltnt"
    save_image(ImageTensor(g.uniform(size=(1, 8, 8))), img_path)
    batch = tmp_path / "svdbatch.ltnt"
    assert run("neighborhoods", "--method", "svd", "--in", img_path,
               "--out", batch, "--tail", "4") == 0
    assert load_tensor(batch).rows == 17  # base + 2^4 reconstructions


def test_profile_gap_chain(tmp_path):
    g = np.random.Generator(np.random.Philox(5))
    plane = np.hstack([g.uniform(-1, 1, size=(1500, 2)), np.zeros((1500, 1))])
    sphere = sample_sphere(1.0, 1500, 6).data
    bundle = tmp_path / "layers.lbnd"
    save_bundle(
        [
            LayerBundle("flat", 0, 2, Tensor2D(plane)),
            LayerBundle("curved", 1, 2, Tensor2D(sphere)),
        ],
        bundle,
    )
    profile_json = tmp_path / "profile.json"
    profile_csv = tmp_path / "profile.csv"
    assert run("profile", "--bundle", bundle, "--points", "20", "--k", "80",
               "--d", "2", "--seed", "1", "--json", profile_json, "--csv", profile_csv) == 0
    prof = json.loads(profile_json.read_text())
    assert prof["layers"][0]["mapc"] < 0.05 < prof["layers"][1]["mapc"]
    lines = profile_csv.read_text().strip().splitlines()
    assert lines[0] == "relative_depth,mapc,mapc_std,id,pc_id,rd,mge"
    assert len(lines) == 3

    gap_json = tmp_path / "gap.json"
    assert run("gap", "--profile", profile_json, "--json", gap_json) == 0
    assert json.loads(gap_json.read_text())["nmapc_gap"] > 1.0


def test_curvature_bundle_cli(tmp_path):
    clouds = [sample_sphere(r, 2500, 10).data for r in (1.0, 2.0)]
    bundle = tmp_path / "spheres.lbnd"
    save_bundle(
        [LayerBundle(f"r{i}", i, 2, Tensor2D(c)) for i, c in enumerate(clouds)],
        bundle,
    )
    report = tmp_path / "bundle_curv.json"
    assert run("curvature", "--bundle", bundle, "--d", "2", "--k", "100",
               "--points", "6", "--seed", "0", "--json", report) == 0
    body = json.loads(report.read_text())
    assert len(body["layers"]) == 2
    meds = [
        np.median([p["gaussian_curvature"] for p in layer["points"]])
        for layer in body["layers"]
    ]
    assert meds[0] == pytest.approx(1.0, rel=0.2)
    assert meds[1] == pytest.approx(0.25, rel=0.2)


def test_cli_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.ltnt"
    bad.write_bytes(b"garbage \xff not csv")
    with pytest.raises(SystemExit, match="MagicMismatch"):
        run("id", "--in", bad)


def test_csv_input_accepted(tmp_path):
    csv_path = tmp_path / "tiny.csv"
    rows = np.random.default_rng(0).normal(size=(50, 3))
    np.savetxt(csv_path, rows, delimiter=",")
    report = tmp_path / "out.json"
    assert run("id", "--in", csv_path, "--pcid", "--json", report) == 0
    assert json.loads(report.read_text())["pcid"]["pc_id"] >= 1
