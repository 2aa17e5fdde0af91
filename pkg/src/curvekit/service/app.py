"""FastAPI service wrapping the curvature toolkit.

Endpoints are stateless and CPU-bound; handlers are plain ``def`` so the
framework runs them on its worker threadpool. Domain errors map to 400
responses carrying the error class name.
"""

from __future__ import annotations

import base64

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..caml import (
    CurvatureResult,
    build_frame,
    feasible_intrinsic_dim,
    fit_taylor,
    principal_curvatures,
)
from ..dimension import pc_id, relative_difference, round_id_for_caml, twonn_id
from ..errors import CurvekitError, EmptyInput, InvalidSpec
from ..manifolds import (
    EllipsoidSpec,
    QuadraticPatchSpec,
    rng_for,
    sample_ellipsoid,
    sample_quadratic_patch,
    sample_sphere,
)
from ..metrics import (
    gaussian_curvature_2d,
    mamc,
    mapc,
    marc,
    masc,
    random_planes,
    riemann_tensor,
)
from ..neighborhoods import (
    SvdTruncationPlan,
    affine_neighborhood,
    batch_from_tensor,
    batch_to_tensor,
    knn_neighborhood,
    mean_distance_to_center,
    svd_neighborhood,
)
from ..profile import (
    LayerProfile,
    ProfileConfig,
    _layer_batches,
    build_profile,
    gap_from_mapcs,
    profile_to_csv,
    relative_depth,
)
from ..tensor_io import ImageTensor, dumps_tensor, loads_bundle, loads_tensor
from . import schemas as S


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(text: str) -> bytes:
    return base64.b64decode(text.encode("ascii"))


def _auto_d(rows, d_request, k: int) -> int:
    ambient = rows.shape[1]
    if d_request == "auto":
        d = round_id_for_caml(twonn_id(rows).id)
    else:
        d = int(d_request)
    return feasible_intrinsic_dim(d, ambient, k)


def _point_payload(result: CurvatureResult, hessians=None) -> S.PointCurvature:
    gauss = None
    if result.d == 2 and result.principal_curvatures.shape == (1, 2):
        gauss = gaussian_curvature_2d(result)
    return S.PointCurvature(
        d=result.d,
        rank_ok=result.rank_ok,
        ill_conditioned=result.ill_conditioned,
        principal_curvatures=result.principal_curvatures.tolist(),
        mapc=mapc(result),
        gaussian_curvature=gauss,
        hessians=None if hessians is None else np.asarray(hessians).tolist(),
    )


def _estimate_point(batch, d: int, include_hessians: bool) -> S.PointCurvature:
    fit = fit_taylor(build_frame(batch, d))
    result = principal_curvatures(fit)
    return _point_payload(result, fit.hessians if include_hessians else None)


def create_app() -> FastAPI:
    app = FastAPI(title="curvekit", version=__version__)

    @app.exception_handler(CurvekitError)
    def _domain_error(request: Request, exc: CurvekitError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content=S.ErrorBody(error=type(exc).__name__, detail=str(exc)).model_dump(),
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/gen", response_model=S.GenResponse)
    def gen(req: S.GenRequest) -> S.GenResponse:
        if req.shape == "sphere":
            tensor = sample_sphere(req.radius, req.n, req.seed)
        elif req.shape == "ellipsoid":
            tensor = sample_ellipsoid(EllipsoidSpec(req.a, req.b, req.c), req.n, req.seed)
        else:
            if req.hessians is not None:
                h = np.asarray(req.hessians, dtype=np.float64)
            else:
                codim = req.ambient_dim - req.intrinsic_dim
                if codim < 1:
                    raise InvalidSpec(
                        f"ambient_dim {req.ambient_dim} must exceed intrinsic_dim {req.intrinsic_dim}"
                    )
                g = rng_for(req.seed + 0x5EED)
                raw = g.normal(size=(codim, req.intrinsic_dim, req.intrinsic_dim))
                h = (raw + raw.transpose(0, 2, 1)) / 2
            spec = QuadraticPatchSpec(h, extent=req.extent, noise_sigma=req.noise_sigma)
            tensor = sample_quadratic_patch(spec, req.n, req.seed)
        return S.GenResponse(ltnt_b64=_b64(dumps_tensor(tensor)), rows=tensor.rows, cols=tensor.cols)

    @app.post("/v1/neighborhoods", response_model=S.NeighborhoodResponse)
    def neighborhoods(req: S.NeighborhoodRequest) -> S.NeighborhoodResponse:
        tensor = loads_tensor(_unb64(req.ltnt_b64))
        if req.method == "svd":
            batch = svd_neighborhood(ImageTensor.from_tensor(tensor), SvdTruncationPlan(req.tail_size))
        elif req.method == "knn":
            batch = knn_neighborhood(tensor, req.index, req.k)
        else:
            batch = affine_neighborhood(ImageTensor.from_tensor(tensor), req.count, req.seed)
        return S.NeighborhoodResponse(
            batch_b64=_b64(dumps_tensor(batch_to_tensor(batch))),
            k=batch.k,
            ambient_dim=batch.ambient_dim,
            method=batch.method,
            mean_distance_to_center=mean_distance_to_center(batch),
        )

    @app.post("/v1/id", response_model=S.IdResponse)
    def estimate_id(req: S.IdRequest) -> S.IdResponse:
        tensor = loads_tensor(_unb64(req.ltnt_b64))
        out = S.IdResponse()
        if req.method in ("twonn", "both"):
            est = twonn_id(tensor, req.discard_fraction)
            out.twonn = S.TwoNnOut(id=est.id, n_used=est.n_used, discard_fraction=est.discard_fraction)
        if req.method in ("pcid", "both"):
            spec = pc_id(tensor, req.variance_threshold)
            out.pcid = S.SpectrumOut(
                pc_id=spec.pc_id, mge=spec.mge, eigenvalues=spec.eigenvalues.tolist()
            )
        if out.twonn is not None and out.pcid is not None:
            out.rd = relative_difference(out.pcid.pc_id, out.twonn.id)
        return out

    @app.post("/v1/curvature", response_model=S.PointCurvature)
    def curvature(req: S.CurvatureRequest) -> S.PointCurvature:
        batch = batch_from_tensor(loads_tensor(_unb64(req.batch_b64)))
        rows = np.vstack([batch.base[None, :], batch.neighbors])
        d = _auto_d(rows, req.d, batch.k)
        return _estimate_point(batch, d, req.include_hessians)

    @app.post("/v1/curvature/bundle", response_model=S.BundleCurvatureResponse)
    def curvature_bundle(req: S.BundleCurvatureRequest) -> S.BundleCurvatureResponse:
        bundles = loads_bundle(_unb64(req.bundle_b64))
        config = ProfileConfig(points=req.points, k=req.k, seed=req.seed)
        layers = []
        for bundle in bundles:
            id_rows, batches = _layer_batches(bundle, config)
            if req.d == "auto":
                d = round_id_for_caml(twonn_id(id_rows).id)
            else:
                d = int(req.d)
            d = feasible_intrinsic_dim(d, bundle.tensor.cols, min(b.k for b in batches))
            points = [_estimate_point(b, d, req.include_hessians) for b in batches]
            layers.append(
                S.LayerCurvatures(
                    layer_name=bundle.layer_name,
                    layer_index=bundle.layer_index,
                    relative_depth=relative_depth(bundle.layer_index, bundle.total_layers),
                    d_used=d,
                    points=points,
                )
            )
        return S.BundleCurvatureResponse(layers=layers)

    @app.post("/v1/metrics", response_model=S.MetricsResponse)
    def compute_metric(req: S.MetricsRequest) -> S.MetricsResponse:
        payload = req.curvature
        if "layers" in payload:
            points = [p for layer in payload["layers"] for p in layer["points"]]
        elif "points" in payload:
            points = list(payload["points"])
        else:
            points = [payload]
        if not points:
            raise EmptyInput("curvature payload holds no points")

        if req.metric in ("mapc", "mamc"):
            results = [
                CurvatureResult(
                    principal_curvatures=np.asarray(p["principal_curvatures"], dtype=np.float64),
                    d=p["d"],
                    rank_ok=p.get("rank_ok", True),
                    ill_conditioned=p.get("ill_conditioned", False),
                )
                for p in points
            ]
            value = mapc(results) if req.metric == "mapc" else mamc(results)
        else:
            per_point = []
            for p in points:
                if not p.get("hessians"):
                    raise InvalidSpec(
                        "marc/masc need Hessians; re-run curvature with include_hessians"
                    )
                tensor = riemann_tensor(np.asarray(p["hessians"], dtype=np.float64))
                if req.metric == "marc":
                    per_point.append(marc(tensor))
                else:
                    planes = None
                    if req.planes.startswith("random:"):
                        planes = random_planes(tensor.d, int(req.planes.split(":", 1)[1]), req.seed)
                    per_point.append(masc(tensor, planes))
            value = float(np.mean(per_point))
        return S.MetricsResponse(metric=req.metric, value=value, n_points=len(points))

    @app.post("/v1/profile", response_model=S.ProfileResponse)
    def profile(req: S.ProfileRequest) -> S.ProfileResponse:
        bundles = loads_bundle(_unb64(req.bundle_b64))
        config = ProfileConfig(
            points=req.points,
            k=req.k,
            d=req.d,
            variance_threshold=req.variance_threshold,
            discard_fraction=req.discard_fraction,
            bins=req.bins,
            seed=req.seed,
        )
        result = build_profile(bundles, config)
        payload = result.to_dict()
        return S.ProfileResponse(
            meta=payload["meta"],
            layers=[S.ProfileLayerOut(**layer) for layer in payload["layers"]],
            csv=profile_to_csv(result),
        )

    @app.post("/v1/gap", response_model=S.GapResponse)
    def gap(req: S.GapRequest) -> S.GapResponse:
        if req.mapc_values is not None:
            report = gap_from_mapcs(req.mapc_values)
        elif req.profile is not None:
            report = gap_from_mapcs(LayerProfile.from_dict(req.profile).mapc_values())
        else:
            raise InvalidSpec("provide either a profile payload or mapc_values")
        return S.GapResponse(
            mapc_gap=report.mapc_gap, mean_mapc=report.mean_mapc, nmapc_gap=report.nmapc_gap
        )

    return app


app = create_app()
