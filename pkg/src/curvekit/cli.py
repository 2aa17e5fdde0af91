"""Thin HTTP client CLI.

Every subcommand reads its local inputs, posts one request to the service
and writes the response back to disk. Without ``--server`` the service app
is mounted in-process (no daemon needed); with it, requests go to a running
``curvekit serve`` instance.
"""

from __future__ import annotations

import argparse
import asyncio
import base64
import json
import sys
from pathlib import Path

import httpx


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvekit", description=__doc__)
    parser.add_argument("--server", default=None, help="base URL of a running service; default runs in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    p = sub.add_parser("gen", help="sample a synthetic manifold")
    p.add_argument("--shape", required=True, choices=["sphere", "ellipsoid", "patch"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--d", type=int, default=2, help="patch intrinsic dimension")
    p.add_argument("--ambient", type=int, default=3, help="patch ambient dimension")
    p.add_argument("--extent", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--hessians", default=None, help="JSON file with (D-d, d, d) Hessians")

    p = sub.add_parser("neighborhoods", help="build a neighborhood batch")
    p.add_argument("--method", required=True, choices=["svd", "knn", "affine"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tail", type=int, default=10)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--n", type=int, default=64, help="affine sample count")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("id", help="intrinsic / linear dimension")
    p.add_argument("--in", dest="infile", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--twonn", action="store_true")
    group.add_argument("--pcid", action="store_true")
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--discard", type=float, default=0.1)
    p.add_argument("--json", dest="json_out", default=None)

    p = sub.add_parser("curvature", help="principal curvatures of a batch or bundle")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="infile")
    src.add_argument("--bundle")
    p.add_argument("--d", default="auto")
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--with-hessians", action="store_true")
    p.add_argument("--json", dest="json_out", default=None)

    p = sub.add_parser("metrics", help="aggregate a curvature JSON")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--metric", required=True, choices=["mapc", "mamc", "marc", "masc"])
    p.add_argument("--planes", default="coord", help='"coord" or "random:<n>"')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", dest="json_out", default=None)

    p = sub.add_parser("profile", help="layer-wise curvature/dimension profile")
    p.add_argument("--bundle", required=True)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--bins", type=int, default=61)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", dest="json_out", default=None)
    p.add_argument("--csv", dest="csv_out", default=None)

    p = sub.add_parser("gap", help="normalized curvature gap of a profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--json", dest="json_out", default=None)

    return parser


def _b64_file(path: str) -> str:
    return base64.b64encode(Path(path).read_bytes()).decode("ascii")


async def _post(args, route: str, payload: dict) -> dict:
    if args.server:
        client = httpx.AsyncClient(base_url=args.server, timeout=600.0)
    else:
        from .service.app import app

        client = httpx.AsyncClient(
            transport=httpx.ASGITransport(app=app),
            base_url="http://curvekit.internal",
            timeout=None,
        )
    async with client:
        response = await client.post(route, json=payload)
    body = response.json()
    if response.status_code != 200:
        raise SystemExit(f"error {body.get('error', response.status_code)}: {body.get('detail', body)}")
    return body


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2)
    if getattr(args, "json_out", None):
        Path(args.json_out).write_text(text + "\n")
    else:
        print(text)


def _dispatch(args) -> int:
    if args.command == "gen":
        hessians = None
        if args.hessians:
            hessians = json.loads(Path(args.hessians).read_text())
        body = asyncio.run(_post(args, "/v1/gen", {
            "shape": args.shape, "n": args.n, "seed": args.seed,
            "radius": args.radius, "a": args.a, "b": args.b, "c": args.c,
            "intrinsic_dim": args.d, "ambient_dim": args.ambient,
            "extent": args.extent, "noise_sigma": args.noise, "hessians": hessians,
        }))
        Path(args.out).write_bytes(base64.b64decode(body["ltnt_b64"]))
        print(f"wrote {body['rows']}x{body['cols']} tensor to {args.out}")

    elif args.command == "neighborhoods":
        body = asyncio.run(_post(args, "/v1/neighborhoods", {
            "method": args.method, "ltnt_b64": _b64_file(args.infile),
            "tail_size": args.tail, "k": args.k, "index": args.index,
            "count": args.n, "seed": args.seed,
        }))
        Path(args.out).write_bytes(base64.b64decode(body["batch_b64"]))
        print(
            f"wrote {body['k']} {body['method']} neighbors (D={body['ambient_dim']}, "
            f"mean distance {body['mean_distance_to_center']:.6g}) to {args.out}"
        )

    elif args.command == "id":
        method = "twonn" if args.twonn else "pcid" if args.pcid else "both"
        body = asyncio.run(_post(args, "/v1/id", {
            "ltnt_b64": _b64_file(args.infile), "method": method,
            "variance_threshold": args.threshold, "discard_fraction": args.discard,
        }))
        _emit(args, body)

    elif args.command == "curvature":
        d = args.d if args.d == "auto" else int(args.d)
        if args.infile:
            body = asyncio.run(_post(args, "/v1/curvature", {
                "batch_b64": _b64_file(args.infile), "d": d,
                "include_hessians": args.with_hessians,
            }))
        else:
            body = asyncio.run(_post(args, "/v1/curvature/bundle", {
                "bundle_b64": _b64_file(args.bundle), "d": d, "k": args.k,
                "points": args.points, "seed": args.seed,
                "include_hessians": args.with_hessians,
            }))
        _emit(args, body)

    elif args.command == "metrics":
        body = asyncio.run(_post(args, "/v1/metrics", {
            "curvature": json.loads(Path(args.infile).read_text()),
            "metric": args.metric, "planes": args.planes, "seed": args.seed,
        }))
        _emit(args, body)

    elif args.command == "profile":
        body = asyncio.run(_post(args, "/v1/profile", {
            "bundle_b64": _b64_file(args.bundle), "points": args.points,
            "k": args.k, "d": args.d, "bins": args.bins, "seed": args.seed,
        }))
        csv_text = body.pop("csv")
        if args.csv_out:
            Path(args.csv_out).write_text(csv_text)
        _emit(args, body)

    elif args.command == "gap":
        body = asyncio.run(_post(args, "/v1/gap", {
            "profile": json.loads(Path(args.profile).read_text()),
        }))
        _emit(args, body)

    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    return _dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
