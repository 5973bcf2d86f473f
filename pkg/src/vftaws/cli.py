"""Command line: gen, build, verify, stats, bench."""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import generators, io
from .cluster import build_vftaws_rd, stretch_budget_rd
from .domain import DomainGeodesic, PolygonalDomain, build_vftaws_domain
from .geometry import SimplePolygon
from .metric import EuclideanOracle, InvalidArgument, InvalidGeometry
from .polygon_geodesic import PolygonGeodesic
from .polygon_vftaws import build_vftaws_polygon, polygon_bound
from .terrain import DEFAULT_STEINER, MeshGeodesic, TerrainMesh, build_vftaws_terrain
from .trace import BuildLog
from .verifier import (DEFAULT_BUDGET, BudgetExceeded, edge_audit, loglog_slope,
                       verify_stretch, worst_stretch_sampled)

EXIT_PASS, EXIT_FAIL, EXIT_BUDGET = 0, 1, 2


def bound_for(setting, epsilon, refined=True) -> float:
    if setting == "euclidean":
        return stretch_budget_rd(epsilon)
    if setting == "polygon":
        return polygon_bound(epsilon, refined)
    return 4 + 14 * epsilon


def generate(setting, n, seed, vertices=30, h=2, grid=8, weights="uniform", weight_scale=None) -> dict:
    doc = {"schema_version": io.SCHEMA_VERSION, "setting": setting, "seed": seed}
    if setting == "euclidean":
        pts = generators.euclidean_instance(n, seed, weight_mode=weights,
                                            weight_scale=10.0 if weight_scale is None else weight_scale)
    elif setting == "polygon":
        poly, pts = generators.polygon_instance(n, vertices, seed, weight_mode=weights,
                                                weight_scale=1.0 if weight_scale is None else weight_scale)
        doc["polygon"] = poly.vertices.tolist()
    elif setting == "domain":
        dom, pts = generators.domain_instance(n, h, seed, weight_mode=weights,
                                              weight_scale=1.0 if weight_scale is None else weight_scale)
        doc["domain"] = {"outer": dom.outer.vertices.tolist(), "holes": dom.hole_rings()}
    elif setting == "terrain":
        mesh, pts = generators.terrain_instance(n, grid, seed, weight_mode=weights,
                                                weight_scale=1.0 if weight_scale is None else weight_scale)
        doc["terrain"] = {"vertices": mesh.vertices.tolist(), "triangles": mesh.triangles.tolist()}
    else:
        raise InvalidArgument(f"unknown setting {setting!r}")
    doc["points"] = io.points_to_json(pts)
    return doc


def instance_geometry(doc):
    s = doc["setting"]
    if s == "polygon":
        return SimplePolygon(doc["polygon"])
    if s == "domain":
        return PolygonalDomain(doc["domain"]["outer"], doc["domain"]["holes"])
    if s == "terrain":
        if "terrain_off" in doc:
            return TerrainMesh.from_off(doc["terrain_off"])
        return TerrainMesh(doc["terrain"]["vertices"], doc["terrain"]["triangles"])
    return None


def make_oracle(setting, geom, points, steiner=DEFAULT_STEINER):
    if setting == "euclidean":
        return EuclideanOracle(points)
    if setting == "polygon":
        return PolygonGeodesic(geom, points)
    if setting == "domain":
        return DomainGeodesic(geom, points)
    return MeshGeodesic(geom, points, steiner)


def build(setting, geom, points, k, epsilon, refined=True, steiner=DEFAULT_STEINER, log=None, oracle=None):
    if setting == "euclidean":
        return build_vftaws_rd(points, k, epsilon, log)
    if setting == "polygon":
        return build_vftaws_polygon(geom, points, k, epsilon, refined, log, oracle)
    if setting == "domain":
        return build_vftaws_domain(geom, points, k, epsilon, log, oracle)
    return build_vftaws_terrain(geom, points, k, epsilon, steiner, log, oracle, refined)


def cmd_gen(a) -> int:
    doc = generate(a.setting, a.n, a.seed, a.vertices, a.h, a.grid, a.weights, a.weight_scale)
    _emit(a.out, io.dumps(doc))
    return EXIT_PASS


def cmd_build(a) -> int:
    doc = io.load_instance(a.instance)
    pts = io.points_from_json(doc["points"])
    geom = instance_geometry(doc)
    log = BuildLog()
    t0 = time.perf_counter()
    sp = build(doc["setting"], geom, pts, a.k, a.epsilon, a.refined, a.steiner, log)
    ms = (time.perf_counter() - t0) * 1000
    meta = {"setting": doc["setting"], "k": a.k, "epsilon": a.epsilon, "n": len(pts),
            "refined": a.refined, "steiner": a.steiner,
            "bound": bound_for(doc["setting"], a.epsilon, a.refined),
            "invariants": log.summary()}
    if a.timing:
        meta["build_ms"] = round(ms, 3)
    _emit(a.out, io.dumps(io.spanner_to_json(sp, meta)))
    if a.dot:
        Path(a.dot).write_text(io.to_dot(sp))
    if a.csv:
        Path(a.csv).write_text(io.spanner_csv(sp))
    return EXIT_PASS


def _load_pair(a):
    doc = io.load_instance(a.instance)
    pts = io.points_from_json(doc["points"])
    sp, meta = io.spanner_from_json(io.read_json(a.spanner))
    if meta["setting"] != doc["setting"] or meta["n"] != len(pts):
        raise InvalidArgument("spanner does not belong to this instance")
    geom = instance_geometry(doc)
    oracle = make_oracle(doc["setting"], geom, pts, int(meta.get("steiner", DEFAULT_STEINER)))
    return pts, sp, meta, oracle


def cmd_verify(a) -> int:
    pts, sp, meta, oracle = _load_pair(a)
    for pair in a.drop_edge or []:
        i, j = sorted(pair)
        if (i, j) not in sp.edges:
            raise InvalidArgument(f"edge ({i}, {j}) is not in the spanner")
        del sp.edges[(i, j)]
    bound = a.bound if a.bound is not None else float(meta["bound"])
    k = a.k if a.k is not None else int(meta["k"])
    try:
        if a.samples:
            rep = worst_stretch_sampled(pts, oracle, sp, k, a.samples, a.seed, bound, threads=a.threads)
        else:
            rep = verify_stretch(pts, oracle, sp, k, bound, a.budget, threads=a.threads)
    except BudgetExceeded as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_BUDGET
    out = dict(rep.to_dict(), schema_version=io.SCHEMA_VERSION)
    _emit(a.out, io.dumps(out))
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_stats(a) -> int:
    pts, sp, meta, _ = _load_pair(a)
    audit = edge_audit(sp, len(pts), int(meta["k"]), float(meta["epsilon"]), meta["setting"])
    _emit(a.out, io.dumps(dict(audit, schema_version=io.SCHEMA_VERSION)))
    return EXIT_PASS


BENCH_COLUMNS = ["setting", "n", "k", "epsilon", "h", "edges", "edges_per_knlogn", "build_ms",
                 "verify_mode", "worst_stretch"]


def bench_rows(setting, ns, ks, epsilons, seed, h=2, vertices=30, grid=8, timing=False,
               verify="none", samples=50):
    rows = []
    for n in ns:
        for k in ks:
            for eps in epsilons:
                doc = generate(setting, n, seed, vertices, h, grid)
                pts = io.points_from_json(doc["points"])
                geom = instance_geometry(doc)
                t0 = time.perf_counter()
                sp = build(setting, geom, pts, k, eps)
                ms = (time.perf_counter() - t0) * 1000
                row = {"setting": setting, "n": n, "k": k, "epsilon": eps,
                       "h": h if setting == "domain" else 0, "edges": len(sp),
                       "edges_per_knlogn": f"{len(sp) / (k * n * max(math.log2(n), 1)):.6f}",
                       "build_ms": f"{ms:.1f}" if timing else "", "verify_mode": verify,
                       "worst_stretch": ""}
                if verify != "none":
                    oracle = make_oracle(setting, geom, pts)
                    bound = bound_for(setting, eps)
                    rep = (verify_stretch(pts, oracle, sp, k, bound) if verify == "exhaustive"
                           else worst_stretch_sampled(pts, oracle, sp, k, samples, seed, bound))
                    row["worst_stretch"] = f"{rep.worst_stretch:.6f}"
                rows.append(row)
    return rows


def bench_fit(rows) -> dict:
    fit = {}
    by_n = {}
    for r in rows:
        by_n.setdefault((r["k"], r["epsilon"]), []).append((r["n"], r["edges"]))
    slopes = {}
    for (k, eps), pairs in sorted(by_n.items()):
        ns = sorted({n for n, _ in pairs})
        if len(ns) >= 2:
            slopes[f"k={k},epsilon={eps}"] = loglog_slope([n for n, _ in pairs], [e for _, e in pairs])
    fit["loglog_slope"] = slopes
    norm = [float(r["edges_per_knlogn"]) for r in rows]
    fit["edges_per_knlogn_spread"] = max(norm) / min(norm) if norm else None
    return fit


def cmd_bench(a) -> int:
    ns = [int(x) for x in a.ns.split(",")]
    ks = [int(x) for x in a.ks.split(",")]
    eps = [float(x) for x in a.epsilons.split(",")]
    rows = bench_rows(a.setting, ns, ks, eps, a.seed, a.h, a.vertices, a.grid, a.timing, a.verify, a.samples)
    _emit(a.out, io.to_csv(rows, BENCH_COLUMNS))
    fit = bench_fit(rows)
    if a.fit_out:
        Path(a.fit_out).write_text(io.dumps(fit))
    else:
        print(json.dumps(fit, sort_keys=True), file=sys.stderr)
    return EXIT_PASS


def _emit(path, text) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _common(p):
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=0.5)


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vftaws", description="Fault-tolerant additively weighted spanners")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a seeded instance")
    g.add_argument("--setting", choices=io.SETTINGS, required=True)
    g.add_argument("--n", type=int, default=20)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--vertices", type=int, default=30, help="polygon vertex count")
    g.add_argument("--h", type=int, default=2, help="number of holes")
    g.add_argument("--grid", type=int, default=8, help="terrain grid size")
    g.add_argument("--weights", choices=["uniform", "zero", "pareto"], default="uniform")
    g.add_argument("--weight-scale", type=float, default=None)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="build a spanner for an instance")
    b.add_argument("instance")
    _common(b)
    b.add_argument("--refined", action=argparse.BooleanOptionalAction, default=True)
    b.add_argument("--steiner", type=int, default=DEFAULT_STEINER)
    b.add_argument("--timing", action="store_true", help="record build time (output no longer reproducible)")
    b.add_argument("--dot")
    b.add_argument("--csv")
    b.add_argument("--out", default="-")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="check fault-tolerant stretch; exit 0 pass, 1 fail, 2 refused")
    v.add_argument("instance")
    v.add_argument("spanner")
    v.add_argument("--k", type=int, default=None, help="defaults to the spanner's k")
    v.add_argument("--bound", type=float, default=None)
    v.add_argument("--budget", type=float, default=DEFAULT_BUDGET)
    v.add_argument("--samples", type=int, default=0, help="random fault sets instead of all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--threads", type=int, default=1)
    v.add_argument("--drop-edge", type=int, nargs=2, action="append", metavar=("I", "J"),
                   help="delete an edge before verifying (fault injection)")
    v.add_argument("--out", default="-")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("stats", help="edge counts per provenance")
    s.add_argument("instance")
    s.add_argument("spanner")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_stats)

    be = sub.add_parser("bench", help="edge-count table over a grid of sizes")
    be.add_argument("--setting", choices=io.SETTINGS, default="euclidean")
    be.add_argument("--ns", default="100,200,400")
    be.add_argument("--ks", default="1")
    be.add_argument("--epsilons", default="0.5")
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--h", type=int, default=2)
    be.add_argument("--vertices", type=int, default=30)
    be.add_argument("--grid", type=int, default=8)
    be.add_argument("--verify", choices=["none", "exhaustive", "sampled"], default="none")
    be.add_argument("--samples", type=int, default=50)
    be.add_argument("--timing", action="store_true")
    be.add_argument("--fit-out")
    be.add_argument("--out", default="-")
    be.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    a = parser().parse_args(argv)
    # usage errors share exit code 2 with argparse's own
    if getattr(a, "k", None) is not None and a.k < 1:
        print("error: --k must be >= 1", file=sys.stderr)
        return EXIT_BUDGET
    eps = getattr(a, "epsilon", None)
    if eps is not None and not (0 < eps <= 1):
        print("error: --epsilon must be in (0, 1]", file=sys.stderr)
        return EXIT_BUDGET
    try:
        return a.func(a)
    except (InvalidArgument, InvalidGeometry) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
