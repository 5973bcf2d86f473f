"""Seeded instance generators for the four settings."""
from __future__ import annotations

import numpy as np

from .geometry import SimplePolygon, boundary_distance, cross, segments_touch
from .metric import InvalidArgument, InvalidGeometry, make_points


def weights_for(rng, n, mode="uniform", scale=10.0):
    if mode == "uniform":
        return rng.uniform(0.0, scale, n)
    if mode == "zero":
        return np.zeros(n)
    if mode == "pareto":
        return scale * 0.1 * rng.pareto(2.0, n)
    raise InvalidArgument(f"unknown weight mode {mode!r}")


def euclidean_instance(n, seed, side=10.0, weight_mode="uniform", weight_scale=10.0, d=2):
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, side, (n, d))
    return make_points(xy, weights_for(rng, n, weight_mode, weight_scale))


def _rsp_chain(a, b, pool, rng):
    """Polyline a -> ... -> b through every point of ``pool`` (space partitioning)."""
    if not pool:
        return [a, b]
    c = pool[rng.integers(len(pool))]
    rest = [p for p in pool if p is not c]
    q = a + rng.uniform(0.2, 0.8) * (b - a)
    side_a = np.sign(cross(c, q, a))
    near_a = [p for p in rest if np.sign(cross(c, q, p)) == side_a]
    near_b = [p for p in rest if np.sign(cross(c, q, p)) != side_a]
    return _rsp_chain(a, c, near_a, rng)[:-1] + _rsp_chain(c, b, near_b, rng)


def random_simple_polygon(n_vertices, rng, side=10.0, tries=200) -> SimplePolygon:
    """Random simple polygon by recursive space partitioning."""
    for _ in range(tries):
        pts = list(rng.uniform(0.0, side, (n_vertices, 2)))
        i, j = rng.choice(n_vertices, 2, replace=False)
        a, b = pts[i], pts[j]
        rest = [p for k, p in enumerate(pts) if k not in (i, j)]
        left = [p for p in rest if cross(a, b, p) > 0]
        right = [p for p in rest if cross(a, b, p) <= 0]
        ring = _rsp_chain(a, b, right, rng)[:-1] + _rsp_chain(b, a, left, rng)[:-1]
        try:
            poly = SimplePolygon(ring)
        except InvalidGeometry:
            continue
        if len(poly) == n_vertices and _min_edge_gap(poly) > 1e-3 * poly.diam:
            return poly
    raise InvalidGeometry("could not generate a simple polygon")


def _min_edge_gap(poly) -> float:
    """Smallest distance between a vertex and a non-incident edge."""
    v = poly.vertices
    n = len(v)
    best = np.inf
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        others = [k for k in range(n) if k not in (i, (i + 1) % n)]
        ab = b - a
        t = np.clip(((v[others] - a) @ ab) / (ab @ ab), 0, 1)
        d = np.sqrt(((v[others] - (a + t[:, None] * ab)) ** 2).sum(axis=1)).min()
        best = min(best, d)
    return float(best)


def sample_inside(contains, bbox, n, rng, margin_fn=None, margin=0.0, tries=100000):
    lo, hi = bbox
    out = []
    for _ in range(tries):
        if len(out) == n:
            break
        p = rng.uniform(lo, hi)
        if not contains(p):
            continue
        if margin_fn is not None and margin_fn(p) < margin:
            continue
        out.append(p)
    if len(out) < n:
        raise InvalidGeometry("could not place points inside the region")
    return np.array(out).reshape(n, 2)


def polygon_instance(n, n_vertices, seed, side=10.0, weight_mode="uniform", weight_scale=1.0,
                     nonconvex=True):
    rng = np.random.default_rng(seed)
    for _ in range(100):
        poly = random_simple_polygon(n_vertices, rng, side)
        if not nonconvex or not poly.is_convex():
            break
    xy = sample_inside(lambda p: bool(poly.contains([p], closed=False)[0]), poly.bbox, n, rng,
                       lambda p: float(boundary_distance([p], [poly.vertices])[0]), 1e-3 * poly.diam)
    return poly, make_points(xy, weights_for(rng, n, weight_mode, weight_scale))


def random_star(center, radius, n_vertices, rng):
    # keep angular gaps below pi so the centre stays in the kernel
    ang = np.linspace(0, 2 * np.pi, n_vertices, endpoint=False) + rng.uniform(0, 2 * np.pi / n_vertices, n_vertices) * 0.8
    r = radius * rng.uniform(0.45, 1.0, n_vertices)
    return np.c_[center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)]


def domain_instance(n, h, seed, side=10.0, weight_mode="uniform", weight_scale=1.0, tries=500):
    from .domain import PolygonalDomain
    rng = np.random.default_rng(seed)
    outer = np.array([[0, 0], [side, 0], [side, side], [0, side]], dtype=float)
    holes = []
    discs = []
    for _ in range(tries):
        if len(holes) == h:
            break
        rad = rng.uniform(0.08, 0.16) * side
        c = rng.uniform(rad + 0.05 * side, side - rad - 0.05 * side, 2)
        if any(np.linalg.norm(c - c2) < rad + r2 + 0.04 * side for c2, r2 in discs):
            continue
        ring = random_star(c, rad, int(rng.integers(4, 8)), rng)
        holes.append(ring)
        discs.append((c, rad))
    if len(holes) < h:
        raise InvalidGeometry(f"could not place {h} disjoint holes after {tries} tries")
    dom = PolygonalDomain(outer, holes)
    xy = sample_inside(lambda p: bool(dom.contains_open([p])[0]), (outer.min(0), outer.max(0)), n, rng,
                       lambda p: dom.boundary_gap([p])[0], 1e-3 * side)
    return dom, make_points(xy, weights_for(rng, n, weight_mode, weight_scale))


def terrain_instance(n, grid, seed, side=10.0, relief=3.0, weight_mode="uniform", weight_scale=1.0):
    from .terrain import TerrainMesh
    rng = np.random.default_rng(seed)
    xs = np.linspace(0, side, grid)
    gx, gy = np.meshgrid(xs, xs, indexing="xy")
    # smooth random relief: a few random bumps plus small noise
    z = np.zeros_like(gx)
    for _ in range(4):
        c = rng.uniform(0, side, 2)
        s = rng.uniform(0.15, 0.35) * side
        z += rng.uniform(-1, 1) * relief * np.exp(-((gx - c[0]) ** 2 + (gy - c[1]) ** 2) / (2 * s * s))
    z += rng.normal(0, 0.05 * relief, z.shape)
    verts = np.c_[gx.ravel(), gy.ravel(), z.ravel()]
    tris = []
    for r in range(grid - 1):
        for c in range(grid - 1):
            a, b = r * grid + c, r * grid + c + 1
            d, e = (r + 1) * grid + c, (r + 1) * grid + c + 1
            if (r + c) % 2 == 0:
                tris += [(a, b, e), (a, e, d)]
            else:
                tris += [(a, b, d), (b, e, d)]
    mesh = TerrainMesh(verts, tris)
    chosen = rng.choice(len(verts), size=n, replace=False)
    return mesh, make_points(verts[np.sort(chosen)], weights_for(rng, n, weight_mode, weight_scale))


def polygons_disjoint(a, b) -> bool:
    a, b = np.asarray(a), np.asarray(b)
    for i in range(len(a)):
        for j in range(len(b)):
            if segments_touch(a[i], a[(i + 1) % len(a)], b[j], b[(j + 1) % len(b)]):
                return False
    return True
