"""Planar predicates, simple polygons and ear-clipping triangulation."""
from __future__ import annotations

from collections import deque

import numpy as np

from .metric import GEOM_EPS, InvalidArgument, InvalidGeometry


def cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def signed_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def segments_touch(a, b, c, d, tol=0.0) -> bool:
    """Closed segments ab and cd share at least one point."""
    d1, d2 = cross(c, d, a), cross(c, d, b)
    d3, d4 = cross(a, b, c), cross(a, b, d)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and \
            ((d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)):
        return True

    def on(p, q, r, o):
        return abs(o) <= tol and min(p[0], q[0]) - 1e-15 <= r[0] <= max(p[0], q[0]) + 1e-15 \
            and min(p[1], q[1]) - 1e-15 <= r[1] <= max(p[1], q[1]) + 1e-15
    return on(c, d, a, d1) or on(c, d, b, d2) or on(a, b, c, d3) or on(a, b, d, d4)


def point_segment_distance(pts, a, b) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    a, b = np.asarray(a, float), np.asarray(b, float)
    ab = b - a
    den = float(ab @ ab)
    t = np.zeros(len(pts)) if den == 0 else np.clip((pts - a) @ ab / den, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.sqrt(((pts - proj) ** 2).sum(axis=1))


def ring_edges(ring):
    r = np.asarray(ring, dtype=float)
    return r, np.roll(r, -1, axis=0)


def boundary_distance(pts, rings) -> np.ndarray:
    """Distance from each point to the union of the ring boundaries."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    best = np.full(len(pts), np.inf)
    for ring in rings:
        a, b = ring_edges(ring)
        ab = b - a
        den = (ab ** 2).sum(axis=1)
        den = np.where(den == 0, 1.0, den)
        rel = pts[:, None, :] - a[None, :, :]
        t = np.clip((rel * ab[None]).sum(axis=2) / den[None], 0, 1)
        proj = a[None] + t[:, :, None] * ab[None]
        dist = np.sqrt(((pts[:, None, :] - proj) ** 2).sum(axis=2)).min(axis=1)
        best = np.minimum(best, dist)
    return best


def inside_ring(pts, ring) -> np.ndarray:
    """Even-odd crossing test; boundary points get an arbitrary answer."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    a, b = ring_edges(ring)
    px, py = pts[:, 0:1], pts[:, 1:2]
    ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]
    straddle = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = ax + (py - ay) * (bx - ax) / (by - ay)
    hits = straddle & (px < xint)
    return (hits.sum(axis=1) % 2) == 1


class SimplePolygon:
    """CCW simple polygon. Repeated and collinear vertices are dropped."""

    def __init__(self, vertices, validate: bool = True):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if len(v) > 1 and np.allclose(v[0], v[-1]):
            v = v[:-1]
        v = self._clean(v)
        if len(v) < 3:
            raise InvalidGeometry("polygon needs at least 3 non-collinear vertices")
        if signed_area(v) < 0:
            v = v[::-1].copy()
        self.vertices = v
        lo, hi = v.min(axis=0), v.max(axis=0)
        self.diam = float(np.linalg.norm(hi - lo))
        self.bbox = (lo, hi)
        if validate:
            bad = self.self_intersection()
            if bad is not None:
                raise InvalidGeometry(f"polygon edges {bad[0]} and {bad[1]} intersect")
        self._tri = None

    @staticmethod
    def _clean(v):
        pts = [p for i, p in enumerate(v) if i == 0 or not np.array_equal(p, v[i - 1])]
        if len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
            pts.pop()
        scale = max(float(np.ptp(np.asarray(pts), axis=0).max()), 1e-300) if pts else 1.0
        arr = np.asarray(pts)
        if len(arr) >= 3:
            prv, nxt = np.roll(arr, 1, axis=0), np.roll(arr, -1, axis=0)
            cr = (arr[:, 0] - prv[:, 0]) * (nxt[:, 1] - prv[:, 1]) - (arr[:, 1] - prv[:, 1]) * (nxt[:, 0] - prv[:, 0])
            span = np.sqrt(((arr - prv) ** 2).sum(1)) + np.sqrt(((nxt - arr) ** 2).sum(1))
            if np.all(np.abs(cr) > GEOM_EPS * scale * span):
                return arr
        changed = True
        while changed and len(pts) >= 3:
            changed = False
            for i in range(len(pts)):
                a, b, c = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
                ab = np.linalg.norm(b - a)
                bc = np.linalg.norm(c - b)
                if abs(cross(a, b, c)) <= GEOM_EPS * scale * max(ab + bc, 1e-300) \
                        and np.dot(b - a, c - b) >= 0:
                    pts.pop(i)
                    changed = True
                    break
        return np.array(pts)

    def __len__(self):
        return len(self.vertices)

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    def edges(self):
        return ring_edges(self.vertices)

    def self_intersection(self):
        v = self.vertices
        n = len(v)
        a, b = v, np.roll(v, -1, axis=0)

        def orient(p, q, r):
            return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) \
                - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

        ai, bi, aj, bj = a[:, None], b[:, None], a[None], b[None]
        o1, o2 = orient(ai, bi, aj), orient(ai, bi, bj)
        o3, o4 = orient(aj, bj, ai), orient(aj, bj, bi)
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)

        def within(p, q, r):
            lo, hi = np.minimum(p, q), np.maximum(p, q)
            return np.all((r >= lo) & (r <= hi), axis=-1)
        hit |= (o1 == 0) & within(ai, bi, aj)
        hit |= (o2 == 0) & within(ai, bi, bj)
        hit |= (o3 == 0) & within(aj, bj, ai)
        hit |= (o4 == 0) & within(aj, bj, bi)
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        hit &= (j > i) & (j != (i + 1) % n) & (i != (j + 1) % n)
        if hit.any():
            i, j = np.argwhere(hit)[0]
            return (int(i), int(j))
        return None

    def is_convex(self) -> bool:
        v = self.vertices
        n = len(v)
        return all(cross(v[i - 1], v[i], v[(i + 1) % n]) >= 0 for i in range(n))

    def reflex_indices(self) -> list:
        v = self.vertices
        n = len(v)
        return [i for i in range(n) if cross(v[i - 1], v[i], v[(i + 1) % n]) < 0]

    def contains(self, pts, closed: bool = True, tol: float | None = None) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        tol = 1e-10 * self.diam if tol is None else tol
        near = boundary_distance(pts, [self.vertices]) <= tol
        inside = inside_ring(pts, self.vertices)
        return (inside | near) if closed else (inside & ~near)

    def require_inside(self, pts) -> None:
        ok = self.contains(pts)
        if not ok.all():
            raise InvalidArgument(f"point {np.asarray(pts)[~ok][0].tolist()} lies outside the polygon")

    def vertical_intervals(self, x: float):
        """Interior intervals of the line X=x as (y_lo, y_hi, lo_edge, hi_edge).

        The caller keeps x away from vertex abscissae.
        """
        a, b = self.edges()
        hit = (a[:, 0] - x) * (b[:, 0] - x) < 0
        idx = np.flatnonzero(hit)
        ys = a[idx, 1] + (x - a[idx, 0]) * (b[idx, 1] - a[idx, 1]) / (b[idx, 0] - a[idx, 0])
        order = np.argsort(ys, kind="stable")
        ys, idx = ys[order], idx[order]
        return [(float(ys[i]), float(ys[i + 1]), int(idx[i]), int(idx[i + 1]))
                for i in range(0, len(ys) - 1, 2)]

    def cut_vertical(self, x, y_lo, y_hi, lo_edge, hi_edge, validate=True):
        """Split along the chord; returns (left, right) sub-polygons."""
        v = self.vertices
        n = len(v)
        bot = np.array([x, y_lo])
        top = np.array([x, y_hi])
        # bottom point -> CCW -> top point, then down the chord: that piece
        # has the chord on its left while descending, i.e. lies east of it
        east = [bot]
        i = (lo_edge + 1) % n
        while True:
            east.append(v[i])
            if i == hi_edge:
                break
            i = (i + 1) % n
        east.append(top)
        west = [top]
        i = (hi_edge + 1) % n
        while True:
            west.append(v[i])
            if i == lo_edge:
                break
            i = (i + 1) % n
        west.append(bot)
        return SimplePolygon(west, validate), SimplePolygon(east, validate)

    def triangulation(self) -> "Triangulation":
        if self._tri is None:
            self._tri = Triangulation(self)
        return self._tri


class Triangulation:
    """Ear-clipping triangulation with its dual tree."""

    def __init__(self, poly: SimplePolygon):
        self.poly = poly
        self.pts = poly.vertices
        self.triangles = np.array(self._ear_clip(), dtype=int)
        self.adj = self._dual()

    def _ear_clip(self):
        pts = self.pts
        idx = list(range(len(pts)))
        tris = []
        tol = GEOM_EPS * self.poly.diam ** 2
        k = 0
        misses = 0
        while len(idx) > 3:
            m = len(idx)
            k %= m
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % m]
            a, b, c = pts[i0], pts[i1], pts[i2]
            ear = cross(a, b, c) > tol
            if ear:
                # only reflex vertices of the remaining chain can block an ear
                blockers = [idx[j] for j in range(m)
                            if idx[j] not in (i0, i1, i2)
                            and cross(pts[idx[j - 1]], pts[idx[j]], pts[idx[(j + 1) % m]]) <= tol]
                ear = not (blockers and _any_in_triangle(pts[blockers], a, b, c, tol))
            if ear:
                tris.append((i0, i1, i2))
                idx.pop(k)
                misses = 0
                continue
            k += 1
            misses += 1
            if misses > m:
                raise InvalidGeometry("ear clipping failed (degenerate polygon)")
        tris.append(tuple(idx))
        return tris

    def _dual(self):
        owner: dict = {}
        adj = [[] for _ in range(len(self.triangles))]
        for t, tri in enumerate(self.triangles):
            for e in range(3):
                a, b = int(tri[e]), int(tri[(e + 1) % 3])
                key = (min(a, b), max(a, b))
                if key in owner:
                    s = owner[key]
                    adj[t].append(s)
                    adj[s].append(t)
                else:
                    owner[key] = t
        return adj

    def areas(self) -> np.ndarray:
        p = self.pts[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))

    def locate(self, pt) -> int:
        p = self.pts[self.triangles]
        a, b, c = p[:, 0], p[:, 1], p[:, 2]
        x = np.asarray(pt, float)

        def orient(u, v):
            return (v[:, 0] - u[:, 0]) * (x[1] - u[:, 1]) - (v[:, 1] - u[:, 1]) * (x[0] - u[:, 0])
        # barycentric-style margin: smallest normalised edge orientation
        area = self.areas()
        m = np.minimum(np.minimum(orient(a, b), orient(b, c)), orient(c, a)) / area
        t = int(np.argmax(m))
        if m[t] < -1e-9:
            raise InvalidArgument(f"point {list(x)} lies outside the polygon")
        return t

    def tri_path(self, s: int, t: int) -> list:
        if s == t:
            return [s]
        prev = {s: None}
        q = deque([s])
        while q:
            u = q.popleft()
            if u == t:
                break
            for v in self.adj[u]:
                if v not in prev:
                    prev[v] = u
                    q.append(v)
        path = [t]
        while path[-1] != s:
            path.append(prev[path[-1]])
        return path[::-1]

    def portal(self, t: int, u: int):
        """Shared edge of adjacent triangles t -> u as (left, right) for that crossing."""
        tri = self.triangles[t]
        other = set(int(x) for x in self.triangles[u])
        for e in range(3):
            a, b = int(tri[e]), int(tri[(e + 1) % 3])
            if a in other and b in other:
                return b, a
        raise RuntimeError("triangles are not adjacent")

    def edge_triangle(self, a: int, b: int) -> int:
        for t, tri in enumerate(self.triangles):
            s = set(int(x) for x in tri)
            if a in s and b in s:
                return t
        raise RuntimeError(f"edge ({a}, {b}) is not in the triangulation")


def _any_in_triangle(q, a, b, c, tol) -> bool:
    d1 = (b[0] - a[0]) * (q[:, 1] - a[1]) - (b[1] - a[1]) * (q[:, 0] - a[0])
    d2 = (c[0] - b[0]) * (q[:, 1] - b[1]) - (c[1] - b[1]) * (q[:, 0] - b[0])
    d3 = (a[0] - c[0]) * (q[:, 1] - c[1]) - (a[1] - c[1]) * (q[:, 0] - c[0])
    inside = (d1 >= -tol) & (d2 >= -tol) & (d3 >= -tol)
    # vertices coincident with the ear's corners do not block it
    same = (np.all(q == a, axis=1) | np.all(q == b, axis=1) | np.all(q == c, axis=1))
    return bool(np.any(inside & ~same))
