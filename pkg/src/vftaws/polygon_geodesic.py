"""Shortest paths inside a simple polygon and the chord machinery built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import SimplePolygon, Triangulation
from .metric import GEOM_EPS, InvalidArgument, InvalidGeometry, MetricOracle
from .visibility import Region, VisibilityEngine


class Funnel:
    """Deque funnel over a sleeve of portals.

    ``chain`` runs from the current left portal end, through the apex, to the
    current right portal end. ``dist`` and ``pred`` give geodesic lengths and
    the shortest-path tree for every vertex that entered the funnel.
    """

    def __init__(self, pos, start, tol):
        self.pos = pos
        self.tol = tol
        self.chain = [start]
        self.apex = 0
        self.dist = {start: 0.0}
        self.pred = {start: None}

    def _cr(self, o, a, b):
        P = self.pos
        return (P[a][0] - P[o][0]) * (P[b][1] - P[o][1]) - (P[a][1] - P[o][1]) * (P[b][0] - P[o][0])

    def _attach(self, v, u):
        self.pred[v] = u
        self.dist[v] = self.dist[u] + math.dist(self.pos[u], self.pos[v])

    def add_left(self, v):
        c, tol = self.chain, self.tol
        while self.apex > 0 and self._cr(c[1], c[0], v) <= tol:
            c.pop(0)
            self.apex -= 1
        if self.apex == 0:
            # left chain exhausted: v may wrap around the right chain
            while len(c) > 1 and self._cr(c[0], c[1], v) < -tol:
                c.pop(0)
        self._attach(v, c[0])
        c.insert(0, v)
        self.apex += 1

    def add_right(self, v):
        c, tol = self.chain, self.tol
        while self.apex < len(c) - 1 and self._cr(c[-2], c[-1], v) >= -tol:
            c.pop()
        if self.apex == len(c) - 1:
            while self.apex > 0 and self._cr(c[-1], c[-2], v) > tol:
                c.pop()
                self.apex -= 1
        self._attach(v, c[-1])
        c.append(v)

    def run(self, portals):
        prev = None
        for left, right in portals:
            if prev is None:
                self.add_left(left)
                self.add_right(right)
            else:
                if left != prev[0]:
                    self.add_left(left)
                if right != prev[1]:
                    self.add_right(right)
            prev = (left, right)
        return self

    def path(self, v):
        out = []
        while v is not None:
            out.append(v)
            v = self.pred[v]
        return out[::-1]


def _sleeve(tri: Triangulation, s: int, t: int):
    path = tri.tri_path(s, t)
    return [tri.portal(a, b) for a, b in zip(path, path[1:])]


def _positions(poly, extra):
    return [tuple(v) for v in poly.vertices] + [tuple(map(float, e)) for e in extra]


def geodesic_distance(polygon: SimplePolygon, a, b):
    """Length and polyline of the shortest path from a to b inside the polygon."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if np.array_equal(a, b):
        polygon.require_inside([a])
        return 0.0, [tuple(a)]
    tri = polygon.triangulation()
    ta, tb = tri.locate(a), tri.locate(b)
    n = len(polygon.vertices)
    pos = _positions(polygon, [a, b])
    f = Funnel(pos, n, GEOM_EPS * polygon.diam ** 2).run(_sleeve(tri, ta, tb))
    f.add_left(n + 1)
    return f.dist[n + 1], [pos[v] for v in f.path(n + 1)]


def visibility_graph_distance(polygon: SimplePolygon, a, b) -> float:
    polygon.require_inside([a, b])
    eng = _engine(polygon)
    return eng.distance(a, b)


def _engine(polygon):
    eng = getattr(polygon, "_vis_engine", None)
    if eng is None:
        eng = VisibilityEngine(Region(polygon.vertices))
        polygon._vis_engine = eng
    return eng


class PolygonGeodesic(MetricOracle):
    def __init__(self, polygon: SimplePolygon, points):
        self.polygon = polygon
        self.points = list(points)
        self.n = len(self.points)
        self.coords = np.array([p.coords for p in self.points], dtype=float).reshape(self.n, 2)
        if self.n:
            polygon.require_inside(self.coords)

    def base_distance(self, a, b):
        self.check_id(a)
        self.check_id(b)
        if self._matrix is not None:
            return float(self._matrix[a, b])
        return geodesic_distance(self.polygon, self.coords[a], self.coords[b])[0]

    def path(self, a, b):
        return geodesic_distance(self.polygon, self.coords[a], self.coords[b])[1]


@dataclass
class ChordDistance:
    """Geodesic distance from one source to the points (x, y) of a vertical chord.

    Stored as owner pieces: funnel vertex position, its geodesic distance,
    and the y-interval of the chord it sees last.
    """

    x: float
    y_lo: float
    y_hi: float
    owners: list  # (vx, vy, base, lo, hi)

    def value(self, y: float) -> float:
        best = math.inf
        slack = 1e-12 * max(self.y_hi - self.y_lo, 1.0)
        for vx, vy, base, lo, hi in self.owners:
            if lo - slack <= y <= hi + slack:
                best = min(best, base + math.hypot(vx - self.x, vy - y))
        if best == math.inf:
            best = min(base + math.hypot(vx - self.x, vy - y) for vx, vy, base, _, _ in self.owners)
        return best

    def minimize(self, a: float | None = None, b: float | None = None):
        """Exact argmin over [a, b] (default whole chord): per owner piece the
        distance is a point-distance plus constant, minimised at the clamp of
        the perpendicular foot."""
        a = self.y_lo if a is None else a
        b = self.y_hi if b is None else b
        best = (math.inf, a)
        for vx, vy, base, lo, hi in self.owners:
            s, e = max(lo, a), min(hi, b)
            if s > e:
                continue
            y = min(max(vy, s), e)
            val = base + math.hypot(vx - self.x, vy - y)
            if val < best[0] or (val == best[0] and y < best[1]):
                best = (val, y)
        if best[0] == math.inf:
            y = min(max(a, self.y_lo), self.y_hi)
            return y, self.value(y)
        return best[1], best[0]


@dataclass
class SplittingSegment:
    x: float
    y_lo: float
    y_hi: float
    lo_edge: int
    hi_edge: int
    left: SimplePolygon | None = None
    right: SimplePolygon | None = None
    left_ids: list = field(default_factory=list)
    right_ids: list = field(default_factory=list)

    @property
    def length(self):
        return self.y_hi - self.y_lo


def chord_distance(side: SimplePolygon, chord: SplittingSegment, p) -> ChordDistance:
    """Distance function from p (inside ``side``) to the chord, an edge of ``side``."""
    p = np.asarray(p, dtype=float)
    x, lo, hi = chord.x, chord.y_lo, chord.y_hi
    if abs(p[0] - x) <= 1e-12 * max(side.diam, 1.0) and lo <= p[1] <= hi:
        return ChordDistance(x, lo, hi, [(x, float(p[1]), 0.0, lo, hi)])
    v = side.vertices
    n = len(v)
    top = _vertex_index(v, (x, hi))
    bot = _vertex_index(v, (x, lo))
    # chord as an edge u -> u+1 of the CCW side polygon; crossing it outwards
    # puts u+1 on the left
    if (top + 1) % n == bot:
        left, right = bot, top
    elif (bot + 1) % n == top:
        left, right = top, bot
    else:
        raise InvalidGeometry("chord is not an edge of the side polygon")
    tri = side.triangulation()
    t0 = tri.locate(p)
    t1 = tri.edge_triangle(left, right)
    portals = _sleeve(tri, t0, t1) + [(left, right)]
    pos = _positions(side, [p])
    f = Funnel(pos, n, GEOM_EPS * side.diam ** 2).run(portals)
    chain = f.chain
    ys = [pos[c][1] for c in chain]
    y0, y1 = ys[0], ys[-1]
    span = y1 - y0
    cuts = []
    for a, b in zip(chain, chain[1:]):
        (ax, ay), (bx, by) = pos[a], pos[b]
        if abs(bx - ax) <= 1e-15 * side.diam:
            t = 0.0 if (by - ay) * span < 0 else 1.0
            t = 0.0 if a == chain[0] else (1.0 if b == chain[-1] else t)
        else:
            yc = ay + (by - ay) * (x - ax) / (bx - ax)
            t = (yc - y0) / span
        cuts.append(min(max(t, 0.0), 1.0))
    cuts = np.maximum.accumulate(np.array([0.0] + cuts + [1.0]))
    owners = []
    for i, c in enumerate(chain):
        ya, yb = y0 + cuts[i] * span, y0 + cuts[i + 1] * span
        owners.append((pos[c][0], pos[c][1], f.dist[c], min(ya, yb), max(ya, yb)))
    return ChordDistance(x, lo, hi, owners)


def _vertex_index(v, xy):
    d = np.abs(v - np.asarray(xy)).max(axis=1)
    i = int(np.argmin(d))
    if d[i] > 1e-9 * max(np.abs(v).max(), 1.0):
        raise InvalidGeometry(f"chord endpoint {xy} is not a polygon vertex")
    return i


@dataclass
class ProjectedPoint:
    source_id: int
    x: float
    y: float
    weight: float
    added: float  # geodesic distance from the source


def side_of(chord: SplittingSegment, pid: int) -> SimplePolygon:
    return chord.left if pid in chord.left_ids else chord.right


def geodesic_project(polygon: SimplePolygon, p, chord: SplittingSegment, weight: float = 0.0,
                     source_id: int = -1) -> ProjectedPoint:
    if chord.length <= 0:
        p = np.asarray(p, float)
        return ProjectedPoint(source_id, chord.x, chord.y_lo, weight + float(np.hypot(*(p - (chord.x, chord.y_lo)))), 0.0)
    if chord.left is None:
        chord = attach_sides(polygon, chord)
    side = chord.left if chord.left.contains([p])[0] else chord.right
    f = chord_distance(side, chord, p)
    y, d = f.minimize()
    return ProjectedPoint(source_id, chord.x, y, weight + d, d)


def attach_sides(polygon, chord, validate=True):
    left, right = polygon.cut_vertical(chord.x, chord.y_lo, chord.y_hi, chord.lo_edge, chord.hi_edge,
                                       validate)
    chord.left, chord.right = left, right
    return chord


def partition_points(chord: SplittingSegment, coords, ids):
    """Points on the chord go left; the rest by containment in the right piece."""
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    tol = 1e-12 * max(chord.right.diam, 1.0)
    on = (np.abs(coords[:, 0] - chord.x) <= tol) & (coords[:, 1] >= chord.y_lo) & (coords[:, 1] <= chord.y_hi)
    right = chord.right.contains(coords, closed=False, tol=0.0) & ~on
    left_ids = [i for i, r in zip(ids, right) if not r]
    right_ids = [i for i, r in zip(ids, right) if r]
    return left_ids, right_ids


def find_splitting_segment(polygon: SimplePolygon, coords, ids=None, log=None, level: str = "0"):
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    ids = list(range(len(coords))) if ids is None else list(ids)
    m = len(ids)
    if m < 2:
        raise InvalidArgument("splitting needs at least two points")
    delta = 1e-7 * polygon.diam
    lo, hi = polygon.bbox
    xs = np.concatenate([coords[:, 0], polygon.vertices[:, 0]])
    cand = sorted(set(np.concatenate([xs - delta, xs + delta]).tolist()))
    vx = polygon.vertices[:, 0]
    cand = [c for c in cand if lo[0] < c < hi[0] and np.abs(vx - c).min() > 0.5 * delta]
    limit = math.ceil(2 * m / 3)
    best = None
    for x in cand:
        for y_lo, y_hi, e_lo, e_hi in polygon.vertical_intervals(x):
            seg = SplittingSegment(x, y_lo, y_hi, e_lo, e_hi)
            try:
                attach_sides(polygon, seg, validate=False)
            except InvalidGeometry:
                continue
            seg.left_ids, seg.right_ids = partition_points(seg, coords, ids)
            worst = max(len(seg.left_ids), len(seg.right_ids))
            if worst >= m:
                continue
            key = (worst, x)
            if best is None or key < best[0]:
                best = (key, seg)
        if best is not None and best[0][0] <= (m + 1) // 2:
            break  # a perfectly balanced chord cannot be beaten; smaller x wins ties
    if best is None:
        raise InvalidGeometry(f"no splitting chord separates the {m} points")
    seg = best[1]
    attach_sides(polygon, seg)  # validated simple this time
    if log is not None:
        log.add("split", max(len(seg.left_ids), len(seg.right_ids)) <= limit, level=level, n=m,
                left=len(seg.left_ids), right=len(seg.right_ids), limit=limit)
    return seg


@dataclass
class RefinementSet:
    source_id: int
    window: tuple
    pieces: list
    chosen: list  # ProjectedPoint per distinct landing point


def refinement_from_distance(f: ChordDistance, epsilon: float, weight: float,
                             source_id: int = -1) -> RefinementSet:
    y0, d0 = f.minimize()
    if d0 <= 0:
        pp = ProjectedPoint(source_id, f.x, y0, weight, 0.0)
        return RefinementSet(source_id, (y0, y0), [(y0, y0)], [pp])
    radius = (1 + 2 * epsilon) * d0
    a, b = max(f.y_lo, y0 - radius), min(f.y_hi, y0 + radius)
    count = max(1, math.ceil((b - a) / (epsilon * d0) - 1e-12))
    edges = np.linspace(a, b, count + 1)
    pieces = list(zip(edges[:-1].tolist(), edges[1:].tolist()))
    chosen = []
    seen = set()
    for s, e in pieces:
        y, d = f.minimize(s, e)
        if y in seen:
            continue
        seen.add(y)
        chosen.append(ProjectedPoint(source_id, f.x, y, weight + d, d))
    return RefinementSet(source_id, (a, b), pieces, chosen)


def build_refinement_set(polygon: SimplePolygon, p, chord: SplittingSegment, epsilon: float,
                         weight: float = 0.0, source_id: int = -1) -> RefinementSet:
    if chord.left is None:
        chord = attach_sides(polygon, chord)
    side = chord.left if chord.left.contains([p])[0] else chord.right
    return refinement_from_distance(chord_distance(side, chord, p), epsilon, weight, source_id)
