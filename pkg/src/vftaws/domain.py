"""Spanners for weighted points in a polygon with holes.

The free space is cut into simple cells by vertical portals, a separator on
the cell adjacency graph picks the portals to span at each level, and single
cells fall back to the simple-polygon builder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from shapely.geometry import LineString
from shapely.ops import polygonize, unary_union

from .cluster import _check_args
from .geometry import SimplePolygon, boundary_distance, segments_touch
from .metric import InvalidArgument, InvalidGeometry, MetricOracle, Spanner, additive_matrix
from .polygon_geodesic import refinement_from_distance
from .polygon_vftaws import build_polygon_into, build_vftaws_polygon, span_chord
from .trace import BuildLog
from .visibility import Region, VisibilityEngine

CELL_BUDGET = 12
SEPARATOR_C = 4.0
ZOOM = 16


class PolygonalDomain:
    """Outer simple polygon minus pairwise disjoint open holes."""

    def __init__(self, outer, holes=()):
        self.outer = outer if isinstance(outer, SimplePolygon) else SimplePolygon(outer)
        self.holes = [h if isinstance(h, SimplePolygon) else SimplePolygon(h) for h in holes]
        for i, h in enumerate(self.holes):
            if not self.outer.contains(h.vertices, closed=False).all() or _rings_touch(h, self.outer):
                raise InvalidGeometry(f"hole {i} is not strictly inside the outer polygon")
            for j in range(i):
                g = self.holes[j]
                if _rings_touch(h, g) or g.contains(h.vertices[:1])[0] or h.contains(g.vertices[:1])[0]:
                    raise InvalidGeometry(f"holes {j} and {i} overlap")
        self.region = Region(self.outer.vertices, [h.vertices for h in self.holes])
        self.diam = self.outer.diam

    @property
    def h(self) -> int:
        return len(self.holes)

    def contains(self, pts) -> np.ndarray:
        return self.region.contains(pts)

    def contains_open(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ok = self.outer.contains(pts, closed=False)
        for h in self.holes:
            ok &= ~h.contains(pts, closed=True)
        return ok

    def boundary_gap(self, pts) -> np.ndarray:
        return boundary_distance(pts, self.region.rings)

    def hole_rings(self) -> list:
        # serialized holes run clockwise
        return [h.vertices[::-1].tolist() for h in self.holes]


def _rings_touch(a: SimplePolygon, b: SimplePolygon) -> bool:
    va, vb = a.vertices, b.vertices
    for i in range(len(va)):
        for j in range(len(vb)):
            if segments_touch(va[i], va[(i + 1) % len(va)], vb[j], vb[(j + 1) % len(vb)]):
                return True
    return False


class DomainGeodesic(MetricOracle):
    """Free-space geodesic distance via the reflex-vertex visibility graph."""

    def __init__(self, domain: PolygonalDomain, points):
        self.domain = domain
        self.points = list(points)
        self.n = len(self.points)
        self.coords = np.array([p.coords for p in self.points], dtype=float).reshape(self.n, 2)
        self.engine = VisibilityEngine(domain.region)
        bad = ~domain.contains(self.coords) if self.n else np.zeros(0, bool)
        if bad.any():
            raise InvalidArgument(f"point {int(np.flatnonzero(bad)[0])} is outside the free space")

    def base_distance(self, a, b):
        self.check_id(a)
        self.check_id(b)
        return float(self.distance_matrix()[a, b])

    def distance_matrix(self):
        if self._matrix is None:
            m = np.zeros((self.n, self.n))
            if self.n:
                tv = self.engine.target_visibility(self.coords)
                for i in range(self.n):
                    m[i] = self.engine.distances(self.coords[i], self.coords, tv=tv)
                m = np.minimum(m, m.T)
                np.fill_diagonal(m, 0.0)
            self._matrix = m
        return self._matrix


@dataclass
class Portal:
    x: float
    y_lo: float
    y_hi: float

    @property
    def midpoint(self):
        return np.array([self.x, 0.5 * (self.y_lo + self.y_hi)])

    @property
    def length(self):
        return self.y_hi - self.y_lo


@dataclass
class Decomposition:
    cells: list
    portals: list
    cell_portals: list
    dual: nx.Graph = field(repr=False)

    def locate(self, pts) -> np.ndarray:
        """First cell (by index) containing each point."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.full(len(pts), -1)
        for c, cell in enumerate(self.cells):
            hit = (out < 0) & cell.contains(pts)
            out[hit] = c
        if (out < 0).any():
            raise InvalidArgument(f"point {int(np.flatnonzero(out < 0)[0])} lies in no cell")
        return out


def _extremes(hole: SimplePolygon):
    v = hole.vertices
    xmin, xmax = v[:, 0].min(), v[:, 0].max()
    left = v[v[:, 0] == xmin]
    right = v[v[:, 0] == xmax]
    # with a vertical edge at the extreme, shoot up from its top and down from its bottom
    return [(left[:, 1].max(), xmin, True), (left[:, 1].min(), xmin, False),
            (right[:, 1].max(), xmax, True), (right[:, 1].min(), xmax, False)]


def _ray_hit(region: Region, x, y0, up, tol):
    a, b = region.ea, region.eb
    span = (a[:, 0] - x) * (b[:, 0] - x) <= 0
    ys = []
    for (ax, ay), (bx, by) in zip(a[span], b[span]):
        if ax == bx:
            ys += [ay, by]
        else:
            ys.append(ay + (x - ax) * (by - ay) / (bx - ax))
    ys = np.array(ys)
    ys = ys[ys > y0 + tol] if up else ys[ys < y0 - tol]
    if not len(ys):
        raise InvalidGeometry(f"vertical ray at x={x} escapes the domain")
    return float(ys.min() if up else ys.max())


def _on_boundary(poly: SimplePolygon, pt, tol) -> bool:
    return bool(boundary_distance([pt], [poly.vertices])[0] <= tol)


def _incidence(cells, portals, tol):
    return [[i for i, p in enumerate(portals) if _on_boundary(c, p.midpoint, tol)] for c in cells]


def _split_cell(cell: SimplePolygon, portals, tol):
    """Best vertical cut of ``cell`` balancing its portals; None if nothing helps."""
    xs = sorted({round(p.x, 12) for p in portals})
    vx = cell.vertices[:, 0]
    best = None
    for x0, x1 in zip(xs[:-1], xs[1:]):
        x = 0.5 * (x0 + x1)
        if np.min(np.abs(vx - x)) <= tol:
            x = x0 + 0.375 * (x1 - x0)
        for ylo, yhi, le, he in cell.vertical_intervals(x):
            try:
                west, east = cell.cut_vertical(x, ylo, yhi, le, he)
            except InvalidGeometry:
                continue
            cw = sum(_on_boundary(west, p.midpoint, tol) for p in portals)
            ce = sum(_on_boundary(east, p.midpoint, tol) for p in portals)
            if cw == 0 or ce == 0:
                continue
            score = (max(cw, ce) + 1, abs(cw - ce), x, ylo)
            if best is None or score < best[0]:
                best = (score, west, east, Portal(x, ylo, yhi))
    return best


def decompose_domain(domain: PolygonalDomain, log: BuildLog | None = None) -> Decomposition:
    if domain.h == 0:
        g = nx.Graph()
        g.add_node(0)
        return Decomposition([domain.outer], [], [[]], g)
    tol = 1e-9 * domain.diam
    portals = []
    for hole in domain.holes:
        for y0, x, up in _extremes(hole):
            y1 = _ray_hit(domain.region, x, y0, up, tol)
            portals.append(Portal(x, min(y0, y1), max(y0, y1)))
    lines = [LineString([(p.x, p.y_lo), (p.x, p.y_hi)]) for p in portals]
    for ring in domain.region.rings:
        closed = np.vstack([ring, ring[:1]])
        lines.append(LineString(closed))
    cells = []
    for face in polygonize(unary_union(lines)):
        rp = np.array(face.representative_point().coords[0])
        if not domain.contains_open([rp])[0]:
            continue
        if len(face.interiors):
            raise InvalidGeometry("decomposition produced a cell with a hole")
        cells.append(SimplePolygon(np.array(face.exterior.coords)[:-1]))
    # deterministic cell order: by lowest-left vertex
    cells.sort(key=lambda c: tuple(c.vertices[np.lexsort((c.vertices[:, 1], c.vertices[:, 0]))[0]]))
    incid = _incidence(cells, portals, tol)
    while True:
        over = [c for c in range(len(cells)) if len(incid[c]) > 3]
        if not over:
            break
        c = over[0]
        res = _split_cell(cells[c], [portals[i] for i in incid[c]], tol)
        if res is None or res[0][0] >= len(incid[c]):
            break
        _, west, east, cut = res
        cells[c:c + 1] = [west, east]
        portals.append(cut)
        incid = _incidence(cells, portals, tol)
    dual = nx.Graph()
    dual.add_nodes_from(range(len(cells)))
    for i in range(len(portals)):
        sides = [c for c in range(len(cells)) if i in incid[c]]
        if len(sides) == 2:
            dual.add_edge(sides[0], sides[1], portal=i)
    dec = Decomposition(cells, portals, incid, dual)
    if log is not None:
        free_area = domain.outer.area - sum(h.area for h in domain.holes)
        area = sum(c.area for c in cells)
        ok = (max(len(p) for p in incid) <= 3 and len(cells) <= CELL_BUDGET * max(domain.h, 1)
              and abs(area - free_area) <= 1e-9 * free_area and nx.is_connected(dual)
              and nx.check_planarity(dual)[0])
        log.add("decomposition", ok, cells=len(cells), portals=len(portals),
                max_portals=max(len(p) for p in incid), area=area, free_area=free_area)
    return dec


@dataclass
class SeparatorResult:
    P: list
    Q: list
    R: list


def _pack(components, weight):
    """Split components into two sides, each at most 2/3 of the total."""
    comps = sorted(components, key=lambda c: (-weight(c), min(c)))
    total = sum(weight(c) for c in comps)
    P, Q = [], []
    wp = 0.0
    for c in comps:
        if wp < total / 3:
            P += c
            wp += weight(c)
        else:
            Q += c
    return sorted(P), sorted(Q)


def planar_separator(graph: nx.Graph, weight: str = "weight", c: float = SEPARATOR_C) -> SeparatorResult:
    """Small vertex set whose removal leaves no component above 2/3 of the weight.

    Candidates are single BFS levels, pairs of levels and fundamental cycles
    of BFS trees from every root; the smallest valid one wins.
    """
    nodes = sorted(graph)
    m = len(nodes)
    if m == 0:
        raise InvalidArgument("empty graph")
    if m == 1:
        return SeparatorResult([], [], nodes)
    if not nx.check_planarity(graph)[0]:
        raise RuntimeError("dual graph is not planar")
    w = {v: float(graph.nodes[v].get(weight, 1.0)) for v in nodes}
    total = sum(w.values())
    if total <= 0:
        w = {v: 1.0 for v in nodes}
        total = float(m)
    limit = 2 * total / 3 * (1 + 1e-12)
    budget = c * math.sqrt(m)

    def wsum(vs):
        return sum(w[v] for v in vs)

    candidates = set()
    for root in nodes:
        layers = [sorted(L) for L in nx.bfs_layers(graph, [root])]
        for i, a in enumerate(layers):
            candidates.add(tuple(a))
            for b in layers[i + 2:]:
                candidates.add(tuple(sorted(a + b)))
        tree = nx.bfs_tree(graph, root)
        parent = {v: u for u, v in tree.edges}
        depth = {v: d for d, L in enumerate(layers) for v in L}
        for u, v in graph.edges:
            if parent.get(v) == u or parent.get(u) == v:
                continue
            cyc = {u, v}
            a, b = u, v
            while a != b:
                if depth[a] >= depth[b]:
                    a = parent[a]
                else:
                    b = parent[b]
                cyc.add(a)
                cyc.add(b)
            candidates.add(tuple(sorted(cyc)))
    for v in nodes:
        candidates.add((v,))
    best = None
    for R in candidates:
        if len(R) > budget:
            continue
        rest = graph.subgraph([v for v in nodes if v not in set(R)])
        comps = [sorted(cc) for cc in nx.connected_components(rest)]
        if any(wsum(cc) > limit for cc in comps):
            continue
        P, Q = _pack(comps, wsum)
        if wsum(P) > limit or wsum(Q) > limit:
            continue
        score = (len(R), max(wsum(P), wsum(Q)), R)
        if best is None or score < best[0]:
            best = (score, SeparatorResult(P, Q, list(R)))
    if best is None:
        raise RuntimeError("no balanced separator within budget")
    return best[1]


def separator_ok(graph: nx.Graph, sep: SeparatorResult, weight="weight", c=SEPARATOR_C) -> bool:
    m = graph.number_of_nodes()
    w = {v: float(graph.nodes[v].get(weight, 1.0)) for v in graph}
    total = sum(w.values())
    if total <= 0:
        w = {v: 1.0 for v in graph}
        total = float(m)
    P, Q = set(sep.P), set(sep.Q)
    if P & Q or (P | Q) & set(sep.R) or len(P | Q | set(sep.R)) != m:
        return False
    cross_edge = any((u in P and v in Q) or (u in Q and v in P) for u, v in graph.edges)
    limit = 2 * total / 3 * (1 + 1e-12)
    return (not cross_edge and len(sep.R) <= c * math.sqrt(m)
            and sum(w[v] for v in P) <= limit and sum(w[v] for v in Q) <= limit)


class PortalDistance:
    """Geodesic distance from one source to the points of a vertical portal.

    Not convex in general, so minima come from dense samples refined by
    repeated zooming on the bracket around the best sample.
    """

    def __init__(self, engine: VisibilityEngine, p, portal: Portal, epsilon: float,
                 p_nodes=None, samples=None, tv=None):
        self.engine = engine
        self.p = np.asarray(p, dtype=float)
        self.x, self.y_lo, self.y_hi = portal.x, portal.y_lo, portal.y_hi
        self.p_nodes = engine.to_nodes(self.p) if p_nodes is None else p_nodes
        self.ys = portal_samples(portal, epsilon) if samples is None else samples
        pts = np.c_[np.full(len(self.ys), self.x), self.ys]
        self.vals = engine.distances(self.p, pts, self.p_nodes, tv)

    def value(self, y: float) -> float:
        return float(self.engine.distances(self.p, [[self.x, y]], self.p_nodes)[0])

    def minimize(self, a: float | None = None, b: float | None = None, rounds: int = 6):
        a = self.y_lo if a is None else a
        b = self.y_hi if b is None else b
        inner = (self.ys > a) & (self.ys < b)
        ys = np.concatenate(([a], self.ys[inner], [b]))
        ends = self._values([a, b])
        vals = np.concatenate(([ends[0]], self.vals[inner], [ends[1]]))
        i = int(np.argmin(vals))
        best_y, best_v = float(ys[i]), float(vals[i])
        lo, hi = ys[max(i - 1, 0)], ys[min(i + 1, len(ys) - 1)]
        # zoom in on the bracket around the best sample
        for _ in range(rounds):
            if hi - lo <= 1e-13 * max(self.y_hi - self.y_lo, 1.0):
                break
            grid = np.linspace(lo, hi, ZOOM + 1)
            gv = self._values(grid)
            j = int(np.argmin(gv))
            if gv[j] < best_v:
                best_y, best_v = float(grid[j]), float(gv[j])
            lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, ZOOM)]
        return best_y, best_v

    def _values(self, ys) -> np.ndarray:
        pts = np.c_[np.full(len(ys), self.x), np.asarray(ys, dtype=float)]
        return self.engine.distances(self.p, pts, self.p_nodes)


def portal_samples(portal: Portal, epsilon: float) -> np.ndarray:
    count = max(8, math.ceil(64 / epsilon))
    return np.linspace(portal.y_lo, portal.y_hi, count + 1)


def portal_landing(engine, portal: Portal, coords, weights, ids, epsilon, node_cache) -> list:
    samples = portal_samples(portal, epsilon)
    tv = engine.target_visibility(np.c_[np.full(len(samples), portal.x), samples])
    out = []
    for pid in ids:
        if pid not in node_cache:
            node_cache[pid] = engine.to_nodes(coords[pid])
        f = PortalDistance(engine, coords[pid], portal, epsilon, node_cache[pid], samples, tv)
        out.extend(refinement_from_distance(f, epsilon, weights[pid], pid).chosen)
    return out


def build_vftaws_domain(domain: PolygonalDomain, points, k: int, epsilon: float,
                        log: BuildLog | None = None, oracle: DomainGeodesic | None = None,
                        decomposition: Decomposition | None = None) -> Spanner:
    _check_args(k, epsilon)
    n = len(points)
    coords = np.array([p.coords for p in points], dtype=float).reshape(n, 2)
    inside = domain.contains_open(coords) if n else np.zeros(0, bool)
    if not inside.all():
        raise InvalidArgument(f"point {int(np.flatnonzero(~inside)[0])} is not strictly inside the free space")
    if domain.h == 0:
        return build_vftaws_polygon(domain.outer, points, k, epsilon, True, log)
    oracle = oracle or DomainGeodesic(domain, points)
    dw = additive_matrix(points, oracle)
    weights = np.array([p.weight for p in points], dtype=float)
    dec = decomposition or decompose_domain(domain, log)
    cell_of = dec.locate(coords) if n else np.zeros(0, int)
    engine = oracle.engine
    node_cache: dict = {}
    processed: set = set()
    sp = Spanner(n)
    stack = [(list(range(len(dec.cells))), "d")]
    while stack:
        cells, label = stack.pop()
        ids = [i for i in range(n) if cell_of[i] in set(cells)]
        if len(ids) <= 1:
            continue
        if len(cells) == 1:
            build_polygon_into(sp, dec.cells[cells[0]], coords, weights, ids, dw, k, epsilon,
                               True, log, label)
            continue
        sub = dec.dual.subgraph(cells).copy()
        for c in cells:
            sub.nodes[c]["weight"] = int(np.sum(cell_of[ids] == c))
        sep = planar_separator(sub)
        if log is not None:
            log.add("separator", separator_ok(sub, sep), level=label, m=len(cells),
                    R=len(sep.R), P=len(sep.P), Q=len(sep.Q))
        for pid in sorted({q for r in sep.R for q in dec.cell_portals[r]} - processed):
            processed.add(pid)
            landing = portal_landing(engine, dec.portals[pid], coords, weights, ids, epsilon, node_cache)
            span_chord(sp, landing, dw, k, epsilon, log, f"{label}.g{pid}")
        for r in sep.R:
            rids = [i for i in ids if cell_of[i] == r]
            build_polygon_into(sp, dec.cells[r], coords, weights, rids, dw, k, epsilon, True, log,
                               f"{label}.c{r}")
        stack.append((sep.Q, label + ".1"))
        stack.append((sep.P, label + ".0"))
    return sp
