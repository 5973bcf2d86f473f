"""Spanners for weighted points on a polyhedral terrain.

Distances come from a Steiner-point graph over the mesh, so construction and
verification share one oracle. Separators are found by brute force over
shortest paths between boundary vertices, then over shortest-path triangles.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .cluster import _check_args
from .geometry import inside_ring
from .metric import InvalidArgument, InvalidGeometry, MetricOracle, Spanner, additive_matrix
from .polygon_geodesic import refinement_from_distance, ProjectedPoint
from .polygon_vftaws import span_chord
from .trace import BuildLog

DEFAULT_STEINER = 3


class TerrainMesh:
    """Triangulated xy-monotone surface with a single boundary cycle."""

    def __init__(self, vertices, triangles):
        v = np.asarray(vertices, dtype=float)
        t = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        if v.ndim != 2 or v.shape[1] != 3:
            raise InvalidGeometry("terrain vertices must be (x, y, z) triples")
        if len(t) == 0:
            raise InvalidGeometry("terrain has no triangles")
        if t.min() < 0 or t.max() >= len(v):
            raise InvalidGeometry("triangle index out of range")
        xy = v[:, :2]
        area = 0.5 * ((xy[t[:, 1], 0] - xy[t[:, 0], 0]) * (xy[t[:, 2], 1] - xy[t[:, 0], 1])
                      - (xy[t[:, 1], 1] - xy[t[:, 0], 1]) * (xy[t[:, 2], 0] - xy[t[:, 0], 0]))
        if np.any(np.abs(area) <= 1e-14 * max(np.ptp(xy, axis=0).max(), 1.0) ** 2):
            raise InvalidGeometry(f"triangle {int(np.argmin(np.abs(area)))} is degenerate in the plane")
        self.vertices = v
        self.triangles = t
        count: dict = {}
        for tri in t.tolist():
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (min(a, b), max(a, b))
                count[key] = count.get(key, 0) + 1
        if max(count.values()) > 2:
            raise InvalidGeometry("an edge is shared by more than two triangles")
        self.edges = sorted(count)
        self.boundary = self._boundary_cycle([e for e in self.edges if count[e] == 1])
        self._tri_count = count

    def _boundary_cycle(self, bedges):
        nxt: dict = {}
        for a, b in bedges:
            nxt.setdefault(a, []).append(b)
            nxt.setdefault(b, []).append(a)
        if any(len(x) != 2 for x in nxt.values()):
            raise InvalidGeometry("terrain boundary is not a simple cycle")
        start = min(nxt)
        cycle = [start]
        prev, cur = None, start
        while True:
            a, b = nxt[cur]
            step = a if a != prev else b
            if step == start:
                break
            cycle.append(step)
            prev, cur = cur, step
        if len(cycle) != len(nxt):
            raise InvalidGeometry("terrain boundary has more than one cycle")
        ring = self.vertices[cycle, :2]
        if _ring_area(ring) < 0:
            cycle = [cycle[0]] + cycle[1:][::-1]
        return cycle

    def __len__(self):
        return len(self.vertices)

    def snap(self, coords):
        """Nearest mesh vertex per point, and the largest snap distance."""
        c = np.atleast_2d(np.asarray(coords, dtype=float))
        ref = self.vertices if c.shape[1] == 3 else self.vertices[:, :2]
        d = np.sqrt(((c[:, None, :] - ref[None]) ** 2).sum(axis=2))
        ids = d.argmin(axis=1)
        return ids, float(d[np.arange(len(c)), ids].max()) if len(c) else 0.0

    @classmethod
    def from_off(cls, text: str) -> "TerrainMesh":
        rows = [ln.split("#")[0].split() for ln in text.splitlines()]
        rows = [r for r in rows if r]
        if not rows or rows[0][0].upper() != "OFF":
            raise InvalidGeometry("missing OFF header")
        body = rows[1:]
        if len(rows[0]) > 1:
            body = [rows[0][1:]] + body
        nv, nf = int(body[0][0]), int(body[0][1])
        verts = [[float(x) for x in r[:3]] for r in body[1:1 + nv]]
        tris = []
        for r in body[1 + nv:1 + nv + nf]:
            if int(r[0]) != 3:
                raise InvalidGeometry("OFF faces must be triangles")
            tris.append([int(x) for x in r[1:4]])
        return cls(verts, tris)


def _ring_area(ring) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass
class MeshGraph:
    positions: np.ndarray
    dist: np.ndarray
    pred: np.ndarray

    def path(self, u: int, v: int) -> list:
        out = [v]
        while out[-1] != u:
            p = int(self.pred[u, out[-1]])
            if p < 0:
                raise InvalidGeometry(f"no path between nodes {u} and {v}")
            out.append(p)
        return out[::-1]


def mesh_graph(mesh: TerrainMesh, steiner: int = DEFAULT_STEINER) -> MeshGraph:
    if steiner < 0:
        raise InvalidArgument(f"steiner_per_edge must be >= 0, got {steiner}")
    v = mesh.vertices
    n = len(v)
    eidx = {e: i for i, e in enumerate(mesh.edges)}
    frac = np.arange(1, steiner + 1) / (steiner + 1)
    pos = [v]
    for a, b in mesh.edges:
        pos.append(v[a] + frac[:, None] * (v[b] - v[a]))
    positions = np.vstack(pos)

    def edge_nodes(a, b):
        e = eidx[(min(a, b), max(a, b))]
        return list(range(n + e * steiner, n + (e + 1) * steiner))

    rows, cols = [], []
    for a, b, c in mesh.triangles.tolist():
        nodes = [a, b, c] + edge_nodes(a, b) + edge_nodes(b, c) + edge_nodes(c, a)
        for i, j in itertools.combinations(nodes, 2):
            rows.append(min(i, j))
            cols.append(max(i, j))
    pairs = np.unique(np.array([rows, cols]).T, axis=0)
    lens = np.sqrt(((positions[pairs[:, 0]] - positions[pairs[:, 1]]) ** 2).sum(axis=1))
    m = len(positions)
    g = coo_matrix((lens, (pairs[:, 0], pairs[:, 1])), shape=(m, m)).tocsr()
    ncomp, _ = connected_components(g, directed=False)
    if ncomp != 1:
        raise InvalidGeometry(f"terrain mesh is disconnected ({ncomp} components)")
    dist, pred = dijkstra(g, directed=False, return_predecessors=True)
    return MeshGraph(positions, dist, pred)


class MeshGeodesic(MetricOracle):
    """Approximate terrain geodesics: shortest paths in the Steiner graph."""

    def __init__(self, mesh: TerrainMesh, points, steiner: int = DEFAULT_STEINER, graph=None):
        self.mesh = mesh
        self.points = list(points)
        self.n = len(self.points)
        self.steiner = steiner
        self.graph = graph or mesh_graph(mesh, steiner)
        coords = np.array([p.coords for p in self.points], dtype=float).reshape(self.n, -1)
        if self.n:
            self.nodes, self.snap_distance = mesh.snap(coords)
        else:
            self.nodes, self.snap_distance = np.zeros(0, np.int64), 0.0

    def base_distance(self, a, b):
        self.check_id(a)
        self.check_id(b)
        return float(self.graph.dist[self.nodes[a], self.nodes[b]])

    def distance_matrix(self):
        if self._matrix is None:
            m = self.graph.dist[np.ix_(self.nodes, self.nodes)].copy()
            m = np.minimum(m, m.T)
            np.fill_diagonal(m, 0.0)
            self._matrix = m
        return self._matrix

    def path(self, a, b):
        return [tuple(self.graph.positions[i]) for i in self.graph.path(int(self.nodes[a]), int(self.nodes[b]))]


def mesh_geodesic_oracle(mesh: TerrainMesh, points, steiner_per_edge: int = DEFAULT_STEINER) -> MeshGeodesic:
    return MeshGeodesic(mesh, points, steiner_per_edge)


@dataclass
class SpSeparator:
    kind: str  # "path" or "triangle"
    corners: tuple
    paths: list  # node lists
    inside: dict = field(default_factory=dict)  # point id -> bool
    relaxed: bool = False

    @property
    def inside_ids(self) -> list:
        return sorted(i for i, v in self.inside.items() if v)

    @property
    def outside_ids(self) -> list:
        return sorted(i for i, v in self.inside.items() if not v)


class SeparatorNotFound(RuntimeError):
    def __init__(self, best_count: int, n: int):
        super().__init__(f"no balanced sp-separator; best inside count {best_count} of {n}")
        self.best_count = best_count
        self.n = n


def _chain(cycle, v, u):
    """Boundary vertices from v to u walking clockwise (against the stored order)."""
    i, j = cycle.index(v), cycle.index(u)
    out = [v]
    while i != j:
        i = (i - 1) % len(cycle)
        out.append(cycle[i])
    return out


def classify_side(mesh: TerrainMesh, graph: MeshGraph, path: list, point_nodes) -> np.ndarray:
    """Membership in the closed region right of a boundary-to-boundary path.

    The terrain is a height field, so the region is read off in the plane:
    the path plus the boundary walked back clockwise bounds it.
    """
    u, v = path[0], path[-1]
    bset = set(mesh.boundary)
    if u not in bset or v not in bset:
        raise RuntimeError("separator path must start and end on the boundary")
    chain = _chain(mesh.boundary, v, u)
    ring = graph.positions[list(path) + chain[1:-1], :2]
    return _region_membership(ring, set(path) | set(chain), bset, graph, point_nodes)


def _region_membership(ring, closed_nodes, boundary, graph, point_nodes) -> np.ndarray:
    point_nodes = np.asarray(point_nodes)
    out = np.zeros(len(point_nodes), dtype=bool)
    if len(point_nodes) == 0:
        return out
    strict = inside_ring(graph.positions[point_nodes, :2], ring)
    for i, node in enumerate(point_nodes.tolist()):
        if node in closed_nodes:
            out[i] = True
        elif node in boundary:
            out[i] = False
        else:
            out[i] = bool(strict[i])
    return out


def triangle_membership(mesh, graph, corners, point_nodes):
    u, v, w = corners
    paths = [graph.path(u, v), graph.path(v, w), graph.path(w, u)]
    ring_nodes = paths[0] + paths[1][1:] + paths[2][1:-1]
    ring = graph.positions[ring_nodes, :2]
    on = set(ring_nodes)
    pn = np.asarray(point_nodes)
    strict = inside_ring(graph.positions[pn, :2], ring) if len(pn) else np.zeros(0, bool)
    return paths, np.array([node in on or bool(s) for node, s in zip(pn.tolist(), strict)], dtype=bool)


def _balanced(count, n, relaxed):
    lo, hi = 2 * n / 9, 2 * n / 3
    if relaxed:
        lo, hi = math.ceil(lo) - 1, math.floor(hi) + 1
    return max(lo, 1) <= count <= min(hi, n - 1)


def find_sp_separator(mesh: TerrainMesh, oracle: MeshGeodesic, ids=None) -> SpSeparator:
    ids = list(range(oracle.n)) if ids is None else list(ids)
    n = len(ids)
    if n < 4:
        raise InvalidArgument("separators are only searched for 4 or more points")
    graph = oracle.graph
    nodes = oracle.nodes[ids]
    best = 0
    for relaxed in (False, True) if n < 9 else (False,):
        for u, v in itertools.permutations(mesh.boundary, 2):
            path = graph.path(u, v)
            inside = classify_side(mesh, graph, path, nodes)
            cnt = int(inside.sum())
            if abs(cnt - n / 2) < abs(best - n / 2):
                best = cnt
            if _balanced(cnt, n, relaxed):
                return SpSeparator("path", (u, v), [path], dict(zip(ids, inside.tolist())), relaxed)
        for corners in itertools.combinations(range(len(mesh)), 3):
            paths, inside = triangle_membership(mesh, graph, corners, nodes)
            cnt = int(inside.sum())
            if abs(cnt - n / 2) < abs(best - n / 2):
                best = cnt
            if _balanced(cnt, n, relaxed):
                return SpSeparator("triangle", corners, paths, dict(zip(ids, inside.tolist())), relaxed)
    raise SeparatorNotFound(best, n)


class PathDistance:
    """Oracle distance from one source node to the nodes of a path, by arc length."""

    def __init__(self, graph: MeshGraph, source: int, path: list):
        pos = graph.positions[path]
        seg = np.sqrt(((pos[1:] - pos[:-1]) ** 2).sum(axis=1))
        self.s = np.concatenate(([0.0], np.cumsum(seg)))
        self.vals = graph.dist[source, path]
        self.x = 0.0
        self.y_lo, self.y_hi = 0.0, float(self.s[-1])

    def value(self, y: float) -> float:
        return float(self.vals[int(np.argmin(np.abs(self.s - y)))])

    def minimize(self, a: float | None = None, b: float | None = None):
        a = self.y_lo if a is None else a
        b = self.y_hi if b is None else b
        tol = 1e-12 * max(self.y_hi, 1.0)
        sel = np.flatnonzero((self.s >= a - tol) & (self.s <= b + tol))
        if len(sel) == 0:
            # piece holds no node: fall back to the nearest node
            sel = np.array([int(np.argmin(np.minimum(np.abs(self.s - a), np.abs(self.s - b))))])
        i = sel[int(np.argmin(self.vals[sel]))]
        return float(self.s[i]), float(self.vals[i])


def path_landing(graph, path, nodes, weights, ids, epsilon, refined=True) -> list:
    out = []
    for pid in ids:
        f = PathDistance(graph, int(nodes[pid]), path)
        if refined:
            out.extend(refinement_from_distance(f, epsilon, weights[pid], pid).chosen)
        else:
            y, d = f.minimize()
            out.append(ProjectedPoint(pid, 0.0, y, weights[pid] + d, d))
    return out


def build_vftaws_terrain(mesh: TerrainMesh, points, k: int, epsilon: float,
                         steiner_per_edge: int = DEFAULT_STEINER, log: BuildLog | None = None,
                         oracle: MeshGeodesic | None = None, refined: bool = True) -> Spanner:
    _check_args(k, epsilon)
    oracle = oracle or MeshGeodesic(mesh, points, steiner_per_edge)
    n = len(points)
    dw = additive_matrix(points, oracle)
    weights = np.array([p.weight for p in points], dtype=float)
    sp = Spanner(n)
    stack = [(list(range(n)), "t")]
    while stack:
        ids, label = stack.pop()
        if len(ids) <= 1:
            continue
        if len(ids) <= 3:
            for p, q in itertools.combinations(ids, 2):
                sp.add_edge(p, q, float(dw[p, q]), f"base-case:{label}")
            continue
        sep = find_sp_separator(mesh, oracle, ids)
        inside, outside = sep.inside_ids, sep.outside_ids
        if log is not None:
            ok = (_balanced(len(inside), len(ids), sep.relaxed)
                  and sorted(inside + outside) == sorted(ids))
            log.add("sp-separator", ok, level=label, n=len(ids), inside=len(inside),
                    shape=sep.kind, relaxed=sep.relaxed)
        for g, path in enumerate(sep.paths):
            landing = path_landing(oracle.graph, path, oracle.nodes, weights, ids, epsilon, refined)
            span_chord(sp, landing, dw, k, epsilon, log, f"{label}.s{g}")
        stack.append((outside, label + ".1"))
        stack.append((inside, label + ".0"))
    return sp
