"""Vertex-fault-tolerant spanner for unweighted points.

Candidates come from a cone (Yao-style) graph: each point connects to its
k+1 nearest neighbours inside every cone of a fixed partition around it,
which gives stretch 1/(cos theta - sin theta) after deleting any k vertices.
In d >= 2 the candidates are built for stretch sqrt(t_b) and then filtered
greedily, shortest first: an edge is dropped when the graph kept so far
already joins its endpoints within sqrt(t_b)*|uv| under every fault set of
size <= k. Composing the two guarantees gives t_b, and the kept graph has
far lower degree than the cone graph. In d = 1 the cone graph already has
degree <= 2(k+1) and is used as is.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .metric import InvalidArgument, Spanner


def cone_angle(t_b: float) -> float:
    """Largest theta with 1/(cos theta - sin theta) <= t_b."""
    if not t_b > 1:
        raise InvalidArgument(f"base stretch must exceed 1, got {t_b}")
    return math.acos(1.0 / (t_b * math.sqrt(2.0))) - math.pi / 4


@dataclass
class ConeScheme:
    d: int
    theta: float
    axes: np.ndarray | None = None  # unit axis per cone, d >= 3 only

    @classmethod
    def for_stretch(cls, d: int, t_b: float) -> "ConeScheme":
        theta = cone_angle(t_b)
        axes = None
        if d >= 3:
            # cube-face grid; radial projection keeps every direction within
            # theta/2 of some axis, so a Voronoi cell spans at most theta
            m = math.ceil((math.pi / 2) * math.sqrt(d - 1) / (theta / 2))
            ticks = -1 + (2 * np.arange(m) + 1) / m
            rows = []
            for axis in range(d):
                for sign in (-1.0, 1.0):
                    for rest in itertools.product(ticks, repeat=d - 1):
                        v = list(rest)
                        v.insert(axis, sign)
                        rows.append(v)
            a = np.array(rows)
            axes = a / np.linalg.norm(a, axis=1)[:, None]
        return cls(d, theta, axes)

    @property
    def count(self) -> int:
        if self.d == 1:
            return 2
        if self.d == 2:
            return math.ceil(2 * math.pi / self.theta)
        return len(self.axes)

    def assign(self, vecs: np.ndarray) -> np.ndarray:
        """Cone index for each direction vector (zero vectors go to cone 0)."""
        vecs = np.asarray(vecs, dtype=float).reshape(len(vecs), self.d)
        if self.d == 1:
            return (vecs[:, 0] > 0).astype(int)
        if self.d == 2:
            kappa = self.count
            width = 2 * math.pi / kappa
            ang = np.mod(np.arctan2(vecs[:, 1], vecs[:, 0]), 2 * math.pi)
            # a direction on a boundary belongs to the lower-indexed cone
            idx = np.ceil(ang / width).astype(int) - 1
            idx = np.clip(idx, 0, kappa - 1)
            idx[(vecs[:, 0] == 0) & (vecs[:, 1] == 0)] = 0
            return idx
        return np.argmax(vecs @ self.axes.T, axis=1)


def cone_edges(coords, k: int, t_b: float) -> list[tuple[int, int]]:
    """Sorted undirected edge list of the cone spanner on ``coords``."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    n, d = coords.shape
    scheme = ConeScheme.for_stretch(d, t_b)
    if k < 0:
        raise InvalidArgument("k must be >= 0")
    if n <= k + 2:
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    ids = np.arange(n)
    edges = set()
    for i in range(n):
        others = ids[ids != i]
        vec = coords[others] - coords[i]
        dist = np.sqrt((vec ** 2).sum(axis=1))
        cone = scheme.assign(vec)
        order = np.lexsort((others, dist, cone))
        cone_sorted = cone[order]
        # rank of each entry inside its cone group
        starts = np.r_[0, np.flatnonzero(np.diff(cone_sorted)) + 1]
        group_start = np.repeat(starts, np.diff(np.r_[starts, len(order)]))
        rank = np.arange(len(order)) - group_start
        for j in others[order[rank <= k]]:
            j = int(j)
            edges.add((i, j) if i < j else (j, i))
    return sorted(edges)


def _bounded_path(adj, u, v, limit, banned):
    """Shortest u-v path avoiding ``banned`` if its length is <= limit, else None."""
    dist = {u: 0.0}
    prev = {}
    heap = [(0.0, u)]
    while heap:
        d, a = heapq.heappop(heap)
        if a == v:
            path = [v]
            while path[-1] != u:
                path.append(prev[path[-1]])
            return path
        if d > dist[a]:
            continue
        for b, length in adj[a]:
            nd = d + length
            if b in banned or nd > limit or nd >= dist.get(b, math.inf):
                continue
            dist[b] = nd
            prev[b] = a
            heapq.heappush(heap, (nd, b))
    return None


def fault_tolerant_path(adj, u, v, limit, k, banned=frozenset(), memo=None) -> bool:
    """True iff u, v stay within ``limit`` after removing any k more vertices.

    Exact: a fault set that breaks every short path must hit the current
    shortest one, so branching on its interior vertices covers all sets.
    """
    memo = {} if memo is None else memo
    if banned in memo:
        return memo[banned]
    path = _bounded_path(adj, u, v, limit, banned)
    ok = path is not None
    if ok and k > 0:
        ok = all(fault_tolerant_path(adj, u, v, limit, k - 1, banned | {x}, memo)
                 for x in path[1:-1])
    memo[banned] = ok
    return ok


def greedy_filter(coords, candidates, k: int, t: float) -> list[tuple[int, int]]:
    """Keep candidate edges not already covered within t under <= k faults."""
    coords = np.asarray(coords, dtype=float)
    lengths = [float(np.linalg.norm(coords[i] - coords[j])) for i, j in candidates]
    order = sorted(range(len(candidates)), key=lambda e: (lengths[e], candidates[e]))
    adj = [[] for _ in range(len(coords))]
    kept = []
    for e in order:
        i, j = candidates[e]
        if fault_tolerant_path(adj, i, j, t * lengths[e], k):
            continue
        adj[i].append((j, lengths[e]))
        adj[j].append((i, lengths[e]))
        kept.append((i, j))
    return sorted(kept)


def base_edges(coords, k: int, t_b: float) -> list[tuple[int, int]]:
    """Sorted edge list of a (k, t_b) vertex-fault-tolerant spanner on ``coords``."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    if coords.shape[1] == 1:
        return cone_edges(coords, k, t_b)
    if not t_b > 1:
        raise InvalidArgument(f"base stretch must exceed 1, got {t_b}")
    t_c = math.sqrt(t_b)
    return greedy_filter(coords, cone_edges(coords, k, t_c), k, t_b / t_c)


def build_base_vfts(centers, k: int, t_b: float) -> Spanner:
    """Base spanner over ``centers`` (indexed by position), lengths |uv|."""
    if len(centers) < 1:
        raise InvalidArgument("need at least one point")
    coords = np.array([c.coords for c in centers], dtype=float).reshape(len(centers), -1)
    sp = Spanner(len(centers))
    for i, j in base_edges(coords, k, t_b):
        sp.add_edge(i, j, float(np.linalg.norm(coords[i] - coords[j])), "base")
    return sp
