"""Weight-sorted clustering spanner for additively weighted points in R^d."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base_vfts import base_edges
from .metric import InvalidArgument, Spanner
from .trace import BuildLog


@dataclass
class Cluster:
    center: int
    members: list  # insertion order, center first


@dataclass
class Clustering:
    clusters: list
    assignment: list
    epsilon: float

    @property
    def centers(self) -> list:
        return [c.center for c in self.clusters]

    def is_center(self, p: int) -> bool:
        return self.clusters[self.assignment[p]].center == p

    def center_of(self, p: int) -> int:
        return self.clusters[self.assignment[p]].center


def _arrays(points):
    coords = np.array([p.coords for p in points], dtype=float).reshape(len(points), -1)
    weights = np.array([p.weight for p in points], dtype=float)
    return coords, weights


def _check_args(k, epsilon):
    if not (0 < epsilon <= 1):
        raise InvalidArgument(f"epsilon must be in (0, 1], got {epsilon}")
    if k < 1:
        raise InvalidArgument(f"k must be >= 1, got {k}")


def cluster_arrays(coords, weights, k: int, epsilon: float) -> Clustering:
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon}")
    coords = np.asarray(coords, dtype=float)
    n = len(coords)
    if n < 1:
        raise InvalidArgument("need at least one point")
    order = sorted(range(n), key=lambda i: (weights[i], i))
    seeds = min(k + 1, n)
    clusters: list = []
    assignment = [-1] * n
    center_xy = np.empty((n, coords.shape[1]))
    for pos, p in enumerate(order):
        if pos >= seeds:
            dist = np.sqrt(((center_xy[:len(clusters)] - coords[p]) ** 2).sum(axis=1))
            j = int(np.argmin(dist))
            if dist[j] <= epsilon * weights[p]:
                clusters[j].members.append(p)
                assignment[p] = j
                continue
        center_xy[len(clusters)] = coords[p]
        assignment[p] = len(clusters)
        clusters.append(Cluster(p, [p]))
    return Clustering(clusters, assignment, epsilon)


def cluster_points(points, k: int, epsilon: float) -> Clustering:
    coords, weights = _arrays(points)
    return cluster_arrays(coords, weights, k, epsilon)


def clustering_violations(coords, weights, clustering: Clustering) -> tuple[int, int]:
    """(admission-rule violations, non-minimum-weight centers)."""
    coords = np.asarray(coords, dtype=float)
    admission = 0
    center = 0
    eps = clustering.epsilon
    for cl in clustering.clusters:
        c = cl.center
        for p in cl.members:
            if p == c:
                continue
            d = float(np.linalg.norm(coords[p] - coords[c]))
            if d > eps * weights[p] * (1 + 1e-9) + 1e-12:
                admission += 1
        if any(weights[m] < weights[c] for m in cl.members):
            center += 1
    return admission, center


def build_rd_arrays(coords, weights, k: int, epsilon: float, log: BuildLog | None = None,
                    label: str = "rd") -> tuple[Spanner, Clustering]:
    """Spanner over local indices 0..n-1 with additive Euclidean lengths."""
    _check_args(k, epsilon)
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    weights = np.asarray(weights, dtype=float)
    n = len(coords)
    cl = cluster_arrays(coords, weights, k, epsilon)
    if log is not None:
        adm, cen = clustering_violations(coords, weights, cl)
        log.add("clustering", adm == 0 and cen == 0, level=label, n=n,
                clusters=len(cl.clusters), admission_violations=adm, center_violations=cen)

    def dw(a, b):
        return float(np.linalg.norm(coords[a] - coords[b]) + (weights[a] + weights[b]))

    sp = Spanner(n)
    centers = cl.centers
    hub = {c: set() for c in centers}
    for a, b in base_edges(coords[centers], k, 2 + epsilon):
        u, v = centers[a], centers[b]
        sp.add_edge(u, v, dw(u, v), "base")
        hub[u].add(v)
        hub[v].add(u)
    for p in range(n):
        if cl.is_center(p):
            continue
        members = cl.clusters[cl.assignment[p]].members
        for v in members[:k + 1]:
            sp.add_edge(p, v, dw(p, v), "intra-cluster")
        for v in sorted(hub[cl.center_of(p)]):
            sp.add_edge(p, v, dw(p, v), "center-neighbor")
    return sp, cl


def build_vftaws_rd(points, k: int, epsilon: float, log: BuildLog | None = None) -> Spanner:
    coords, weights = _arrays(points)
    sp, _ = build_rd_arrays(coords, weights, k, epsilon, log)
    return sp


def stretch_budget_rd(epsilon: float) -> float:
    return (2 + epsilon) ** 2


def pair_case(clustering: Clustering):
    """Tagger for the eight same/different-cluster x faulty-center cases.

    1 both centers; 2 same cluster, one is the center; 3/4 same cluster,
    neither a center, center alive/faulty; 5 different clusters, neither
    a center, both centers alive; 6 different clusters, one is a center and
    the other's center is alive; 7 exactly one relevant center faulty;
    8 both centers faulty.
    """
    def tag(p, q, faults):
        cp, cq = clustering.is_center(p), clustering.is_center(q)
        if cp and cq:
            return 1
        if clustering.assignment[p] == clustering.assignment[q]:
            if cp or cq:
                return 2
            return 4 if clustering.center_of(p) in faults else 3
        if cq:
            p, q, cp, cq = q, p, cq, cp
        if cp:
            return 7 if clustering.center_of(q) in faults else 6
        dead = (clustering.center_of(p) in faults) + (clustering.center_of(q) in faults)
        return (5, 7, 8)[dead]
    return tag
