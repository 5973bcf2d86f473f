"""Weighted points, additive distances and the spanner graph container."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

REL_TOL = 1e-9
GEOM_EPS = 1e-12


class InvalidArgument(ValueError):
    pass


class InvalidGeometry(ValueError):
    pass


@dataclass(frozen=True)
class WeightedPoint:
    id: int
    coords: tuple[float, ...]
    weight: float = 0.0

    def __post_init__(self):
        if not self.weight >= 0:
            raise InvalidArgument(f"point {self.id}: weight must be >= 0, got {self.weight}")


def make_points(coords, weights=None) -> list[WeightedPoint]:
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    if weights is None:
        weights = np.zeros(len(coords))
    return [WeightedPoint(i, tuple(float(c) for c in row), float(w))
            for i, (row, w) in enumerate(zip(coords, weights))]


def check_ids(points) -> None:
    for i, p in enumerate(points):
        if p.id != i:
            raise InvalidArgument(f"point ids must be contiguous 0..n-1 (position {i} has id {p.id})")


class MetricOracle:
    """Base distance between point ids of one instance.

    Subclasses fill ``self.n`` and implement ``base_distance``. The full
    matrix is computed lazily and cached.
    """

    n: int = 0
    _matrix: np.ndarray | None = None

    def base_distance(self, a: int, b: int) -> float:
        raise NotImplementedError

    def check_id(self, a: int) -> None:
        if not (0 <= a < self.n):
            raise InvalidArgument(f"point id {a} out of range 0..{self.n - 1}")

    def distance_matrix(self) -> np.ndarray:
        if self._matrix is None:
            m = np.zeros((self.n, self.n))
            for i in range(self.n):
                for j in range(i + 1, self.n):
                    m[i, j] = m[j, i] = self.base_distance(i, j)
            self._matrix = m
        return self._matrix


class EuclideanOracle(MetricOracle):
    def __init__(self, points):
        self.points = list(points)
        self.n = len(self.points)
        self.coords = np.array([p.coords for p in self.points], dtype=float).reshape(self.n, -1)

    def base_distance(self, a, b):
        self.check_id(a)
        self.check_id(b)
        # same formula as distance_matrix, so scalar and batched values agree bitwise
        return float(np.sqrt(((self.coords[a] - self.coords[b]) ** 2).sum()))

    def distance_matrix(self):
        if self._matrix is None:
            diff = self.coords[:, None, :] - self.coords[None, :, :]
            self._matrix = np.sqrt((diff ** 2).sum(axis=2))
        return self._matrix

    def path(self, a, b):
        return [tuple(self.coords[a]), tuple(self.coords[b])]


class SegmentMetric(EuclideanOracle):
    """One-dimensional distance along a chord or path, by scalar position."""

    def __init__(self, positions):
        pts = [WeightedPoint(i, (float(x),), 0.0) for i, x in enumerate(positions)]
        super().__init__(pts)


def additive_distance(p: WeightedPoint, q: WeightedPoint, oracle: MetricOracle) -> float:
    oracle.check_id(p.id)
    oracle.check_id(q.id)
    if p.id == q.id:
        return 0.0
    # one summation order everywhere keeps d_w bitwise symmetric
    return oracle.base_distance(p.id, q.id) + (p.weight + q.weight)


def additive_matrix(points, oracle: MetricOracle) -> np.ndarray:
    w = np.array([p.weight for p in points], dtype=float)
    m = oracle.distance_matrix() + (w[:, None] + w[None, :])
    np.fill_diagonal(m, 0.0)
    return m


@dataclass
class AxiomAudit:
    ok: bool
    worst_slack: float
    witness: tuple | None = None
    triples_checked: int = 0


def audit_metric_axioms(points, oracle: MetricOracle, sample_count: int = 20000,
                        seed: int = 0) -> AxiomAudit:
    """Check symmetry and the triangle inequality of d_w.

    Exhaustive when n <= 30, otherwise ``sample_count`` random triples.
    ``worst_slack`` is min over triples of d(p,r)+d(r,q)-d(p,q), relative to
    the largest distance; negative beyond tolerance means a violation.
    """
    n = len(points)
    if n < 3:
        return AxiomAudit(True, 0.0)
    d = np.array([[additive_distance(p, q, oracle) for q in points] for p in points])
    scale = max(float(d.max()), 1.0)
    asym = np.abs(d - d.T)
    if asym.max() > REL_TOL * scale:
        i, j = np.unravel_index(int(asym.argmax()), asym.shape)
        return AxiomAudit(False, -float(asym.max()) / scale, ("asymmetric", int(i), int(j)), 0)
    if n <= 30:
        # slack[p, r, q] = d[p, r] + d[r, q] - d[p, q]
        slack = d[:, :, None] + d[None, :, :] - d[:, None, :]
        idx = np.arange(n)
        slack[idx, idx, :] = np.inf
        slack[:, idx, idx] = np.inf
        worst = float(slack.min())
        p, r, q = np.unravel_index(int(slack.argmin()), slack.shape)
        checked = n * (n - 1) * (n - 2) + n * (n - 1)
    else:
        rng = np.random.default_rng(seed)
        tri = rng.integers(0, n, size=(sample_count, 3))
        tri = tri[(tri[:, 0] != tri[:, 1]) & (tri[:, 1] != tri[:, 2])]
        s = d[tri[:, 0], tri[:, 1]] + d[tri[:, 1], tri[:, 2]] - d[tri[:, 0], tri[:, 2]]
        k = int(s.argmin())
        worst = float(s[k])
        p, r, q = tri[k]
        checked = len(tri)
    ok = worst >= -REL_TOL * scale
    return AxiomAudit(ok, worst / scale, (int(p), int(r), int(q)), checked)


@dataclass
class Spanner:
    """Undirected graph over point ids; each edge stores its length and provenance."""

    n: int
    edges: dict = field(default_factory=dict)

    def add_edge(self, i: int, j: int, length: float, provenance: str) -> bool:
        if i == j:
            return False
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise InvalidArgument(f"edge ({i}, {j}) out of range for n={self.n}")
        key = (i, j) if i < j else (j, i)
        if key in self.edges:
            return False
        self.edges[key] = (float(length), provenance)
        return True

    def has_edge(self, i, j) -> bool:
        return ((i, j) if i < j else (j, i)) in self.edges

    def __len__(self):
        return len(self.edges)

    def sorted_edges(self):
        return [(i, j, ln, prov) for (i, j), (ln, prov) in sorted(self.edges.items())]

    def adjacency(self) -> list[set]:
        adj = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def neighbors(self, v: int) -> set:
        if not (0 <= v < self.n):
            raise InvalidArgument(f"vertex {v} out of range for n={self.n}")
        return {j if i == v else i for (i, j) in self.edges if v in (i, j)}

    def provenance_counts(self) -> dict:
        counts: dict = {}
        for _, prov in self.edges.values():
            tag = prov.split(":")[0]
            counts[tag] = counts.get(tag, 0) + 1
        return dict(sorted(counts.items()))

    def merge(self, other: "Spanner") -> None:
        for (i, j), (ln, prov) in sorted(other.edges.items()):
            self.add_edge(i, j, ln, prov)


def neighbors(spanner: Spanner, v: int) -> set:
    return spanner.neighbors(v)


def complete_spanner(points, oracle, provenance="complete", ids=None) -> Spanner:
    """Complete graph on ``ids`` (default all points) with d_w lengths."""
    sp = Spanner(len(points))
    ids = range(len(points)) if ids is None else ids
    for i, j in itertools.combinations(sorted(ids), 2):
        sp.add_edge(i, j, additive_distance(points[i], points[j], oracle), provenance)
    return sp
