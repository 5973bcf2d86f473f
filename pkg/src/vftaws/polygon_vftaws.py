"""Divide-and-conquer spanner for weighted points in a simple polygon."""
from __future__ import annotations

import numpy as np

from .cluster import _check_args, build_rd_arrays
from .geometry import SimplePolygon
from .metric import InvalidArgument, Spanner, additive_matrix
from .polygon_geodesic import (PolygonGeodesic, ProjectedPoint, chord_distance,
                               find_splitting_segment, refinement_from_distance, side_of)
from .trace import BuildLog


def polygon_bound(epsilon: float, refined: bool = True) -> float:
    return 4 + 14 * epsilon if refined else 3 * (4 + 5 * epsilon)


def chord_points(chord, coords, weights, ids, epsilon, refined) -> list[ProjectedPoint]:
    """Landing points of every id on the chord (one per id, or its refinement set)."""
    out = []
    for pid in ids:
        f = chord_distance(side_of(chord, pid), chord, coords[pid])
        if refined:
            out.extend(refinement_from_distance(f, epsilon, weights[pid], pid).chosen)
        else:
            y, d = f.minimize()
            out.append(ProjectedPoint(pid, chord.x, y, weights[pid] + d, d))
    return out


def lift_edges(chord_spanner: Spanner, ownership, dw) -> list[tuple[int, int, float]]:
    """Map chord-level edges to source pairs with their additive lengths."""
    seen = set()
    out = []
    for r, s in sorted(chord_spanner.edges):
        if r >= len(ownership) or s >= len(ownership):
            raise RuntimeError(f"chord vertex {max(r, s)} has no owner")
        p, q = ownership[r], ownership[s]
        if p == q:
            continue
        key = (min(p, q), max(p, q))
        if key not in seen:
            seen.add(key)
            out.append((key[0], key[1], float(dw[key])))
    return out


def span_chord(spanner, landing, dw, k, epsilon, log, label):
    ys = np.array([[pp.y] for pp in landing])
    ws = np.array([pp.weight for pp in landing])
    owners = [pp.source_id for pp in landing]
    # one faulty source removes all of its landing points
    per_owner = max(np.bincount(owners)) if owners else 1
    chord_sp, _ = build_rd_arrays(ys, ws, k * int(per_owner), epsilon, log, label)
    for p, q, length in lift_edges(chord_sp, owners, dw):
        spanner.add_edge(p, q, length, f"lifted:{label}")


def build_polygon_into(spanner, polygon, coords, weights, ids, dw, k, epsilon, refined,
                       log=None, prefix="p"):
    """Run the recursion for ``ids`` inside ``polygon`` and add lifted edges."""
    stack = [(polygon, list(ids), prefix)]
    while stack:
        poly, node_ids, label = stack.pop()
        if len(node_ids) <= 1:
            continue
        chord = find_splitting_segment(poly, coords[node_ids], node_ids, log, label)
        landing = chord_points(chord, coords, weights, node_ids, epsilon, refined)
        span_chord(spanner, landing, dw, k, epsilon, log, label)
        # right pushed first so the left subtree is expanded first
        stack.append((chord.right, chord.right_ids, label + ".1"))
        stack.append((chord.left, chord.left_ids, label + ".0"))


def build_vftaws_polygon(polygon: SimplePolygon, points, k: int, epsilon: float,
                         refined: bool = True, log: BuildLog | None = None,
                         oracle: PolygonGeodesic | None = None) -> Spanner:
    _check_args(k, epsilon)
    coords = np.array([p.coords for p in points], dtype=float).reshape(len(points), 2)
    if len(points) and not polygon.contains(coords, closed=False).all():
        bad = int(np.flatnonzero(~polygon.contains(coords, closed=False))[0])
        raise InvalidArgument(f"point {bad} is not strictly inside the polygon")
    oracle = oracle or PolygonGeodesic(polygon, points)
    dw = additive_matrix(points, oracle)
    weights = np.array([p.weight for p in points], dtype=float)
    sp = Spanner(len(points))
    build_polygon_into(sp, polygon, coords, weights, range(len(points)), dw, k, epsilon, refined, log)
    return sp
