"""Segment visibility in polygonal regions and visibility-graph shortest paths."""
from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .geometry import signed_area


class Region:
    """Closed free space: an outer ring minus the open interiors of holes."""

    def __init__(self, outer, holes=()):
        outer = np.asarray(outer, dtype=float)
        if signed_area(outer) < 0:
            outer = outer[::-1]
        hs = []
        for h in holes:
            h = np.asarray(h, dtype=float)
            hs.append(h[::-1] if signed_area(h) < 0 else h)  # holes stored CCW
        self.outer = outer
        self.holes = hs
        self.rings = [outer] + hs
        self.ea = np.vstack([r for r in self.rings])
        self.eb = np.vstack([np.roll(r, -1, axis=0) for r in self.rings])
        lo, hi = outer.min(axis=0), outer.max(axis=0)
        self.diam = float(np.linalg.norm(hi - lo))
        self.tol = 1e-10 * self.diam
        self._len2 = ((self.eb - self.ea) ** 2).sum(axis=1)

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        # holes are disjoint and inside the outer ring, so even-odd over all
        # edges at once gives membership in the free space
        ea, eb = self.ea, self.eb
        px, py = pts[:, 0:1], pts[:, 1:2]
        straddle = (ea[:, 1] > py) != (eb[:, 1] > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ea[:, 0] + (py - ea[:, 1]) * (eb[:, 0] - ea[:, 0]) / (eb[:, 1] - ea[:, 1])
        inside = ((straddle & (px < xint)).sum(axis=1) % 2) == 1
        ab = eb - ea
        den = np.where(self._len2 == 0, 1.0, self._len2)
        rel = pts[:, None, :] - ea[None]
        t = np.clip((rel * ab[None]).sum(axis=2) / den[None], 0, 1)
        gap = rel - t[:, :, None] * ab[None]
        near = ((gap ** 2).sum(axis=2)).min(axis=1) <= self.tol ** 2
        return inside | near

    def reflex_vertices(self) -> np.ndarray:
        out = []
        o = self.outer
        n = len(o)
        for i in range(n):
            if _cross(o[i - 1], o[i], o[(i + 1) % n]) < 0:
                out.append(o[i])
        for h in self.holes:
            m = len(h)
            for i in range(m):
                # a convex corner of a hole is a reflex corner of the free space
                if _cross(h[i - 1], h[i], h[(i + 1) % m]) > 0:
                    out.append(h[i])
        return np.array(out).reshape(-1, 2)

    def visible(self, a, b) -> np.ndarray:
        """Whether each closed segment a[i]b[i] lies in the free space."""
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_2d(np.asarray(b, dtype=float))
        a, b = np.broadcast_arrays(a, b)
        ea, eb = self.ea, self.eb
        ab = b - a
        length = np.sqrt((ab ** 2).sum(axis=1))
        ctol = 1e-12 * self.diam

        def orient(p, q, r):
            return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) \
                - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

        A, B = a[:, None, :], b[:, None, :]
        o1 = orient(A, B, ea[None]) / np.maximum(length[:, None], 1e-300)
        o2 = orient(A, B, eb[None]) / np.maximum(length[:, None], 1e-300)
        elen = np.sqrt(((eb - ea) ** 2).sum(axis=1))[None]
        o3 = orient(ea[None], eb[None], A) / elen
        o4 = orient(ea[None], eb[None], B) / elen
        proper = (((o1 > ctol) & (o2 < -ctol)) | ((o1 < -ctol) & (o2 > ctol))) & \
                 (((o3 > ctol) & (o4 < -ctol)) | ((o3 < -ctol) & (o4 > ctol)))
        ok = ~proper.any(axis=1)
        ok &= self.contains((a + b) / 2)
        # segments grazing a vertex in their interior: test every sub-piece
        t = ((ea[None] - A) * ab[:, None, :]).sum(axis=2) / np.maximum(length ** 2, 1e-300)[:, None]
        graze = (np.abs(o1) <= self.tol) & (t > 1e-9) & (t < 1 - 1e-9)
        for i in np.flatnonzero(ok & graze.any(axis=1)):
            ts = np.concatenate(([0.0], np.sort(t[i, graze[i]]), [1.0]))
            mids = a[i] + ((ts[:-1] + ts[1:]) / 2)[:, None] * ab[i]
            ok[i] = bool(self.contains(mids).all())
        return ok


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


class VisibilityEngine:
    """Exact geodesic distances via the visibility graph on reflex corners."""

    def __init__(self, region: Region):
        self.region = region
        self.nodes = region.reflex_vertices()
        r = len(self.nodes)
        if r:
            ii, jj = np.triu_indices(r, 1)
            vis = region.visible(self.nodes[ii], self.nodes[jj])
            w = np.zeros((r, r))
            d = np.sqrt(((self.nodes[ii] - self.nodes[jj]) ** 2).sum(axis=1))
            w[ii[vis], jj[vis]] = d[vis]
            w[jj[vis], ii[vis]] = d[vis]
            self.apsp = shortest_path(w, method="D", directed=False)
        else:
            self.apsp = np.zeros((0, 0))

    def to_nodes(self, p) -> np.ndarray:
        """Geodesic distance from p to every reflex corner."""
        p = np.asarray(p, dtype=float)
        r = len(self.nodes)
        if r == 0:
            return np.zeros(0)
        vis = self.region.visible(np.repeat(p[None], r, axis=0), self.nodes)
        direct = np.where(vis, np.sqrt(((self.nodes - p) ** 2).sum(axis=1)), np.inf)
        return (direct[:, None] + self.apsp).min(axis=0)

    def distances(self, p, targets, p_nodes=None, tv=None) -> np.ndarray:
        """Geodesic distances from p to many target points."""
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        p = np.asarray(p, dtype=float)
        direct_vis = self.region.visible(np.repeat(p[None], len(targets), axis=0), targets)
        out = np.where(direct_vis, np.sqrt(((targets - p) ** 2).sum(axis=1)), np.inf)
        r = len(self.nodes)
        if r:
            dp = self.to_nodes(p) if p_nodes is None else p_nodes
            tv = self.target_visibility(targets) if tv is None else tv
            via = np.where(tv, dp[None, :] + np.sqrt(((targets[:, None, :] - self.nodes[None]) ** 2).sum(axis=2)), np.inf)
            out = np.minimum(out, via.min(axis=1))
        return out

    def target_visibility(self, targets) -> np.ndarray:
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        r = len(self.nodes)
        m = len(targets)
        vis = self.region.visible(np.repeat(targets, r, axis=0), np.tile(self.nodes, (m, 1)))
        return vis.reshape(m, r)

    def distance(self, a, b) -> float:
        return float(self.distances(a, [b])[0])
