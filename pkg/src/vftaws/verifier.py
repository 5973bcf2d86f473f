"""Brute-force fault-set enumeration and stretch certification."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .metric import REL_TOL, InvalidArgument, Spanner, additive_matrix

DEFAULT_BUDGET = 10 ** 9


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"verification needs ~{required:.3g} steps, budget is {budget:.3g}")
        self.required = required
        self.budget = budget


@dataclass
class StretchReport:
    worst_stretch: float
    witness_fault_set: list
    witness_pair: tuple | None
    pairs_checked: int
    bound: float
    passed: bool
    fault_sets_checked: int = 0
    mode: str = "exhaustive"
    case_histogram: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        worst = self.worst_stretch
        return {
            "worst_stretch": worst if math.isfinite(worst) else "inf",
            "witness_fault_set": list(self.witness_fault_set),
            "witness_pair": list(self.witness_pair) if self.witness_pair else None,
            "pairs_checked": self.pairs_checked,
            "fault_sets_checked": self.fault_sets_checked,
            "bound": self.bound,
            "pass": self.passed,
            "mode": self.mode,
            "case_histogram": {str(k): v for k, v in sorted(self.case_histogram.items())},
        }


def edge_arrays(spanner: Spanner):
    items = sorted(spanner.edges.items())
    rows = np.array([i for (i, _), _ in items], dtype=np.int64)
    cols = np.array([j for (_, j), _ in items], dtype=np.int64)
    lens = np.array([ln for _, (ln, _) in items], dtype=float)
    return rows, cols, lens


def surviving_apsp(n, rows, cols, lens, faults) -> np.ndarray:
    """Dijkstra APSP on G minus ``faults``; rows/cols of faulty vertices are inf."""
    dead = np.zeros(n, dtype=bool)
    dead[list(faults)] = True
    keep = ~(dead[rows] | dead[cols])
    g = csr_matrix((lens[keep], (rows[keep], cols[keep])), shape=(n, n))
    out = np.full((n, n), np.inf)
    alive = np.flatnonzero(~dead)
    if len(alive):
        d = dijkstra(g, directed=False, indices=alive)
        out[np.ix_(alive, np.arange(n))] = d
        out[:, dead] = np.inf
    return out


def bellman_ford_apsp(n, rows, cols, lens, faults) -> np.ndarray:
    """Independent APSP by edge relaxation, all sources at once."""
    dead = set(faults)
    d = np.full((n, n), np.inf)
    for v in range(n):
        if v not in dead:
            d[v, v] = 0.0
    edges = [(int(u), int(v), float(ln)) for u, v, ln in zip(rows, cols, lens)
             if u not in dead and v not in dead]
    for _ in range(max(n - 1, 1)):
        changed = False
        for u, v, ln in edges:
            cand = d[:, u] + ln
            better = cand < d[:, v]
            if better.any():
                d[better, v] = cand[better]
                changed = True
            cand = d[:, v] + ln
            better = cand < d[:, u]
            if better.any():
                d[better, u] = cand[better]
                changed = True
        if not changed:
            break
    return d


def fault_sets(n: int, k: int):
    if n >= k + 2:
        yield from itertools.combinations(range(n), k)
        return
    for size in range(0, min(k, n - 2) + 1):
        yield from itertools.combinations(range(n), size)


def fault_set_count(n: int, k: int) -> int:
    if n >= k + 2:
        return math.comb(n, k)
    return sum(math.comb(n, s) for s in range(0, min(k, n - 2) + 1))


def _evaluate(n, rows, cols, lens, dw, faults, tagger, hist):
    g = surviving_apsp(n, rows, cols, lens, faults)
    alive = np.ones(n, dtype=bool)
    alive[list(faults)] = False
    iu, ju = np.triu_indices(n, 1)
    sel = alive[iu] & alive[ju]
    iu, ju = iu[sel], ju[sel]
    gd, wd = g[iu, ju], dw[iu, ju]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(wd > 0, gd / np.where(wd > 0, wd, 1.0), np.where(gd == 0, 1.0, np.inf))
    if tagger is not None:
        fs = set(faults)
        for a, b, r in zip(iu.tolist(), ju.tolist(), ratio.tolist()):
            t = tagger(a, b, fs)
            cnt, worst = hist.get(t, (0, 0.0))
            hist[t] = (cnt + 1, max(worst, r))
    if len(ratio) == 0:
        return 0.0, None, 0
    m = int(np.argmax(ratio))
    return float(ratio[m]), (int(iu[m]), int(ju[m])), len(ratio)


def _run(points, oracle, spanner, k, bound, sets, tagger, threads, mode):
    n = len(points)
    if n < 2:
        raise InvalidArgument("verification needs at least 2 points")
    if spanner.n != n:
        raise InvalidArgument(f"spanner has {spanner.n} vertices, instance has {n}")
    dw = additive_matrix(points, oracle)
    rows, cols, lens = edge_arrays(spanner)
    sets = list(sets)

    def chunk(lo, hi):
        best = (-1.0, None, None)
        pairs = 0
        hist: dict = {}
        for idx in range(lo, hi):
            r, pair, cnt = _evaluate(n, rows, cols, lens, dw, sets[idx], tagger, hist)
            pairs += cnt
            if r > best[0]:
                best = (r, pair, idx)
        return best, pairs, hist

    threads = max(1, int(threads))
    if threads == 1 or tagger is not None or len(sets) < 2 * threads:
        results = [chunk(0, len(sets))]
    else:
        bounds = np.linspace(0, len(sets), threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(lambda ab: chunk(*ab), zip(bounds[:-1], bounds[1:])))
    worst, pair, idx = -1.0, None, None
    pairs = 0
    hist: dict = {}
    for (r, p, i), cnt, h in results:
        pairs += cnt
        if r > worst:
            worst, pair, idx = r, p, i
        for t, (c, w) in h.items():
            c0, w0 = hist.get(t, (0, 0.0))
            hist[t] = (c0 + c, max(w0, w))
    worst = max(worst, 0.0)
    witness = list(sets[idx]) if idx is not None else []
    passed = worst <= bound * (1 + REL_TOL)
    histogram = {t: {"pairs": c, "worst": w} for t, (c, w) in sorted(hist.items())}
    return StretchReport(worst, witness, pair, pairs, bound, passed, len(sets), mode, histogram)


def verify_stretch(points, oracle, spanner: Spanner, k: int, bound: float,
                   budget: float = DEFAULT_BUDGET, tagger=None, threads: int = 1) -> StretchReport:
    n = len(points)
    required = fault_set_count(n, k) * n * n * max(len(spanner), 1)
    if required > budget:
        raise BudgetExceeded(required, int(budget))
    return _run(points, oracle, spanner, k, bound, fault_sets(n, k), tagger, threads, "exhaustive")


def worst_stretch_sampled(points, oracle, spanner: Spanner, k: int, samples: int, seed: int,
                          bound: float = math.inf, tagger=None, threads: int = 1) -> StretchReport:
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    n = len(points)
    rng = np.random.default_rng(seed)
    size = min(k, n - 2)
    sets = [tuple(sorted(int(x) for x in rng.choice(n, size=size, replace=False)))
            for _ in range(samples)]
    return _run(points, oracle, spanner, k, bound, sets, tagger, threads, "sampled")


def recheck_witness(points, oracle, spanner: Spanner, report: StretchReport) -> float:
    """Re-evaluate the stretch of the witness pair under the witness fault set."""
    if report.witness_pair is None:
        return 0.0
    rows, cols, lens = edge_arrays(spanner)
    g = bellman_ford_apsp(len(points), rows, cols, lens, report.witness_fault_set)
    a, b = report.witness_pair
    dw = additive_matrix(points, oracle)[a, b]
    if dw == 0:
        return 1.0 if g[a, b] == 0 else math.inf
    return float(g[a, b] / dw)


def edge_audit(spanner: Spanner, n: int, k: int, epsilon: float, setting: str, h: int = 0) -> dict:
    return {
        "count": len(spanner),
        "per_provenance": spanner.provenance_counts(),
        "row": {"setting": setting, "n": n, "k": k, "epsilon": epsilon, "h": h,
                "edges": len(spanner)},
    }


def loglog_slope(xs, ys) -> float:
    xs, ys = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(xs, ys, 1)[0])
