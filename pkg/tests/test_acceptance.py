"""Acceptance criteria, each at its stated tolerance; one summary line per criterion."""
import json
import math
import time

import numpy as np
import pytest

from vftaws.cli import main
from vftaws.cluster import build_vftaws_rd, cluster_points, stretch_budget_rd, pair_case
from vftaws.domain import DomainGeodesic, build_vftaws_domain
from vftaws.generators import (domain_instance, euclidean_instance, polygon_instance,
                               random_simple_polygon, sample_inside, terrain_instance)
from vftaws.geometry import SimplePolygon
from vftaws.metric import EuclideanOracle, audit_metric_axioms, make_points
from vftaws.polygon_geodesic import PolygonGeodesic, geodesic_distance, visibility_graph_distance
from vftaws.polygon_vftaws import build_vftaws_polygon, polygon_bound
from vftaws.terrain import MeshGeodesic, build_vftaws_terrain
from vftaws.trace import BuildLog
from vftaws.verifier import loglog_slope, verify_stretch


def worst_line(reports):
    worst = max(reports, key=lambda r: r.worst_stretch / r.bound)
    return f"worst {worst.worst_stretch:.3f} vs bound {worst.bound:.2f}"


@pytest.fixture(scope="module")
def rd_runs():
    t0 = time.perf_counter()
    runs = []
    for seed in range(30):
        rng = np.random.default_rng(seed)
        xy = rng.uniform(0, 10, (25, 2))
        w = rng.uniform(0, 10, 25)
        for weights in (w, np.zeros(25)):
            pts = make_points(xy, weights)
            orc = EuclideanOracle(pts)
            for k in (1, 2):
                for eps in (0.5, 1.0):
                    log = BuildLog()
                    sp = build_vftaws_rd(pts, k, eps, log)
                    tag = pair_case(cluster_points(pts, k, eps))
                    rep = verify_stretch(pts, orc, sp, k, stretch_budget_rd(eps), tagger=tag)
                    runs.append((rep, log))
    return runs, time.perf_counter() - t0


@pytest.fixture(scope="module")
def polygon_runs():
    t0 = time.perf_counter()
    runs = []
    for seed in range(15):
        nv = int(np.random.default_rng(seed).integers(20, 41))
        poly, pts = polygon_instance(15, nv, seed)
        assert not poly.is_convex() and 20 <= len(poly) <= 40
        orc = PolygonGeodesic(poly, pts)
        for eps in (0.5, 1.0):
            for refined in (True, False):
                log = BuildLog()
                sp = build_vftaws_polygon(poly, pts, 1, eps, refined, log, orc)
                runs.append((verify_stretch(pts, orc, sp, 1, polygon_bound(eps, refined)), log))
    return runs, time.perf_counter() - t0


@pytest.fixture(scope="module")
def domain_runs():
    t0 = time.perf_counter()
    runs = []
    for seed in range(10):
        for h in (1, 2, 3):
            dom, pts = domain_instance(12, h, seed)
            orc = DomainGeodesic(dom, pts)
            log = BuildLog()
            sp = build_vftaws_domain(dom, pts, 1, 0.5, log, orc)
            runs.append((verify_stretch(pts, orc, sp, 1, 11.0), log))
    return runs, time.perf_counter() - t0


@pytest.fixture(scope="module")
def terrain_runs():
    t0 = time.perf_counter()
    runs = []
    for seed in range(10):
        mesh, pts = terrain_instance(12, 8, seed)
        orc = MeshGeodesic(mesh, pts, 3)
        log = BuildLog()
        sp = build_vftaws_terrain(mesh, pts, 1, 0.5, 3, log, orc)
        runs.append((verify_stretch(pts, orc, sp, 1, 11.0), log))
    return runs, time.perf_counter() - t0


@pytest.mark.criterion(1, "R^d stretch, exhaustive, bound (2+eps)^2, under 10 min")
def test_rd_stretch(rd_runs, record_property):
    runs, secs = rd_runs
    reps = [r for r, _ in runs]
    cases = set()
    for r in reps:
        cases |= {c for c, v in r.case_histogram.items() if v["pairs"]}
    record_property("detail", f"{len(reps)} builds, {worst_line(reps)}, cases {sorted(cases)}, {secs:.0f}s")
    assert all(r.passed for r in reps)
    assert cases == set(range(1, 9))
    assert secs < 600


@pytest.mark.criterion(2, "simple polygon stretch, refined 4+14eps and unrefined 3(4+5eps), under 15 min")
def test_polygon_stretch(polygon_runs, record_property):
    runs, secs = polygon_runs
    reps = [r for r, _ in runs]
    record_property("detail", f"{len(reps)} builds, {worst_line(reps)}, {secs:.0f}s")
    assert all(r.passed for r in reps)
    assert secs < 900


@pytest.mark.criterion(3, "polygonal domain stretch, bound 11, under 20 min")
def test_domain_stretch(domain_runs, record_property):
    runs, secs = domain_runs
    reps = [r for r, _ in runs]
    record_property("detail", f"{len(reps)} builds, {worst_line(reps)}, {secs:.0f}s")
    assert all(r.passed for r in reps)
    assert secs < 1200


@pytest.mark.criterion(4, "terrain stretch against the mesh oracle, bound 11, under 20 min")
def test_terrain_stretch(terrain_runs, record_property):
    runs, secs = terrain_runs
    reps = [r for r, _ in runs]
    record_property("detail", f"{len(reps)} builds, {worst_line(reps)}, {secs:.0f}s")
    assert all(r.passed for r in reps)
    assert secs < 1200


@pytest.mark.criterion(5, "edge scaling: slope <= 1.15 in n, ratio per doubling of k in [1.3, 2.7]")
def test_edge_scaling(record_property):
    ns = [100, 200, 400, 800, 1600, 3200]
    edges = [len(build_vftaws_rd(euclidean_instance(n, 0), 1, 0.5)) for n in ns]
    slope = loglog_slope(ns, edges)
    pts = euclidean_instance(800, 0)
    by_k = [len(build_vftaws_rd(pts, k, 0.5)) for k in (1, 2, 4)]
    ratios = [by_k[1] / by_k[0], by_k[2] / by_k[1]]
    record_property("detail", f"slope {slope:.3f}, k ratios {ratios[0]:.2f} {ratios[1]:.2f}")
    assert slope <= 1.15
    assert all(1.3 <= r <= 2.7 for r in ratios)


@pytest.mark.criterion(6, "funnel and visibility graph agree to 1e-9; convex is straight-line exactly")
def test_geodesic_equivalence(record_property):
    worst = 0.0
    for seed in range(10):
        rng = np.random.default_rng(1000 + seed)
        poly = random_simple_polygon(int(rng.integers(10, 41)), rng)
        pts = sample_inside(lambda p: poly.contains([p])[0], poly.bbox, 200, rng)
        for a, b in zip(pts[::2], pts[1::2]):
            ref = visibility_graph_distance(poly, a, b)
            worst = max(worst, abs(geodesic_distance(poly, a, b)[0] - ref) / max(ref, 1e-300))
    hexagon = SimplePolygon([(0, 0), (6, -1), (10, 2), (9, 8), (3, 9), (-1, 5)])
    rng = np.random.default_rng(7)
    qs = sample_inside(lambda p: hexagon.contains([p])[0], hexagon.bbox, 200, rng)
    exact = all(geodesic_distance(hexagon, a, b)[0] == math.hypot(*(a - b)) for a, b in zip(qs[::2], qs[1::2]))
    record_property("detail", f"max relative gap {worst:.2e}, convex exact {exact}")
    assert worst <= 1e-9
    assert exact


@pytest.mark.criterion(7, "structural invariants on every recursion level of criteria 2-4 builds")
def test_structural_invariants(rd_runs, polygon_runs, domain_runs, terrain_runs, record_property):
    counts = {}
    bad = []
    for runs, _ in (rd_runs, polygon_runs, domain_runs, terrain_runs):
        for _, log in runs:
            for kind, s in log.summary().items():
                tot, vio = counts.get(kind, (0, 0))
                counts[kind] = (tot + s["levels"], vio + s["violations"])
            bad += log.violations()
    record_property("detail", ", ".join(f"{k} {t} levels/{v} bad" for k, (t, v) in sorted(counts.items())))
    for kind in ("split", "separator", "sp-separator", "clustering", "decomposition"):
        assert counts.get(kind, (0, 0))[0] > 0, kind
    assert bad == []


@pytest.mark.criterion(8, "metric axioms for all four oracles, exhaustive, 5 instances each")
def test_metric_axioms(record_property):
    checked = 0
    for seed in range(5):
        pts = euclidean_instance(30, seed)
        oracles = [(pts, EuclideanOracle(pts))]
        poly, pp = polygon_instance(30, 30, seed)
        oracles.append((pp, PolygonGeodesic(poly, pp)))
        dom, dp = domain_instance(30, 2, seed)
        oracles.append((dp, DomainGeodesic(dom, dp)))
        mesh, tp = terrain_instance(30, 8, seed)
        oracles.append((tp, MeshGeodesic(mesh, tp, 3)))
        for p, orc in oracles:
            audit = audit_metric_axioms(p, orc)
            assert audit.ok, (type(orc).__name__, seed, audit)
            checked += audit.triples_checked
    record_property("detail", f"{checked} ordered triples")


@pytest.mark.criterion(9, "determinism: re-runs with the same seed give byte-identical files")
def test_determinism(tmp_path, record_property):
    def run_all(tag):
        d = tmp_path / tag
        d.mkdir()
        for s in ("euclidean", "polygon", "domain", "terrain"):
            inst, sp = d / f"{s}.json", d / f"{s}.sp.json"
            assert main(["gen", "--setting", s, "--n", "8", "--seed", "3", "--h", "1",
                         "--grid", "5", "--out", str(inst)]) == 0
            assert main(["build", str(inst), "--out", str(sp), "--dot", str(d / f"{s}.dot"),
                         "--csv", str(d / f"{s}.csv")]) == 0
            assert main(["verify", str(inst), str(sp), "--out", str(d / f"{s}.rep.json")]) == 0
            assert main(["verify", str(inst), str(sp), "--samples", "5", "--seed", "2",
                         "--out", str(d / f"{s}.smp.json")]) == 0
            assert main(["stats", str(inst), str(sp), "--out", str(d / f"{s}.stats.json")]) == 0
        assert main(["bench", "--ns", "20,40", "--out", str(d / "bench.csv"),
                     "--fit-out", str(d / "fit.json")]) == 0
        return d

    a, b = run_all("a"), run_all("b")
    files = sorted(p.name for p in a.iterdir())
    same = [f for f in files if (a / f).read_bytes() == (b / f).read_bytes()]
    record_property("detail", f"{len(same)}/{len(files)} files identical")
    assert same == files
    assert json.loads((a / "euclidean.rep.json").read_text())["pass"] is True
