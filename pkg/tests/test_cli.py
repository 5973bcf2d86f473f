import csv
import io as stdio
import json

import numpy as np
import pytest

from vftaws import io
from vftaws.cli import bench_fit, bench_rows, main
from vftaws.domain import PolygonalDomain
from vftaws.generators import polygons_disjoint
from vftaws.geometry import SimplePolygon
from vftaws.metric import EuclideanOracle, complete_spanner


def run(*argv):
    return main([str(a) for a in argv])


def gen(tmp_path, setting, name=None, **kw):
    out = tmp_path / (name or f"{setting}.json")
    args = ["gen", "--setting", setting, "--out", out]
    for k, v in kw.items():
        args += [f"--{k.replace('_', '-')}", v]
    assert run(*args) == 0
    return out


def test_gen_deterministic(tmp_path):
    a = gen(tmp_path, "euclidean", "a.json", n=20, seed=7)
    b = gen(tmp_path, "euclidean", "b.json", n=20, seed=7)
    assert a.read_bytes() == b.read_bytes()


def test_gen_polygon_simple(tmp_path):
    doc = io.load_instance(gen(tmp_path, "polygon", n=10, vertices=25))
    poly = SimplePolygon(doc["polygon"])
    assert len(poly) == 25 and poly.self_intersection() is None


def test_gen_domain_holes(tmp_path):
    doc = io.load_instance(gen(tmp_path, "domain", n=10, h=3))
    outer, holes = doc["domain"]["outer"], doc["domain"]["holes"]
    assert len(holes) == 3
    dom = PolygonalDomain(outer, holes)
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        assert polygons_disjoint(holes[i], holes[j])
    assert all(dom.outer.contains(h.vertices, closed=False).all() for h in dom.holes)


def test_build_two_points(tmp_path):
    inst = gen(tmp_path, "euclidean", n=2)
    out = tmp_path / "sp.json"
    assert run("build", inst, "--out", out) == 0
    assert len(json.loads(out.read_text())["edges"]) == 1


def test_build_deterministic(tmp_path):
    for setting in ("euclidean", "polygon", "domain", "terrain"):
        inst = gen(tmp_path, setting, n=8, h=1, grid=5)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run("build", inst, "--out", a) == 0
        assert run("build", inst, "--out", b) == 0
        assert a.read_bytes() == b.read_bytes(), setting


def test_refined_and_unrefined_bounds(tmp_path):
    inst = gen(tmp_path, "polygon", n=8)
    a, b = tmp_path / "r.json", tmp_path / "u.json"
    run("build", inst, "--epsilon", 0.5, "--out", a)
    run("build", inst, "--epsilon", 0.5, "--no-refined", "--out", b)
    assert json.loads(a.read_text())["meta"]["bound"] == 4 + 14 * 0.5
    assert json.loads(b.read_text())["meta"]["bound"] == 3 * (4 + 5 * 0.5)


def test_verify_complete_graph(tmp_path, capsys):
    inst = gen(tmp_path, "euclidean", n=6)
    pts = io.points_from_json(io.load_instance(inst)["points"])
    sp = complete_spanner(pts, EuclideanOracle(pts))
    meta = {"setting": "euclidean", "k": 1, "epsilon": 0.5, "bound": 6.25, "n": 6}
    spf = tmp_path / "k6.json"
    io.write_json(spf, io.spanner_to_json(sp, meta))
    assert run("verify", inst, spf) == 0
    assert json.loads(capsys.readouterr().out)["worst_stretch"] == 1.0


def test_verify_drop_edge_and_budget(tmp_path, capsys):
    inst = gen(tmp_path, "euclidean", n=2)
    spf = tmp_path / "sp.json"
    run("build", inst, "--out", spf)
    assert run("verify", inst, spf, "--drop-edge", 0, 1) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["worst_stretch"] == "inf" and rep["pass"] is False
    inst = gen(tmp_path, "euclidean", "big.json", n=12)
    run("build", inst, "--out", spf)
    assert run("verify", inst, spf, "--budget", 10) == 2
    assert run("verify", inst, spf, "--samples", 5) == 0


def test_round_trip_reports(tmp_path):
    inst = gen(tmp_path, "domain", n=7, h=1)
    spf = tmp_path / "sp.json"
    run("build", inst, "--out", spf)
    sp, meta = io.spanner_from_json(io.read_json(spf))
    again = tmp_path / "again.json"
    io.write_json(again, io.spanner_to_json(sp, meta))
    assert again.read_bytes() == spf.read_bytes()
    r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert run("verify", inst, spf, "--out", r1) == 0
    assert run("verify", inst, again, "--out", r2) == 0
    assert r1.read_bytes() == r2.read_bytes()


def test_exports(tmp_path):
    inst = gen(tmp_path, "euclidean", n=10)
    dot, csvf = tmp_path / "g.dot", tmp_path / "g.csv"
    spf = tmp_path / "sp.json"
    run("build", inst, "--out", spf, "--dot", dot, "--csv", csvf)
    edges = json.loads(spf.read_text())["edges"]
    rows = list(csv.DictReader(stdio.StringIO(csvf.read_text())))
    assert [(int(r["u"]), int(r["v"])) for r in rows] == [(e[0], e[1]) for e in edges]
    assert [float(r["length"]) for r in rows] == [e[2] for e in edges]
    text = dot.read_text()
    assert text.startswith("graph spanner {") and text.count(" -- ") == len(edges)


def test_timing_only_on_request(tmp_path):
    inst = gen(tmp_path, "euclidean", n=5)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("build", inst, "--out", a)
    run("build", inst, "--timing", "--out", b)
    assert "build_ms" not in json.loads(a.read_text())["meta"]
    assert "build_ms" in json.loads(b.read_text())["meta"]


def test_schema_errors_name_the_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "setting": "euclidean",
                               "points": [{"id": 0, "coords": [0, 0], "weight": -1}]}))
    assert run("build", bad) == 2
    assert "/points/0/weight" in capsys.readouterr().err
    bad.write_text("{not json")
    assert run("build", bad) == 2


def test_usage_errors(tmp_path):
    inst = gen(tmp_path, "euclidean", n=4)
    assert run("build", inst, "--k", 0) == 2
    assert run("build", inst, "--epsilon", 1.5) == 2
    with pytest.raises(SystemExit) as e:
        run("build")
    assert e.value.code == 2


def test_stats(tmp_path, capsys):
    inst = gen(tmp_path, "euclidean", n=30)
    spf = tmp_path / "sp.json"
    run("build", inst, "--out", spf)
    capsys.readouterr()
    assert run("stats", inst, spf) == 0
    out = json.loads(capsys.readouterr().out)
    assert sum(out["per_provenance"].values()) == out["count"]


def test_terrain_off_reference(tmp_path):
    doc = io.read_json(gen(tmp_path, "terrain", n=6, grid=4))
    t = doc["terrain"]
    off = "OFF\n%d %d 0\n" % (len(t["vertices"]), len(t["triangles"]))
    off += "".join("%r %r %r\n" % tuple(v) for v in t["vertices"])
    off += "".join("3 %d %d %d\n" % tuple(f) for f in t["triangles"])
    (tmp_path / "mesh.off").write_text(off)
    inst_off = tmp_path / "off.json"
    io.write_json(inst_off, dict(doc, terrain="mesh.off"))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("build", tmp_path / "terrain.json", "--out", a)
    run("build", inst_off, "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_bench_single_cell(tmp_path):
    out = tmp_path / "b.csv"
    assert run("bench", "--ns", 50, "--out", out, "--fit-out", tmp_path / "fit.json") == 0
    rows = list(csv.DictReader(stdio.StringIO(out.read_text())))
    assert len(rows) == 1 and rows[0]["n"] == "50"


def test_bench_euclidean_slope():
    rows = bench_rows("euclidean", [100, 200, 400, 800, 1600, 3200], [1], [0.5], 0)
    fit = bench_fit(rows)
    assert fit["loglog_slope"]["k=1,epsilon=0.5"] <= 1.15


def test_bench_polygon_spread():
    rows = bench_rows("polygon", [10, 20, 40], [1], [0.5], 0)
    assert bench_fit(rows)["edges_per_knlogn_spread"] <= 3
