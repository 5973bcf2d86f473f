import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vftaws.generators import terrain_instance
from vftaws.geometry import segments_touch
from vftaws.metric import EuclideanOracle, InvalidArgument, InvalidGeometry, make_points
from vftaws.terrain import (MeshGeodesic, PathDistance, TerrainMesh, build_vftaws_terrain,
                            classify_side, find_sp_separator, mesh_geodesic_oracle, path_landing)
from vftaws.trace import BuildLog
from vftaws.verifier import verify_stretch


def grid_mesh(g, height=lambda x, y: 0.0, side=1.0):
    xs = np.linspace(0, side, g)
    verts = [(x, y, height(x, y)) for y in xs for x in xs]
    tris = []
    for r in range(g - 1):
        for c in range(g - 1):
            a, b, d, e = r * g + c, r * g + c + 1, (r + 1) * g + c, (r + 1) * g + c + 1
            cx, cy = (xs[c] + xs[c + 1]) / 2 - side / 2, (xs[r] + xs[r + 1]) / 2 - side / 2
            if cx * cy > 0:  # cut along the diagonal parallel to the pyramid ridge
                tris += [(a, b, e), (a, e, d)]
            else:
                tris += [(a, b, d), (b, e, d)]
    return TerrainMesh(verts, tris)


def pyramid(x, y):
    return 0.5 - max(abs(x - 0.5), abs(y - 0.5))


def test_flat_triangle_exact():
    mesh = TerrainMesh([(0, 0, 0), (3, 0, 0), (0, 4, 0)], [(0, 1, 2)])
    pts = make_points([[3, 0, 0], [0, 4, 0]])
    assert mesh_geodesic_oracle(mesh, pts, 0).base_distance(0, 1) == 5.0


def test_coplanar_square_unfolds_straight():
    mesh = TerrainMesh([(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)], [(0, 1, 2), (0, 2, 3)])
    pts = make_points([[1, 0, 1], [0, 1, 1]])
    for s in (1, 3, 7):
        d = MeshGeodesic(mesh, pts, s).base_distance(0, 1)
        assert abs(d - math.sqrt(2)) <= 0.02 * math.sqrt(2)
    # an even count misses the diagonal's midpoint, where the straight line crosses
    d2 = MeshGeodesic(mesh, pts, 2).base_distance(0, 1)
    assert d2 == pytest.approx(2 * math.sqrt(1 / 9 + 4 / 9), rel=1e-12)


def test_tent_refines_monotonically():
    verts = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0.5, 0.5, 0.5)]
    mesh = TerrainMesh(verts, [(0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4)])
    pts = make_points(np.array(verts)[[0, 2]])
    ds = [MeshGeodesic(mesh, pts, s).base_distance(0, 1) for s in (0, 1, 3, 7)]
    assert ds[0] == pytest.approx(math.sqrt(3), rel=1e-12)  # over the apex
    assert all(a > b for a, b in zip(ds, ds[1:]))
    assert ds[-1] > math.sqrt(2)  # never below the straight chord


def test_disconnected_mesh_rejected():
    verts = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (5, 5, 0), (6, 5, 0), (5, 6, 0)]
    with pytest.raises(InvalidGeometry):
        MeshGeodesic(TerrainMesh(verts, [(0, 1, 2), (3, 4, 5)]), make_points([[0, 0, 0]]))


def test_negative_steiner_rejected():
    with pytest.raises(InvalidArgument):
        mesh_geodesic_oracle(grid_mesh(3), make_points([[0, 0, 0]]), -1)


def test_off_round_trip():
    mesh = grid_mesh(3, pyramid)
    off = "OFF\n%d %d 0\n" % (len(mesh.vertices), len(mesh.triangles))
    off += "".join("%r %r %r\n" % tuple(v) for v in mesh.vertices.tolist())
    off += "".join("3 %d %d %d\n" % tuple(t) for t in mesh.triangles.tolist())
    back = TerrainMesh.from_off(off)
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.triangles, mesh.triangles)


def test_snap_reports_distance():
    mesh = grid_mesh(3)
    nodes, gap = mesh.snap([[0.49, 0.5, 0.0]])
    assert nodes.tolist() == [4] and gap == pytest.approx(0.01)


def _mid_path(mesh, oracle):
    g = int(round(math.sqrt(len(mesh))))
    top, bottom = (g - 1) * g + g // 2, g // 2
    return oracle.graph.path(bottom, top)


def test_mid_path_splits_flat_square():
    mesh = grid_mesh(5)
    xy = [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75], [0.5, 0.5]]
    pts = make_points([p + [0.0] for p in xy])
    orc = MeshGeodesic(mesh, pts, 1)
    path = _mid_path(mesh, orc)
    side = classify_side(mesh, orc.graph, path, orc.nodes)
    assert side[0] == side[1] and side[2] == side[3] and side[0] != side[2]
    assert side[4]  # on the path: closed region
    assert int(side[:4].sum()) == 2  # half of the off-path points


def test_sp_separator_balance_nine_points():
    mesh, pts = terrain_instance(9, 6, 3)
    sep = find_sp_separator(mesh, MeshGeodesic(mesh, pts, 1))
    assert 2 <= len(sep.inside_ids) <= 6
    assert sorted(sep.inside_ids + sep.outside_ids) == list(range(9))


def test_sp_separator_corner_cluster():
    mesh = grid_mesh(7)
    xs = np.linspace(0, 1, 7)
    corner = [(x, y, 0.0) for x in xs[:3] for y in xs[:3]]
    pts = make_points(corner)
    orc = MeshGeodesic(mesh, pts, 1)
    sep = find_sp_separator(mesh, orc)
    # recount the label of every point directly from the returned paths
    inside = sep.inside_ids
    assert 2 <= len(inside) <= 6
    if sep.kind == "path":
        recount = classify_side(mesh, orc.graph, sep.paths[0], orc.nodes)
        assert np.flatnonzero(recount).tolist() == inside


def test_sp_separator_needs_four():
    mesh, pts = terrain_instance(3, 4, 0)
    with pytest.raises(InvalidArgument):
        find_sp_separator(mesh, MeshGeodesic(mesh, pts, 1))


def _crosses(a, b, path_xy):
    return any(segments_touch(a, b, c, d) for c, d in zip(path_xy, path_xy[1:]))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 999))
def test_side_labels_agree_with_flood_fill(seed):
    mesh, _ = terrain_instance(4, 6, seed)
    verts = make_points(mesh.vertices)
    orc = MeshGeodesic(mesh, verts, 1)
    rng = np.random.default_rng(seed)
    u, v = rng.choice(mesh.boundary, 2, replace=False)
    path = orc.graph.path(int(u), int(v))
    side = classify_side(mesh, orc.graph, path, orc.nodes)
    on = set(path)
    pxy = orc.graph.positions[path, :2]
    g = nx.Graph()
    g.add_nodes_from(i for i in range(len(mesh)) if i not in on)
    for a, b in mesh.edges:
        if a in on or b in on:
            continue
        if not _crosses(mesh.vertices[a, :2], mesh.vertices[b, :2], pxy):
            g.add_edge(a, b)
    boundary = set(mesh.boundary)
    for comp in nx.connected_components(g):
        labels = {bool(side[i]) for i in comp if i not in boundary}
        assert len(labels) <= 1


def test_three_points_complete():
    mesh, pts = terrain_instance(3, 5, 1)
    orc = MeshGeodesic(mesh, pts)
    sp = build_vftaws_terrain(mesh, pts, 1, 0.5, oracle=orc)
    assert sorted(sp.edges) == [(0, 1), (0, 2), (1, 2)]
    assert verify_stretch(pts, orc, sp, 1, 1.0).worst_stretch == 1.0


def test_flat_terrain_meets_plane_bound():
    mesh = grid_mesh(6)
    rng = np.random.default_rng(2)
    chosen = np.sort(rng.choice(len(mesh), 12, replace=False))
    pts = make_points(mesh.vertices[chosen], rng.uniform(0, 0.2, 12))
    sp = build_vftaws_terrain(mesh, pts, 1, 0.5)
    assert verify_stretch(pts, EuclideanOracle(pts), sp, 1, 11.0).passed


def test_pyramid_twelve_points():
    mesh = grid_mesh(5, pyramid)
    rng = np.random.default_rng(12)
    chosen = np.sort(rng.choice(len(mesh), 12, replace=False))
    pts = make_points(mesh.vertices[chosen], rng.uniform(0, 0.3, 12))
    orc = MeshGeodesic(mesh, pts, 3)
    log = BuildLog()
    sp = build_vftaws_terrain(mesh, pts, 1, 0.5, 3, log, orc)
    assert verify_stretch(pts, orc, sp, 1, 11.0).passed
    assert log.of_kind("sp-separator") and not log.violations()


def test_projection_is_path_argmin():
    mesh, pts = terrain_instance(8, 6, 4)
    orc = MeshGeodesic(mesh, pts, 2)
    b = mesh.boundary
    path = orc.graph.path(b[0], b[len(b) // 2])
    w = np.array([p.weight for p in pts])
    landing = path_landing(orc.graph, path, orc.nodes, w, range(8), 0.5, refined=False)
    for lp in landing:
        assert lp.added == orc.graph.dist[orc.nodes[lp.source_id], path].min()
        assert lp.weight == pytest.approx(w[lp.source_id] + lp.added)


def test_path_distance_arc_length():
    mesh = grid_mesh(4)
    orc = MeshGeodesic(mesh, make_points([[0, 0, 0]]), 0)
    path = orc.graph.path(0, 3)
    f = PathDistance(orc.graph, 0, path)
    assert f.y_hi == pytest.approx(1.0)
    assert f.minimize() == (0.0, 0.0)
