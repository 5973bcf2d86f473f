import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vftaws.metric import (EuclideanOracle, InvalidArgument, MetricOracle, SegmentMetric, Spanner,
                           WeightedPoint, additive_distance, additive_matrix, audit_metric_axioms,
                           complete_spanner, make_points)


def test_same_point_is_zero():
    pts = make_points([[0, 0], [3, 4]], [1, 2])
    assert additive_distance(pts[0], pts[0], EuclideanOracle(pts)) == 0


def test_345_triangle():
    pts = make_points([[0, 0], [3, 4]], [1, 2])
    assert additive_distance(pts[0], pts[1], EuclideanOracle(pts)) == 8


def test_zero_weights_reduce_to_base():
    pts = make_points([[0, 0], [1, 0]])
    assert additive_distance(pts[0], pts[1], EuclideanOracle(pts)) == 1


def test_out_of_range_id():
    pts = make_points([[0, 0], [1, 0]])
    stray = WeightedPoint(5, (0.0, 0.0), 0.0)
    with pytest.raises(InvalidArgument):
        additive_distance(pts[0], stray, EuclideanOracle(pts))


def test_negative_weight_rejected():
    with pytest.raises(InvalidArgument):
        WeightedPoint(0, (0.0,), -1.0)


def test_collinear_audit_zero_slack():
    pts = make_points([[0, 0], [1, 0], [2, 0]])
    audit = audit_metric_axioms(pts, EuclideanOracle(pts))
    assert audit.ok
    assert audit.worst_slack == 0
    assert audit.witness[1] == 1  # the middle point is the tight one


class HalvedPair(EuclideanOracle):
    def base_distance(self, a, b):
        d = super().base_distance(a, b)
        return d / 2 if {a, b} == {0, 1} else d

    def distance_matrix(self):
        m = super().distance_matrix().copy()
        m[0, 1] /= 2
        m[1, 0] /= 2
        return m


def test_corrupted_oracle_detected():
    pts = make_points([[0, 0], [1, 0], [2, 0]])
    audit = audit_metric_axioms(pts, HalvedPair(pts))
    # d(0,1) is now 0.5, so d(0,2) = 2 exceeds the detour through 1
    assert not audit.ok
    assert set(audit.witness) == {0, 1, 2} and audit.witness[1] == 1


def test_audit_vacuous_below_three():
    pts = make_points([[0, 0], [5, 5]])
    assert audit_metric_axioms(pts, EuclideanOracle(pts)).ok


def test_sampled_audit_on_large_set():
    rng = np.random.default_rng(3)
    pts = make_points(rng.uniform(0, 10, (60, 2)), rng.uniform(0, 10, 60))
    audit = audit_metric_axioms(pts, EuclideanOracle(pts), sample_count=2000)
    assert audit.ok and audit.triples_checked > 0


coords = st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=3, max_size=12)


@settings(max_examples=40, deadline=None)
@given(coords, st.data())
def test_weighted_euclidean_is_metric(xy, data):
    w = data.draw(st.lists(st.floats(0, 50), min_size=len(xy), max_size=len(xy)))
    pts = make_points(np.array(xy), w)
    assert audit_metric_axioms(pts, EuclideanOracle(pts)).ok


@settings(max_examples=40, deadline=None)
@given(coords)
def test_zero_weight_matrix_is_base(xy):
    pts = make_points(np.array(xy))
    orc = EuclideanOracle(pts)
    assert np.array_equal(additive_matrix(pts, orc), orc.distance_matrix() * (1 - np.eye(len(pts))))


def test_segment_metric_is_absolute_difference():
    orc = SegmentMetric([0.0, 2.5, -1.0])
    assert orc.base_distance(1, 2) == 3.5


def test_base_oracle_matrix_from_base_distance():
    class Line(MetricOracle):
        n = 3

        def base_distance(self, a, b):
            return abs(a - b)

    assert Line().distance_matrix()[0, 2] == 2


def test_spanner_rejects_loops_and_duplicates():
    sp = Spanner(3)
    assert sp.add_edge(0, 1, 1.0, "x")
    assert not sp.add_edge(1, 0, 1.0, "x")
    assert not sp.add_edge(2, 2, 0.0, "x")
    assert len(sp) == 1
    with pytest.raises(InvalidArgument):
        sp.add_edge(0, 3, 1.0, "x")


def test_neighbors():
    sp = Spanner(2)
    sp.add_edge(0, 1, 1.0, "x")
    assert sp.neighbors(0) == {1}
    pts = make_points([[0, 0], [1, 0], [0, 1]])
    k3 = complete_spanner(pts, EuclideanOracle(pts))
    assert k3.neighbors(2) == {0, 1}
    assert k3.edges[(1, 2)][0] == pytest.approx(math.sqrt(2))
    with pytest.raises(InvalidArgument):
        k3.neighbors(3)


def test_provenance_counts_strip_labels():
    sp = Spanner(3)
    sp.add_edge(0, 1, 1.0, "lifted:p.0")
    sp.add_edge(1, 2, 1.0, "lifted:p.1")
    sp.add_edge(0, 2, 1.0, "base")
    assert sp.provenance_counts() == {"base": 1, "lifted": 2}
