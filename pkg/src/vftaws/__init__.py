"""Vertex-fault-tolerant spanners for additively weighted point sets."""
from .metric import (EuclideanOracle, InvalidArgument, InvalidGeometry, MetricOracle,
                     SegmentMetric, Spanner, WeightedPoint, additive_distance,
                     audit_metric_axioms, make_points)

__all__ = [
    "EuclideanOracle", "InvalidArgument", "InvalidGeometry", "MetricOracle", "SegmentMetric",
    "Spanner", "WeightedPoint", "additive_distance", "audit_metric_axioms", "make_points",
]
