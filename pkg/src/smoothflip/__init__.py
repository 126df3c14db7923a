"""Smoothed analysis laboratory for FLIP local search on Max-Cut and binary Max-CSP."""

from .instance import (
    Configuration,
    DistributionSpec,
    WeightedInstance,
    cut_weight,
    flip_gain,
    sample_weights,
)
from .flip import FlipTrace, PivotRule, is_local_optimum, min_arc_gain, run_flip
from .arcs import (
    Arc,
    MoveSequence,
    classify,
    find_arcs,
    improvement_vector,
    interior,
    rank_of_arcs,
)
from .extraction import ExtractionCertificate, check_certificate, extract

__version__ = "0.1.0"
