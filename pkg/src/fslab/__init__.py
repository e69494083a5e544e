"""Numerical laboratory for two-dimensional Finsler geometry.

Modules: ``core`` (pointwise tensors and spray jets), ``indicatrix``
(central affine traces and the averaged metric), ``connection`` (compatible
linear connections, torsion, Wagner's test), ``curvature`` (Gauss curvature
and the divergence representation) and ``plane`` (the translated-indicatrix
construction on the Euclidean plane).
"""

from .core import LineElementJets, bracket_check, identity_residuals, metric_jet, spray_jets
from .engines import FiniteDifferenceEngine, JetEngine, get_engine
from .metrics import MetricField, euclidean, preset, randers, validate_metric

__version__ = "0.1.0"

__all__ = [
    "FiniteDifferenceEngine",
    "JetEngine",
    "LineElementJets",
    "MetricField",
    "bracket_check",
    "euclidean",
    "get_engine",
    "identity_residuals",
    "metric_jet",
    "preset",
    "randers",
    "spray_jets",
    "validate_metric",
]
