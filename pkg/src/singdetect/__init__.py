"""Self-supervised detection of singular curves from mesh-vertex point sets."""
from .basis import Basis, eval_features, monomial_index
from .data import (BatchedPointSet, ParseError, PointSet, RectDomain, ValidationError,
                   load_points, merge_batches, parse_points, save_points)
from .diagnostics import RadiusSamples, TracedCurve, radius_function, trace_zero_set
from .filtering import (FilterReport, KdeParams, KnnParams, apply_filter, kde_density,
                        kde_filter, knn_filter, silverman_bandwidth)
from .fitting import (DetectionModel, FitReport, GramMatrix, WeightScheme, assemble_gram,
                      coefficient_error, evaluate_detection, fit, solve_unit_norm_min)
from .synthgen import CurveSpec, GenParams, generate

__all__ = [
    "Basis", "eval_features", "monomial_index",
    "BatchedPointSet", "ParseError", "PointSet", "RectDomain", "ValidationError",
    "load_points", "merge_batches", "parse_points", "save_points",
    "RadiusSamples", "TracedCurve", "radius_function", "trace_zero_set",
    "FilterReport", "KdeParams", "KnnParams", "apply_filter", "kde_density",
    "kde_filter", "knn_filter", "silverman_bandwidth",
    "DetectionModel", "FitReport", "GramMatrix", "WeightScheme", "assemble_gram",
    "coefficient_error", "evaluate_detection", "fit", "solve_unit_norm_min",
    "CurveSpec", "GenParams", "generate",
]

__version__ = "0.1.0"
