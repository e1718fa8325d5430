"""Exact (accurate) coresets for weighted point sets."""

from .caratheodory import (
    ConvexCombination,
    caratheodory,
    fast_caratheodory,
    streaming_caratheodory,
)
from .core import (
    CoresetError,
    CoresetReport,
    DimensionError,
    GeometryError,
    InputError,
    SegmentQuery,
    WeightError,
    WeightedSet,
    eval_lms,
    eval_max_distance,
    eval_monotonic_max,
    eval_quadratic_form,
    eval_segment_loss,
    eval_sq_dist_sum,
    eval_subspace_distance,
    eval_weighted_sum,
)
from .coresets import (
    KINDS,
    ExtremePair,
    MomentSummary,
    WeightedSubset,
    build,
    extreme_points,
    lms_coreset,
    matrix_norm_factor,
    matrix_norm_subset,
    one_mean_bounded,
    one_mean_moments,
    one_mean_subset,
    one_segment,
    size_bound,
    vectors_sum_bounded,
    vectors_sum_single,
    vectors_sum_subset,
    weighted_one_center_counterexample,
)
from .linalg import QRFactors, ThinSVDFactors, lstsq, null_space_vector, qr, rotation_to_uniform, thin_svd
from .solvers import LmsObjectiveSpec, lms_objective, solve_linear, solve_ridge

__version__ = "0.1.0"
