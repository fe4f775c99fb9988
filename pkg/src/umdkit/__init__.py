"""Unified mirror descent: mirror descent, dual averaging and GoLD on one engine."""

from .core import NormTag, dual_norm, fenchel_residual, generalized_bregman, norm
from .errors import (
    ArgumentError,
    BoundViolation,
    CertificationError,
    DimensionError,
    DomainError,
    LabelError,
    ParseError,
    UMDError,
    UnboundedError,
    UnsupportedError,
)
from .geometry import (
    Box,
    ConstraintSet,
    EuclideanBall,
    FullSpace,
    ProductSet,
    Segment,
    Segment2D,
    Simplex,
    contains,
    euclidean_project,
    support_min,
)
from .mirror import (
    ElasticNet,
    EntropyMap,
    EntropySimplex,
    Euclidean,
    EuclideanMap,
    ProductRegularizer,
    Regularizer,
    bregman_project,
    euclidean_ball,
    euclidean_free,
    grad_conjugate,
    md_subgradient,
)
from .problems import (
    Dataset,
    Problem,
    check_gradient,
    estimate_f_star,
    make_bilinear_saddle,
    make_least_squares,
    make_logistic,
)
from .solvers import (
    DualPolicy,
    StepSchedule,
    Trace,
    UmdState,
    aumd_coefficients,
    averaged_iterate,
    certify_umd_step,
    gold_branch_choice,
    run_aumd,
    run_quasi_monotone,
    run_umd,
    umd_step,
)
from .vi import MonotoneOperator, run_ump, vi_gap
from .online import compute_regret, run_regret_game

__version__ = "0.1.0"
