"""wulff_lab: anisotropic isoperimetric functionals at desk scale.

Finsler norms and their polars, convex bodies (support curves, polygons,
facet polytopes), the scalar functionals V, P_F, M_F, r_max, excess and
the scale-invariant quotient, first variations, the inverse anisotropic
mean curvature flow, and batch verification suites for every inequality
of the underlying theory.
"""

from .bodies import (
    AngleGrid,
    Polygon2,
    PolytopeN,
    SupportCurve2,
    angle_grid,
    box,
    convex_hull,
    convex_hull_2d,
    cross_polytope,
    curve_from_fourier,
    ellipse_body,
    ellipse_excess_body,
    halfspace_cut,
    wulff_curve,
)
from .errors import (
    ConfigError,
    ConvexityLost,
    CurvatureSignLost,
    DegenerateCut,
    EmptyCut,
    LineSearchFailed,
    NotConvex,
    NotSmooth,
    OriginOutside,
    QuadratureNotConverged,
    RejectionExhausted,
    UnsupportedDimension,
    WulffLabError,
    ZeroVector,
)
from .finsler import (
    FinslerNorm,
    duality_residuals,
    elliptic_norm,
    euclidean_norm,
    lp_norm,
    polar_by_support,
    unit_ball_volume,
)
from .functionals import (
    FunctionalReport,
    anisotropic_curvature,
    anisotropic_perimeter,
    boundary_momentum,
    cahn_hoffman_field,
    evaluate,
    excess,
    heintze_karcher,
    max_polar_radius,
    quotient,
    support_radial_integral,
    unit_wulff_volume,
    unit_wulff_volume_exact,
    volume,
)
from .iamcf import FlowConfig, FlowState, FlowTrace, WulffFit, fit_wulff, run, step
from .specs import norm_from_spec, shape_from_spec, shape_to_spec
from .variation import (
    CutReport,
    PerturbationField,
    cut_direction,
    cut_experiment,
    first_variation_density,
    momentum_rate,
    observed_order,
    perimeter_rate,
    perturb,
    quotient_rate_iamcf,
    second_inequality_value,
    trend_nonpositive,
    validate_rates,
    volume_rate,
    zero_identity_residual,
)
from .verify import (
    SearchConfig,
    SearchResult,
    SuiteReport,
    SUITES,
    minimize,
    paper_example_rows,
    random_body,
    run_suite,
    thin_box_momentum_exact,
    zero_excess_dichotomy,
)

__version__ = "0.1.0"
