"""horolab: coarsely convex bicombings, cone metrics, ray products, and
horofunction machinery verified numerically on concrete model spaces."""

from .bicombing import (
    Bicombing,
    ParamGrid,
    check_convexity_i,
    check_quasi_geodesic,
    check_theta_ii,
    reparametrize,
    scan_grid,
)
from .cone import ConeMetricContext, check_lipschitz_bound, check_quasi_triangle, cone_metric
from .core import (
    CoarseParams,
    DerivedConstants,
    VerificationReport,
    Violation,
    check_metric_axioms,
    derive_constants,
    merge_reports,
)
from .gromov import (
    DirectionWitness,
    EscapingSequence,
    check_d2_inequality,
    direction_witness,
    escaping_sequence,
    gromov_product,
    is_escaping,
    ray_witness,
    same_ideal_point,
    visual_quasimetric,
)
from .horo import (
    ConvergenceReport,
    ExclusionCertificate,
    ReducedClassVerdict,
    SampleWindow,
    WindowFunction,
    busemann_cone,
    classify_bounded_difference,
    default_slope_gate,
    exclusion_certificate,
    limit_on_window,
    make_window,
    open_cone_limit_function,
    phi_window,
    psi_window,
    rebase,
    sup_distance_on_window,
    window_function_jsonable,
    write_window_csv,
)
from .spaces import (
    ConePoint,
    FiniteMetricSpace,
    FiniteMetricTree,
    HyperbolicHalfPlane,
    LpSpace,
    OpenConeSpace,
    Space,
    TreePoint,
    snap_bicombing,
)

__all__ = [name for name in dir() if not name.startswith("_")]
