"""ramcf: generalized continued fractions -a1/(1 - a2/(1 - ...)) through
Moebius-map composition at configurable precision, with numerically
certified convergent constructions at coefficient limits a > 1/4."""

__version__ = "0.1.0"

from .errors import RamcfError
from .precision import (
    DEFAULT_PRECISION_BITS,
    as_scalar,
    scalar_str,
    working_precision,
)
from .moebius import (
    INF,
    MapClass,
    MoebiusMap,
    boundary_diameter,
    cayley_angle,
    cf_map,
    chordal_distance,
    classify,
    compose,
    derivative_at,
    elliptic_fixed_point,
    hyperbolic_fixed_points,
    inverse_rotation_number,
    power,
    rotation_number,
)
from .engine import (
    ConstantSource,
    ConvergenceReport,
    ConvergentTrace,
    CoefficientSource,
    ExplicitSource,
    GillPerturbedSource,
    convergent_by_composition,
    convergent_by_recurrence,
    detect_periodicity,
    evaluate,
    evaluate_trace,
    gill_check,
    trace_by_composition,
    trace_by_recurrence,
    write_trace_csv,
)
from .rational import (
    ConstructionCertificate,
    FamilySolution,
    RationalRotationParams,
    alpha_field,
    beta_field,
    build_params,
    build_sequence,
    certify,
    choose_repeller,
    composed_image_diameters,
    multiplier_slope,
    orbit_of_zero,
    solve_families,
    stage_map,
)
from .irrational import (
    CauchyCertificate,
    IrrationalParams,
    NestedSequence,
    QuadraticIrrational,
    avoidance_set,
    build_nested,
    choose_power,
    golden_rho,
    rotation_convergents,
    verify_cauchy,
)
from .report import Scenario, compare, run
