"""Refinement of manifold-valued polylines by geodesic averaging.

Linear subdivision schemes are factorised into averaging rounds (one per
real root of the symbol, one three-point pyramid per complex pair) and run on
spheres, rotations, SPD matrices or Euclidean space. The analysis module
certifies convergence from arbitrary admissible data.
"""

from .analysis import (
    ConvergenceReport,
    contractivity,
    displacement,
    displacement_constant,
    empirical_contraction,
    mu1_of,
    omega_angle,
    omega_boundary,
    omega_membership,
    omega_radii,
    uniform_complex_bound,
    xi,
)
from .errors import (
    GeodesicDomainError,
    GeoRefineError,
    KindMismatchError,
    NumericError,
    RefinementError,
    SymbolError,
    ValidationError,
)
from .geometry import (
    OPEN,
    PERIODIC,
    SPD,
    Euclidean,
    ManifoldPoint,
    Polyline,
    Rotations3D,
    Sphere,
    admissible,
    distance,
    geodesic_point,
    mesh_size,
)
from .pyramid import (
    QuadraticWeights,
    ThreePyramidParams,
    expansion_bound,
    optimal_params,
    params_for_r,
    three_pyramid_average,
    weights_from_alpha,
)
from .refine import (
    RefinementPlan,
    RefinementTrace,
    elementary_double,
    global_refine_step,
    linear_refine,
    linear_round,
    local_refine_step,
    make_plan,
    plan_from_mask,
    quadratic_round,
    subdivide,
)
from .symbol import Mask, SymbolFactorization, bspline_mask, factorize, reconstruct, validate

__version__ = "0.1.0"
