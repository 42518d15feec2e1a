"""Relative equilibria of point vortices on concentric regular polygons."""

from .core import (
    BoundaryError,
    CloseApproachError,
    ConservedQuantities,
    HypothesisUnmetError,
    PlanePoint,
    SingularFieldError,
    VortexError,
    VortexSystem,
    conserved,
    mutual_distances,
)
from .corotating import (
    CorotatingPoint,
    RayKind,
    corotating_absolute,
    corotating_nested,
    corotating_single,
)
from .dynamics import (
    EquilibriumKind,
    EquilibriumReport,
    Trajectory,
    classify,
    integrate,
    oneil_sum,
    velocities,
)
from .nested import (
    Alignment,
    NestedPolygonConfig,
    PolynomialInstance,
    RegimeClassification,
    absolute_equilibrium,
    classify_regime,
    count_roots_analytic,
    equation_coefficients,
    f_eval,
    g_eval,
    lambda_n,
    mu_n,
    positive_roots,
    scan_regimes,
    solve_nested,
)
from .polygon import (
    CirculantSpectrum,
    MatrixKind,
    PolygonRing,
    RingCase,
    VorticitySolutionSpace,
    circulant_spectrum,
    polygon_field,
    polygon_omega,
    ring_to_system,
    vorticity_solution_space,
)

__version__ = "0.1.0"
