"""Contour-integral and collocation solver for nonlocal-in-time parabolic problems.

Public entry points:

* :class:`~nlcauchy.contour.ExpmEvaluator` and :func:`expm_apply` for
  ``exp(-A (t + 1)) v`` by sinc quadrature on a hyperbola;
* :func:`fixed_point_solve` for the collocated Hammerstein system;
* :class:`SincExponential` and :class:`NonlocalCauchySolver`, estimator-style
  wrappers around both.
"""
from .collocation import (
    CglGrid,
    HermiteFejerBasis,
    Interpolant,
    cgl_nodes,
    gauss_legendre_rule,
    hf_basis_eval,
    integrate_interpolant_functional,
    interp_eval,
)
from .config import RunConfig, load_config, parse_config
from .contour import (
    ExpmEvaluator,
    HyperbolaContour,
    SincQuadrature,
    default_strip,
    expm_apply,
    expm_apply_many,
    quadrature_step,
    sector_to_contour,
    theorem1_bound,
)
from .estimator import NonlocalCauchySolver, SincExponential, make_backend, make_functional
from .exceptions import (
    CapabilityMissingError,
    ConfigError,
    DimensionMismatchError,
    DivergenceError,
    InsufficientDataError,
    InvalidStripError,
    NlcauchyError,
    PivotBreakdownError,
    SingularShiftError,
    ZeroShiftError,
)
from .hammerstein import (
    CollocatedSystem,
    DiscreteSolution,
    IterationReport,
    MultipointFunctional,
    NonlocalFunctional,
    NonlocalProblem,
    QuadraticIntegralFunctional,
    ZeroFunctional,
    apply_G,
    assemble_p,
    contraction_report,
    err_metric,
    example_exact_solution,
    example_problem,
    example_u0,
    fixed_point_solve,
    vec_norm,
)
from .operators import (
    DiagonalOperator,
    FdLaplacian1D,
    OperatorBackend,
    ScalarOperator,
    SineSpectralLaplacian,
    SpectralParams,
    StateVector,
    resolve,
    resolvent_corrected,
    scaled_cgl_points,
    thomas_solve,
)

__version__ = "0.1.0"
