"""scikit-learn style front end.

:class:`SincExponential` is a stateless transformer ``X -> T_N(A, t) X`` and
:class:`NonlocalCauchySolver` fits the nonlocal problem for a datum ``u0``
and predicts the collocated solution at arbitrary times.  Both follow the
estimator conventions (constructor only stores parameters, learned state ends
with ``_``), so ``get_params``/``set_params``/``clone`` work as usual.
"""
import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive, check_states, check_times
from .contour import DEFAULT_MARGIN, ExpmEvaluator, SincQuadrature
from .hammerstein import (
    MultipointFunctional,
    NonlocalProblem,
    QuadraticIntegralFunctional,
    ZeroFunctional,
    err_metric,
    fixed_point_solve,
)
from .operators import (
    DiagonalOperator,
    FdLaplacian1D,
    OperatorBackend,
    ScalarOperator,
    SineSpectralLaplacian,
    SpectralParams,
)

__all__ = ["make_backend", "make_functional", "SincExponential", "NonlocalCauchySolver"]


def make_backend(kind="sine", size=64, lam=math.pi**2, eigenvalues=None, oversample=4,
                 norm_points=64):
    """Backend from a short name: ``sine``, ``fd``, ``scalar`` or ``diagonal``."""
    if isinstance(kind, OperatorBackend):
        return kind
    if kind == "sine":
        return SineSpectralLaplacian(size, oversample=oversample, norm_points=norm_points)
    if kind == "fd":
        return FdLaplacian1D(size)
    if kind == "scalar":
        return ScalarOperator(lam)
    if kind == "diagonal":
        if eigenvalues is None or len(eigenvalues) == 0:
            raise ValueError("diagonal backend needs eigenvalues")
        return DiagonalOperator(eigenvalues)
    raise ValueError(f"unknown backend kind {kind!r}")


def make_functional(kind="quadratic", mu=0.25, points=None, coefficients=None, m=None):
    if kind == "zero":
        return ZeroFunctional()
    if kind == "quadratic":
        return QuadraticIntegralFunctional(mu, m=m)
    if kind == "multipoint":
        return MultipointFunctional(points or [], coefficients or [])
    raise ValueError(f"unknown functional kind {kind!r}")


def _spectral(backend, rho0, phi0):
    sp = backend.spectral_params()
    if rho0 is None and phi0 is None:
        return None
    return SpectralParams(rho0=sp.rho0 if rho0 is None else rho0,
                          phi0=sp.phi0 if phi0 is None else phi0, M=sp.M)


class SincExponential(TransformerMixin, BaseEstimator):
    """Apply ``exp(-A (t + 1))`` (Sinc approximation) to each row of ``X``.

    Parameters
    ----------
    backend : str or OperatorBackend
    t : float
        Time in [-1, 1].
    N, alpha, d, margin : quadrature parameters.
    """

    def __init__(self, backend="sine", size=64, t=0.0, N=64, alpha=1.0, d=None,
                 margin=DEFAULT_MARGIN, workers=1):
        self.backend = backend
        self.size = size
        self.t = t
        self.N = N
        self.alpha = alpha
        self.d = d
        self.margin = margin
        self.workers = workers

    def fit(self, X=None, y=None):
        check_positive(self.N, "N", integer=True)
        check_positive(self.alpha, "alpha")
        check_times([self.t])
        self.backend_ = make_backend(self.backend, self.size)
        self.quadrature_ = SincQuadrature.for_params(
            self.backend_.spectral_params(), self.alpha, self.N, d=self.d, margin=self.margin
        )
        self.n_features_in_ = self.backend_.dim
        return self

    def transform(self, X):
        check_is_fitted(self, "quadrature_")
        X = check_states(X, self.backend_.dim)
        ev = ExpmEvaluator(self.backend_, self.quadrature_, workers=self.workers)
        return np.stack([ev.apply(self.t, self.backend_.vector(row)).coords for row in X])


class NonlocalCauchySolver(BaseEstimator):
    """Solve ``u' + A u = 0`` on (-1, 1) with ``u(-1) - g(u) = u0``.

    ``fit(X)`` takes the datum ``u0`` as backend coordinates (one row) and
    runs the fixed-point iteration; ``predict(T)`` evaluates the
    Hermite-Fejer interpolant of the collocated solution at times ``T``.

    Attributes
    ----------
    solution_ : DiscreteSolution
    report_ : IterationReport
    n_iter_ : int
    nodes_ : ndarray
        CGL time nodes.
    """

    def __init__(self, backend="sine", size=64, functional="quadratic", mu=0.25, points=None,
                 coefficients=None, N=64, n=16, alpha=1.0, d=None, margin=DEFAULT_MARGIN,
                 rho0=None, phi0=None, tol=1e-14, max_iter=50, workers=1):
        self.backend = backend
        self.size = size
        self.functional = functional
        self.mu = mu
        self.points = points
        self.coefficients = coefficients
        self.N = N
        self.n = n
        self.alpha = alpha
        self.d = d
        self.margin = margin
        self.rho0 = rho0
        self.phi0 = phi0
        self.tol = tol
        self.max_iter = max_iter
        self.workers = workers

    def _problem(self, u0_coords):
        backend = make_backend(self.backend, self.size)
        g = self.functional if not isinstance(self.functional, str) else make_functional(
            self.functional, self.mu, self.points, self.coefficients)
        return NonlocalProblem(
            backend=backend, g=g, u0=backend.vector(u0_coords), alpha=self.alpha, d=self.d,
            N=self.N, n=self.n, margin=self.margin, spectral=_spectral(backend, self.rho0, self.phi0),
        )

    def fit(self, X, y=None):
        check_positive(self.N, "N", integer=True)
        check_positive(self.n, "n", integer=True)
        check_positive(self.tol, "tol")
        check_positive(self.max_iter, "max_iter", integer=True)
        X = check_states(X)
        if X.shape[0] != 1:
            raise ValueError(f"fit expects a single datum u0, got {X.shape[0]} rows")
        self.problem_ = self._problem(X[0])
        self.system_ = self.problem_.build(workers=self.workers)
        self.solution_ = fixed_point_solve(self.system_, tol=self.tol, max_iter=self.max_iter)
        self.report_ = self.solution_.report
        self.n_iter_ = self.report_.iterations
        self.nodes_ = self.solution_.grid.nodes
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, T):
        """Coordinates of the collocated solution at times ``T``; shape ``(len(T), dim)``."""
        check_is_fitted(self, "solution_")
        T = check_times(T)
        return self.system_.basis.matrix(T) @ self.solution_.rows()

    def score(self, exact, m=64):
        """Negative ``Err`` against ``exact(t, x)`` (higher is better)."""
        check_is_fitted(self, "solution_")
        return -err_metric(self.solution_, exact, m)
