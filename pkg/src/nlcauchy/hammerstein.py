"""Collocated Hammerstein system and its fixed-point solution.

The nonlocal problem ``u' + A u = 0``, ``u(-1) - g(u) = u0`` is equivalent to
``u(t) = T(A, t)[u0 + g(u)]``.  Replacing ``T`` by the Sinc approximation
``T_N`` and ``u`` by its Hermite-Fejer interpolant through the CGL values
``y_0..y_n`` gives the system

    y_i = T_N(A, t_i) u0 + T_N(A, t_i) g(K(., y)),   i = 0..n,

solved by ``y^(0) = p``, ``y^(k) = G(y^(k-1)) + p``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .collocation import (
    CglGrid,
    HermiteFejerBasis,
    Interpolant,
    cgl_nodes,
    default_time_rule,
)
from .contour import DEFAULT_MARGIN, ExpmEvaluator, SincQuadrature, default_strip
from .exceptions import DivergenceError, InsufficientDataError
from .operators import OperatorBackend, SineSpectralLaplacian, SpectralParams, StateVector, scaled_cgl_points

__all__ = [
    "NonlocalFunctional",
    "ZeroFunctional",
    "MultipointFunctional",
    "QuadraticIntegralFunctional",
    "NonlocalProblem",
    "CollocatedSystem",
    "IterationReport",
    "DiscreteSolution",
    "assemble_p",
    "apply_G",
    "fixed_point_solve",
    "vec_norm",
    "contraction_report",
    "err_metric",
    "example_exact_solution",
    "example_u0",
    "example_problem",
]

logger = logging.getLogger(__name__)

STAGNATION_DECREASE = 0.01
DIVERGENCE_GROWTH = 10.0
WINDOW = 3
REL_ACCURACY = 1e-5


class NonlocalFunctional:
    """Map ``g`` from a time-continuous state (given as an interpolant) to a state.

    ``lipschitz_hint`` and ``mu`` are optional metadata used by diagnostics.
    """

    lipschitz_hint = None
    mu = None

    def apply(self, interp: Interpolant, backend: OperatorBackend | None = None) -> StateVector:
        raise NotImplementedError

    def __call__(self, interp, backend=None):
        return self.apply(interp, backend)


class ZeroFunctional(NonlocalFunctional):
    """``g = 0``: the classical Cauchy problem."""

    lipschitz_hint = 0.0
    mu = 0.0

    def apply(self, interp, backend=None):
        v = interp.values[0]
        return StateVector(np.zeros(len(v)), v.basis_tag)


class MultipointFunctional(NonlocalFunctional):
    """``g(u) = sum_k c_k u(s_k)`` for fixed ``s_k`` in [-1, 1]."""

    def __init__(self, points, coefficients):
        self.points = np.asarray(points, dtype=float).reshape(-1)
        self.coefficients = np.asarray(coefficients, dtype=np.complex128).reshape(-1)
        if self.points.shape != self.coefficients.shape or self.points.size == 0:
            raise ValueError("points and coefficients must be non-empty and of equal length")
        if np.any(np.abs(self.points) > 1):
            raise ValueError("points must lie in [-1, 1]")
        self.lipschitz_hint = float(np.sum(np.abs(self.coefficients)))

    def apply(self, interp, backend=None):
        rows = interp.eval_coords(self.points)
        return StateVector(self.coefficients @ rows, interp.basis_tag)


class QuadraticIntegralFunctional(NonlocalFunctional):
    """``g(u) = mu * integral_{-1}^{1} u(s)^2 ds`` with a pointwise square.

    The square is taken in the backend's nodal representation (an oversampled
    grid for the sine backend) and projected back once.  The time integral uses
    the ``m``-point Gauss-Legendre rule, by default ``2n + 1`` points, which is
    exact for the square of the degree ``2n - 1`` interpolant.
    """

    def __init__(self, mu, m=None):
        self.mu = float(mu)
        self.m = m

    def apply(self, interp, backend=None):
        m = self.m or default_time_rule(interp.basis.n)
        basis_at_nodes, w = interp.basis.gauss_matrix(m)
        rows = basis_at_nodes @ interp.coords()
        if backend is None:
            nodal = rows
        else:
            nodal = backend.to_nodal(rows.T).T
        acc = w @ (nodal * nodal)
        coords = acc if backend is None else backend.from_nodal(acc)
        return StateVector(self.mu * coords, interp.basis_tag)


@dataclass
class NonlocalProblem:
    """Operator, nonlocal functional, datum and discretization sizes.

    ``d=None`` selects ``(pi/2 - phi0)(1 - margin)``.  ``spectral`` overrides
    the backend's own spectral parameters.
    """

    backend: OperatorBackend
    g: NonlocalFunctional
    u0: StateVector
    alpha: float = 1.0
    d: float | None = None
    N: int = 64
    n: int = 16
    margin: float = DEFAULT_MARGIN
    spectral: SpectralParams | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.N < 1 or self.n < 1:
            raise ValueError("N and n must be >= 1")
        self.backend._check_dim(self.u0)

    def spectral_params(self):
        return self.spectral or self.backend.spectral_params()

    def strip_width(self):
        if self.d is not None:
            return self.d
        return default_strip(self.spectral_params().phi0, self.margin)

    def build(self, workers=1):
        return CollocatedSystem(self, workers=workers)


class CollocatedSystem:
    """Discretized operators of a :class:`NonlocalProblem` (quadrature, grid, basis)."""

    def __init__(self, problem: NonlocalProblem, workers=1):
        self.problem = problem
        self.backend = problem.backend
        self.quadrature = SincQuadrature.for_params(
            problem.spectral_params(), problem.alpha, problem.N, d=problem.strip_width()
        )
        self.evaluator = ExpmEvaluator(self.backend, self.quadrature, workers=workers)
        self.grid: CglGrid = cgl_nodes(problem.n)
        self.basis = HermiteFejerBasis(self.grid)

    @property
    def solve_count(self):
        return self.evaluator.solve_count

    def p(self):
        return self.evaluator.apply_many_coords(self.grid.nodes, self.problem.u0, key="u0")

    def interpolant(self, ys):
        tag = self.backend.basis_tag
        return Interpolant(self.basis, tuple(StateVector(row, tag) for row in ys))

    def g_image(self, ys):
        return self.problem.g.apply(self.interpolant(ys), self.backend)

    def G(self, ys):
        w = self.g_image(ys)
        return self.evaluator.apply_many_coords(self.grid.nodes, w)


def _as_system(problem_or_system, workers=1):
    if isinstance(problem_or_system, CollocatedSystem):
        return problem_or_system
    return problem_or_system.build(workers=workers)


def _rows(ys):
    if isinstance(ys, np.ndarray):
        return ys
    return np.stack([y.coords for y in ys])


def _wrap(rows, tag):
    return [StateVector(r, tag) for r in rows]


def assemble_p(system) -> list:
    """``p_i = T_N(A, t_i) u0`` for all CGL nodes (``2N + 1`` solves, cached)."""
    system = _as_system(system)
    return _wrap(system.p(), system.backend.basis_tag)


def apply_G(system, ys) -> list:
    """``G(y)_i = T_N(A, t_i) g(K(., y))``; one ``g`` evaluation, ``2N + 1`` solves."""
    system = _as_system(system)
    return _wrap(system.G(_rows(ys)), system.backend.basis_tag)


def vec_norm(ys, backend: OperatorBackend | None = None) -> float:
    """Max over components of the X-norm (backend norm, or max-abs of coordinates)."""
    rows = _rows(ys)
    if rows.shape[0] == 0:
        raise ValueError("empty vector")
    if backend is None:
        return float(np.max(np.abs(rows))) if rows.size else 0.0
    return max(backend.norm(r) for r in rows)


@dataclass(frozen=True)
class IterationReport:
    """Residual history of the fixed-point iteration.

    ``iterations`` counts performed steps (``K``); ``iterations_rel`` is the
    first step whose residual relative to ``|||y^(k)|||`` is below
    ``1e-5`` (``None`` if never reached).
    """

    iterations: int
    residuals: tuple
    q_emp: tuple
    converged: bool
    stop_reason: str
    iterations_rel: int | None = None
    solves: int = 0
    g_p_norm: float = math.nan


@dataclass
class DiscreteSolution:
    grid: CglGrid
    y: list
    report: IterationReport
    backend: OperatorBackend = field(repr=False)

    def rows(self):
        return _rows(self.y)

    def values_at(self, x):
        """``y_j(x_l)`` as an array of shape ``(n + 1, len(x))``."""
        return np.stack([self.backend.evaluate(y.coords, x) for y in self.y])


def _ratios(residuals):
    return tuple(
        residuals[k] / residuals[k - 1] if residuals[k - 1] > 0 else 0.0
        for k in range(1, len(residuals))
    )


def fixed_point_solve(problem, tol=1e-14, max_iter=50, workers=1) -> DiscreteSolution:
    """Iterate ``y <- G(y) + p`` starting from ``p``.

    Stops when the residual ``|||y^(k) - y^(k-1)|||`` drops below ``tol``,
    when it decreases by less than 1% over three steps (stagnation at the
    rounding floor), or after ``max_iter`` steps.

    Raises
    ------
    DivergenceError
        Residual grew by more than a factor 10 over three steps, or became
        non-finite.  The report collected so far is attached.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    system = _as_system(problem, workers)
    backend = system.backend
    p = system.p()
    y = p
    residuals = []
    k_rel = None
    reason = "max_iter"
    g_p_norm = math.nan

    def report(reason, converged):
        return IterationReport(
            iterations=len(residuals),
            residuals=tuple(residuals),
            q_emp=_ratios(residuals),
            converged=converged,
            stop_reason=reason,
            iterations_rel=k_rel,
            solves=system.solve_count,
            g_p_norm=g_p_norm,
        )

    for k in range(1, max_iter + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            y_new = system.G(y) + p
            diff = y_new - y
        finite = bool(np.all(np.isfinite(y_new)))
        r = vec_norm(diff, backend) if finite else math.inf
        residuals.append(r)
        if k == 1:
            g_p_norm = r
        if not finite:
            raise DivergenceError(f"non-finite iterate at step {k}", report("divergence", False))
        y = y_new
        size = vec_norm(y, backend)
        if k_rel is None and r <= REL_ACCURACY * size:
            k_rel = k
        if r < tol:
            reason = "tolerance"
            break
        if k > WINDOW:
            past = residuals[-1 - WINDOW]
            if r > DIVERGENCE_GROWTH * past:
                raise DivergenceError(
                    f"residual grew from {past:.3e} to {r:.3e} over {WINDOW} steps",
                    report("divergence", False),
                )
            if r > (1 - STAGNATION_DECREASE) * past:
                reason = "stagnation"
                break
    rep = report(reason, reason in ("tolerance", "stagnation"))
    logger.debug("fixed point: %s after %d steps", reason, rep.iterations)
    return DiscreteSolution(grid=system.grid, y=_wrap(y, backend.basis_tag), report=rep, backend=backend)


def contraction_report(report: IterationReport, L=None, c=None, alpha=None):
    """Empirical and (optionally) a-priori contraction diagnostics.

    Returns a dict with ``q_emp_final`` and, when ``L``, ``c`` and ``alpha``
    are given, ``apriori_q = 3 L c / alpha``, ``hypothesis_holds`` and the
    a-priori iteration error bound ``|||g(p)||| q^(K+1) / (1 - q)``.
    """
    res = report.residuals
    if res and res[-1] == 0.0:
        q_final = 0.0
    elif len(res) < 3:
        raise InsufficientDataError(f"need >= 3 residuals, have {len(res)}")
    else:
        q_final = res[-1] / res[-2]
    out = {"q_emp_final": q_final, "iterations": report.iterations}
    if L is not None and c is not None and alpha is not None:
        q = 3.0 * L * c / alpha
        out["apriori_q"] = q
        out["hypothesis_holds"] = q < 1
        out["iteration_bound"] = (
            report.g_p_norm * q ** (report.iterations + 1) / (1 - q) if q < 1 else math.inf
        )
        if q >= 1:
            out["note"] = "contraction hypothesis fails; convergence observed empirically only"
    return out


def err_metric(solution: DiscreteSolution, exact, m=64) -> float:
    """``max_{l, j} |exact(t_j, x_l) - y_j(x_l)|`` on the scaled CGL points ``x_l``."""
    x = scaled_cgl_points(m)
    approx = solution.values_at(x)
    ref = np.array([[exact(t, xl) for xl in x] for t in solution.grid.nodes])
    return float(np.max(np.abs(ref - approx)))


def example_exact_solution(t, x):
    """``exp(-(t + 1) pi^2) sin(pi x)``."""
    return np.exp(-(t + 1) * np.pi**2) * np.sin(np.pi * x)


def example_u0(x, mu):
    """Datum for which ``exp(-(t+1) pi^2) sin(pi x)`` solves the quadratic nonlocal problem."""
    s = np.sin(np.pi * np.asarray(x, dtype=float))
    return s + mu * (np.exp(-4 * np.pi**2) - 1) / (2 * np.pi**2) * s**2


def example_problem(mu=0.25, N=64, n=16, K_modes=64, alpha=1.0, d=None,
                    margin=DEFAULT_MARGIN, oversample=4, norm_points=64,
                    functional=None, backend=None):
    """The 1-D heat example with ``g(u) = mu * integral u^2`` on the sine backend.

    The datum is projected with the same discrete sine projection the
    functional uses, so spatial truncation cancels in ``u0 + g(u)``.
    """
    if backend is None:
        backend = SineSpectralLaplacian(K_modes, oversample=oversample, norm_points=norm_points)
    if functional is None:
        functional = QuadraticIntegralFunctional(mu) if mu != 0 else ZeroFunctional()
    if isinstance(backend, SineSpectralLaplacian):
        u0 = backend.project(lambda x: example_u0(x, mu))
    else:
        u0 = backend.vector(backend.from_nodal(example_u0(backend.grid, mu)))
    return NonlocalProblem(backend=backend, g=functional, u0=u0, alpha=alpha, d=d,
                           N=N, n=n, margin=margin)
