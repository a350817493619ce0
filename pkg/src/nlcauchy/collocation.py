"""Chebyshev-Gauss-Lobatto grids and modified Hermite-Fejer interpolation.

The basis function ``B_i`` (i = 0..n) is the unique polynomial of degree
``2n - 1`` with ``B_i(t_j) = delta_ij`` at all ``n + 1`` CGL nodes and
``B_i'(t_j) = 0`` at the ``n - 1`` interior nodes.  It is evaluated in
product form:

* interior ``i``:  ``E(t)/E(t_i) * prod_{j != i} ((t - t_j)/(t_i - t_j))**2 * (1 + beta_i (t - t_i))``
  with ``E(t) = 1 - t**2`` and the product over interior nodes;
* endpoints: ``(t - t_other)/(t_i - t_other) * prod_j ((t - t_j)/(t_i - t_j))**2``.

``beta_i`` is fixed by the zero-derivative condition.  The result is checked
once per grid against the Chebyshev closed form
``(1 - t^2)(1 - t t_i) U_{n-1}(t)^2 / (n^2 (t - t_i)^2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import StateVector

__all__ = [
    "CglGrid",
    "HermiteFejerBasis",
    "Interpolant",
    "cgl_nodes",
    "hf_basis_eval",
    "interp_eval",
    "gauss_legendre_rule",
    "integrate_interpolant_functional",
    "chebyshev_closed_form",
    "literal_closed_form",
]


@dataclass(frozen=True)
class CglGrid:
    n: int
    nodes: np.ndarray = field(repr=False)

    def __len__(self):
        return self.n + 1


def cgl_nodes(n) -> CglGrid:
    """``t_j = -cos(pi j / n)``, j = 0..n, with exact endpoints and exact symmetry."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    nodes = -np.cos(np.pi * np.arange(n + 1) / n)
    half = n // 2
    # mirror the left half so t_j = -t_{n-j} holds exactly
    left = np.arange((n + 1) // 2)
    nodes[n - left] = -nodes[left]
    if n % 2 == 0:
        nodes[half] = 0.0
    nodes[0], nodes[-1] = -1.0, 1.0
    nodes.flags.writeable = False
    return CglGrid(n=n, nodes=nodes)


def _chebyshev_u(k, t):
    """U_k(t) via the three-term recurrence (stable on [-1, 1])."""
    t = np.asarray(t, dtype=float)
    if k == 0:
        return np.ones_like(t)
    u0, u1 = np.ones_like(t), 2 * t
    for _ in range(k - 1):
        u0, u1 = u1, 2 * t * u1 - u0
    return u1


def chebyshev_closed_form(grid: CglGrid, i, t):
    """Closed form of ``B_i`` through the Chebyshev polynomial of the second kind.

    Undefined (0/0) at ``t = t_i`` for interior ``i``.
    """
    n, ti = grid.n, grid.nodes[i]
    t = np.asarray(t, dtype=float)
    u2 = _chebyshev_u(n - 1, t) ** 2
    if i == 0:
        return (1 - t) * u2 / (2 * n**2)
    if i == n:
        return (1 + t) * u2 / (2 * n**2)
    return (1 - t**2) * (1 - t * ti) * u2 / (n**2 * (t - ti) ** 2)


def literal_closed_form(grid: CglGrid, i, t):
    """The commonly quoted closed form with ``T_{n-1}`` and the ``(n-1)^2`` denominator.

    Kept only to report how far it is from the true basis; it does not
    satisfy the interpolation conditions on CGL nodes.
    """
    n, ti = grid.n, grid.nodes[i]
    t = np.asarray(t, dtype=float)
    p2 = np.polynomial.chebyshev.chebval(t, [0] * (n - 1) + [1]) ** 2
    if i == 0:
        return (1 - t) / 2 * p2
    if i == n:
        return (1 + t) / 2 * p2
    return (1 - t**2) * (1 + t * ti - 2 * ti**2) * p2 / ((n - 1) ** 2 * (t - ti) ** 2 * (1 - ti**2))


class HermiteFejerBasis:
    """Modified Hermite-Fejer basis ``B_{i,2n-1}`` on a CGL grid.

    Parameters
    ----------
    grid : CglGrid
    check : bool
        Compare against :func:`chebyshev_closed_form` on a sample and raise
        ``ArithmeticError`` if they differ by more than ``1e-8``.
    """

    def __init__(self, grid: CglGrid, check=True):
        self.grid = grid
        t = grid.nodes
        n = grid.n
        self.n = n
        self._interior = np.arange(1, n)
        beta = np.zeros(n + 1)
        for i in self._interior:
            others = t[self._interior[self._interior != i]]
            dlog = -2 * t[i] / (1 - t[i] ** 2) + 2 * np.sum(1.0 / (t[i] - others))
            beta[i] = -dlog
        beta.flags.writeable = False
        self._beta = beta
        self._gauss = {}
        if check:
            err = self.closed_form_discrepancy(chebyshev_closed_form)
            if err > 1e-8:
                raise ArithmeticError(f"basis disagrees with closed form by {err:.3e}")

    def __len__(self):
        return self.n + 1

    def _column(self, i, t):
        nodes = self.grid.nodes
        ti = nodes[i]
        inner = self._interior[self._interior != i]
        ratio = (t[:, None] - nodes[inner]) / (ti - nodes[inner])
        sq = np.prod(ratio, axis=1) ** 2 if inner.size else np.ones_like(t)
        if i == 0 or i == self.n:
            other = nodes[self.n - i]
            return (t - other) / (ti - other) * sq
        return (1 - t**2) / (1 - ti**2) * sq * (1 + self._beta[i] * (t - ti))

    def matrix(self, t):
        """Basis values ``B_i(t_k)`` as an array of shape ``(len(t), n + 1)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.stack([self._column(i, t) for i in range(self.n + 1)], axis=1)

    def derivative_matrix(self, t):
        """``B_i'(t_k)`` by the complex-step rule (no cancellation, exact to rounding)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        step = 1e-100
        tc = t + 1j * step
        return np.stack([self._column(i, tc).imag / step for i in range(self.n + 1)], axis=1)

    def gauss_matrix(self, m):
        """Basis values at the ``m``-point Gauss-Legendre nodes (cached) and the weights."""
        hit = self._gauss.get(m)
        if hit is None:
            s, w = gauss_legendre_rule(m)
            mat = self.matrix(s)
            mat.flags.writeable = False
            hit = self._gauss.setdefault(m, (mat, w))
        return hit

    def __call__(self, i, t):
        scalar = np.ndim(t) == 0
        out = self._column(i, np.atleast_1d(np.asarray(t, dtype=float)))
        return float(out[0]) if scalar else out

    def lebesgue(self, t):
        """``sum_i |B_i(t)|``."""
        return np.sum(np.abs(self.matrix(t)), axis=1)

    def closed_form_discrepancy(self, form=literal_closed_form, samples=97):
        """Max deviation from a closed form on a sample avoiding the nodes."""
        s = np.cos(np.pi * (np.arange(samples) + 0.5) / samples)
        s = s[np.min(np.abs(s[:, None] - self.grid.nodes), axis=1) > 1e-6]
        mine = self.matrix(s)
        ref = np.stack([form(self.grid, i, s) for i in range(self.n + 1)], axis=1)
        return float(np.max(np.abs(mine - ref)))


def hf_basis_eval(basis: HermiteFejerBasis, i, t):
    return basis(i, t)


@dataclass(frozen=True)
class Interpolant:
    """``K(t) = sum_i B_i(t) values[i]``."""

    basis: HermiteFejerBasis
    values: tuple

    def __post_init__(self):
        vals = tuple(self.values)
        if len(vals) != len(self.basis):
            raise ValueError(f"need {len(self.basis)} values, got {len(vals)}")
        object.__setattr__(self, "values", vals)

    @property
    def basis_tag(self):
        return self.values[0].basis_tag

    def coords(self):
        return np.stack([v.coords for v in self.values])

    def eval_coords(self, ts):
        """Coordinates of ``K(t)`` for each ``t``, shape ``(len(ts), dim)``."""
        return self.basis.matrix(ts) @ self.coords()

    def __call__(self, t):
        return StateVector(self.eval_coords([t])[0], self.basis_tag)


def interp_eval(interp: Interpolant, t) -> StateVector:
    if not -1.0 <= t <= 1.0:
        raise ValueError("t must lie in [-1, 1]")
    return interp(t)


def gauss_legendre_rule(m):
    """Nodes and weights of the ``m``-point Gauss-Legendre rule on [-1, 1]."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return np.polynomial.legendre.leggauss(int(m))


def integrate_interpolant_functional(interp: Interpolant, f, m) -> StateVector:
    """``sum_q w_q f(K(s_q))`` with the ``m``-point Gauss-Legendre rule."""
    s, w = gauss_legendre_rule(m)
    rows = interp.eval_coords(s)
    tag = interp.basis_tag
    total = None
    for wq, row in zip(w, rows):
        term = f(StateVector(row, tag)) * wq
        total = term if total is None else total + term
    return total


def default_time_rule(n):
    """Gauss-Legendre order exact for the square of a degree ``2n - 1`` interpolant."""
    return 2 * n + 1

