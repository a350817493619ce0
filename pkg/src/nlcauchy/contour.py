"""Sinc quadrature of the Dunford-Cauchy integral for ``exp(-A (t + 1)) v``.

The contour is the hyperbola ``z(s) = a cosh(s) - i b sinh(s)`` enclosing the
spectral sector of ``A``.  With the corrected resolvent
``R_{A,1}(z) = R_A(z) - 1/z`` the trapezoid rule with step ``h`` and nodes
``p h, p = -N..N`` gives

    T_N(A, t) v = h / (2 pi i) * sum_p exp(-z(ph)(t+1)) z'(ph) R_{A,1}(z(ph)) v.

The ``2N + 1`` resolvent applications do not depend on ``t``.  The
:class:`ExpmEvaluator` computes them once per input vector (optionally in
parallel) and then forms any number of time values by a serial weighted sum
in ascending ``p``, so results do not depend on the worker count.
"""
from __future__ import annotations

import logging
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidStripError, ZeroShiftError
from .operators import OperatorBackend, SpectralParams, StateVector

__all__ = [
    "HyperbolaContour",
    "SincQuadrature",
    "ExpmEvaluator",
    "default_strip",
    "sector_to_contour",
    "quadrature_step",
    "expm_apply",
    "expm_apply_many",
    "theorem1_bound",
    "max_workers",
    "WORKERS_ENV",
]

logger = logging.getLogger(__name__)

WORKERS_ENV = "NLCAUCHY_MAX_WORKERS"
EXP_CLAMP = 700.0
DEFAULT_MARGIN = 0.05


def max_workers(requested):
    """Clamp a requested worker count by the ``NLCAUCHY_MAX_WORKERS`` cap."""
    requested = max(1, int(requested))
    cap = os.environ.get(WORKERS_ENV)
    if cap:
        try:
            requested = min(requested, max(1, int(cap)))
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", WORKERS_ENV, cap)
    return requested


@dataclass(frozen=True)
class HyperbolaContour:
    a_I: float
    b_I: float
    d: float

    def __post_init__(self):
        if not (self.a_I > 0 and self.b_I > 0):
            raise InvalidStripError("hyperbola parameters must be positive")
        if not 0 < self.d < math.pi / 2:
            raise InvalidStripError(f"strip width d={self.d} outside (0, pi/2)")

    def z(self, s):
        return self.a_I * np.cosh(s) - 1j * self.b_I * np.sinh(s)

    def dz(self, s):
        return self.a_I * np.sinh(s) - 1j * self.b_I * np.cosh(s)


def default_strip(phi0, margin=DEFAULT_MARGIN):
    """``(pi/2 - phi0) * (1 - margin)``; keeps the strip strictly inside the analytic region."""
    if not 0 < margin < 1:
        raise ValueError("margin must lie in (0, 1)")
    return (math.pi / 2 - phi0) * (1 - margin)


def sector_to_contour(sp: SpectralParams, d=None, margin=DEFAULT_MARGIN) -> HyperbolaContour:
    """Hyperbola parameters for the sector ``(rho0, phi0)`` and strip width ``d``.

    ``a_I = rho0 cos(d/2 + phi0) / cos(phi0)``,
    ``b_I = rho0 sin(d/2 + phi0) / cos(phi0)``.
    """
    if d is None:
        d = default_strip(sp.phi0, margin)
    if not 0 < d < math.pi / 2:
        raise InvalidStripError(f"strip width d={d} outside (0, pi/2)")
    if d / 2 + sp.phi0 >= math.pi / 2:
        raise InvalidStripError(f"d/2 + phi0 = {d / 2 + sp.phi0} >= pi/2")
    if not sp.rho0 > 0:
        # a negative shift needs the exp(rho1 t) substitution, applied by the caller
        raise InvalidStripError("rho0 must be positive")
    c = math.cos(sp.phi0)
    return HyperbolaContour(
        a_I=sp.rho0 * math.cos(d / 2 + sp.phi0) / c,
        b_I=sp.rho0 * math.sin(d / 2 + sp.phi0) / c,
        d=d,
    )


def quadrature_step(alpha, d, N):
    """Step ``h = sqrt(pi d / (alpha (N + 1)))``."""
    if not (alpha > 0 and d > 0 and N >= 1):
        raise ValueError(f"need alpha > 0, d > 0, N >= 1 (got {alpha}, {d}, {N})")
    if d >= math.pi / 2:
        raise ValueError(f"d={d} must be < pi/2")
    return math.sqrt(math.pi * d / (alpha * (N + 1)))


def theorem1_bound(alpha, d, N, normAalphaV, c=1.0):
    """A-priori bound ``c/alpha * exp(-sqrt(pi d alpha (N+1))) * ||A^alpha v||``.

    ``c`` is the unspecified constant of the estimate; the result is only
    meaningful up to that factor.
    """
    return c / alpha * math.exp(-math.sqrt(math.pi * d * alpha * (N + 1))) * normAalphaV


@dataclass(frozen=True)
class SincQuadrature:
    """Nodes ``z(ph), z'(ph)`` for ``p = -N..N`` on a hyperbola."""

    contour: HyperbolaContour
    N: int
    h: float
    alpha: float
    z: np.ndarray = field(repr=False)
    dz: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, contour: HyperbolaContour, alpha, N, h=None):
        N = int(N)
        if h is None:
            h = quadrature_step(alpha, contour.d, N)
        s = np.arange(-N, N + 1) * h
        z = contour.z(s)
        dz = contour.dz(s)
        if np.any(np.abs(z) <= np.finfo(float).tiny):
            raise ZeroShiftError("quadrature node at z = 0")
        z.flags.writeable = False
        dz.flags.writeable = False
        return cls(contour=contour, N=N, h=float(h), alpha=float(alpha), z=z, dz=dz)

    @classmethod
    def for_params(cls, sp: SpectralParams, alpha, N, d=None, margin=DEFAULT_MARGIN):
        return cls.build(sector_to_contour(sp, d, margin), alpha, N)

    @property
    def size(self):
        return 2 * self.N + 1


def _check_times(ts):
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if ts.ndim != 1:
        raise ValueError("times must be a 1-D sequence")
    if np.any(~np.isfinite(ts)) or np.any(ts < -1.0) or np.any(ts > 1.0):
        raise ValueError("times must lie in [-1, 1]")
    return ts


class ExpmEvaluator:
    """Evaluates ``T_N(A, t) v`` reusing the ``2N + 1`` corrected-resolvent solves.

    Parameters
    ----------
    backend : OperatorBackend
    quadrature : SincQuadrature
    workers : int
        Thread count for the resolvent solves (capped by ``NLCAUCHY_MAX_WORKERS``).
        Results are bitwise independent of this value.

    Attributes
    ----------
    solve_count : int
        Corrected-resolvent applications performed so far (cache hits excluded).
    underflow_events : int
        Scalar factors forced to zero because ``Re z (t+1)`` exceeded the clamp.
    """

    def __init__(self, backend: OperatorBackend, quadrature: SincQuadrature, workers=1):
        self.backend = backend
        self.quadrature = quadrature
        self.workers = max_workers(workers)
        self.solve_count = 0
        self.underflow_events = 0
        self._cache = {}
        self._lock = threading.Lock()

    def clear_cache(self):
        with self._lock:
            self._cache.clear()

    def _corrected(self, p, coords):
        z = self.quadrature.z[p]
        return self.backend.resolve_coords(z, coords) - coords / z

    def resolvent_stack(self, v: StateVector, key=None):
        """Array of shape ``(2N+1, dim)`` holding ``R_{A,1}(z(ph)) v``.

        With a ``key``, the stack is stored and reused for later calls with the
        same key; the caller guarantees the key identifies ``v``.
        """
        if key is not None:
            with self._lock:
                hit = self._cache.get(key)
            if hit is not None:
                return hit
        self.backend._check_dim(v)
        coords = v.coords
        n_nodes = self.quadrature.size
        stack = np.empty((n_nodes, self.backend.dim), dtype=np.complex128)

        def work(p):
            stack[p] = self._corrected(p, coords)

        if self.workers > 1 and n_nodes > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                # list() re-raises the first worker exception
                list(pool.map(work, range(n_nodes)))
        else:
            for p in range(n_nodes):
                work(p)
        stack.flags.writeable = False
        with self._lock:
            self.solve_count += n_nodes
            if key is not None:
                self._cache[key] = stack
        return stack

    def weights(self, ts):
        """Scalar factors ``h/(2 pi i) exp(-z_p (t+1)) z'_p``, shape ``(len(ts), 2N+1)``."""
        ts = _check_times(ts)
        q = self.quadrature
        expo = np.multiply.outer(ts + 1.0, q.z)
        clamp = expo.real > EXP_CLAMP
        n_clamped = int(np.count_nonzero(clamp))
        if n_clamped:
            with self._lock:
                self.underflow_events += n_clamped
            logger.debug("%d quadrature factors underflowed to zero", n_clamped)
        expo = np.where(clamp, 0.0, expo)
        factor = np.where(clamp, 0.0, np.exp(-expo))
        return factor * (q.dz * (q.h / (2j * math.pi)))

    def apply_many_coords(self, ts, v: StateVector, key=None):
        """Coordinates of ``T_N(A, t) v`` for every ``t``; shape ``(len(ts), dim)``."""
        w = self.weights(ts)
        stack = self.resolvent_stack(v, key)
        out = np.zeros((w.shape[0], stack.shape[1]), dtype=np.complex128)
        for p in range(stack.shape[0]):
            out += w[:, p, None] * stack[p]
        return out

    def apply_many(self, ts, v: StateVector, key=None):
        tag = v.basis_tag
        return [StateVector(row, tag) for row in self.apply_many_coords(ts, v, key)]

    def apply(self, t, v: StateVector, key=None):
        return self.apply_many([t], v, key)[0]


def expm_apply(ev: ExpmEvaluator, t, v: StateVector, key=None) -> StateVector:
    """Approximate ``exp(-A (t + 1)) v``."""
    return ev.apply(t, v, key)


def expm_apply_many(ev: ExpmEvaluator, ts, v: StateVector, key=None):
    """``[expm_apply(ev, t, v) for t in ts]`` using a single set of resolvent solves."""
    return ev.apply_many(ts, v, key)
