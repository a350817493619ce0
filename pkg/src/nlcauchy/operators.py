"""Sectorial operator backends.

Every backend realizes a linear operator ``A`` on a finite-dimensional
coordinate space and exposes the resolvent ``(zI - A)^{-1}``.  Coordinates
are always stored as ``complex128``; real operators simply produce results
with a vanishing imaginary part.

Backends are immutable after construction and hold no mutable state, so
``resolve`` may be called concurrently from several threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .exceptions import (
    CapabilityMissingError,
    DimensionMismatchError,
    PivotBreakdownError,
    SingularShiftError,
    ZeroShiftError,
)

__all__ = [
    "SpectralParams",
    "StateVector",
    "OperatorBackend",
    "ScalarOperator",
    "DiagonalOperator",
    "FdLaplacian1D",
    "SineSpectralLaplacian",
    "resolve",
    "resolvent_corrected",
    "thomas_solve",
    "fd_spectral_params",
    "scaled_cgl_points",
]

_SHIFT_RTOL = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class SpectralParams:
    """Sector vertex ``rho0``, half-angle ``phi0`` and resolvent constant ``M``."""

    rho0: float
    phi0: float = 0.0
    M: float = 1.0

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError(f"rho0 must be positive, got {self.rho0!r}")
        if not 0.0 <= self.phi0 < math.pi / 2:
            raise ValueError(f"phi0 must lie in [0, pi/2), got {self.phi0!r}")
        if not self.M > 0:
            raise ValueError(f"M must be positive, got {self.M!r}")


class StateVector:
    """An element of the state space in a backend coordinate representation.

    Arithmetic is only defined between vectors with the same ``basis_tag``
    and length; scalars multiply as usual.
    """

    __slots__ = ("coords", "basis_tag")

    def __init__(self, coords, basis_tag="abstract-coordinate"):
        arr = np.array(coords, dtype=np.complex128, copy=True).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("StateVector coordinates must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)
        object.__setattr__(self, "basis_tag", basis_tag)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    def __len__(self):
        return self.coords.shape[0]

    def __repr__(self):
        return f"StateVector({self.coords!r}, basis_tag={self.basis_tag!r})"

    def _check(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        if other.basis_tag != self.basis_tag:
            raise DimensionMismatchError(
                f"basis mismatch: {self.basis_tag!r} vs {other.basis_tag!r}"
            )
        if len(other) != len(self):
            raise DimensionMismatchError(f"length mismatch: {len(self)} vs {len(other)}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return StateVector(self.coords + other.coords, self.basis_tag)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return StateVector(self.coords - other.coords, self.basis_tag)

    def __mul__(self, scalar):
        if isinstance(scalar, StateVector):
            return NotImplemented
        return StateVector(self.coords * scalar, self.basis_tag)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return StateVector(self.coords / scalar, self.basis_tag)

    def __neg__(self):
        return StateVector(-self.coords, self.basis_tag)

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.basis_tag == other.basis_tag and np.array_equal(self.coords, other.coords)

    __hash__ = None


def scaled_cgl_points(m):
    """CGL points mapped to [0, 1]: ``x_l = (1 - cos(pi l / m)) / 2``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    x = 0.5 * (1.0 - np.cos(np.pi * np.arange(m + 1) / m))
    x[0], x[-1] = 0.0, 1.0
    return x


def _sector_for(eigenvalues):
    eig = np.asarray(eigenvalues, dtype=np.complex128)
    if np.any(eig.real <= 0):
        raise ValueError("eigenvalues must have positive real part")
    if np.all(eig.imag == 0):
        return SpectralParams(rho0=float(eig.real.min()), phi0=0.0)
    rho0 = 0.5 * float(eig.real.min())
    phi0 = float(np.max(np.arctan2(np.abs(eig.imag), eig.real - rho0)))
    return SpectralParams(rho0=rho0, phi0=phi0)


class OperatorBackend:
    """Capability interface shared by all concrete operators.

    Subclasses implement ``_resolve_coords`` and ``spectral_params``.  The
    optional capabilities (``power_apply``, pointwise ``evaluate``) raise
    :class:`CapabilityMissingError` unless overridden.
    """

    basis_tag = "abstract-coordinate"
    dim: int

    def spectral_params(self) -> SpectralParams:
        raise NotImplementedError

    def vector(self, coords) -> StateVector:
        v = StateVector(coords, self.basis_tag)
        self._check_dim(v)
        return v

    def zeros(self) -> StateVector:
        return StateVector(np.zeros(self.dim), self.basis_tag)

    def _check_dim(self, v):
        if not isinstance(v, StateVector):
            raise TypeError(f"expected StateVector, got {type(v).__name__}")
        if v.basis_tag != self.basis_tag or len(v) != self.dim:
            raise DimensionMismatchError(
                f"vector ({v.basis_tag}, {len(v)}) incompatible with backend "
                f"({self.basis_tag}, {self.dim})"
            )

    def _check_shift(self, z, eigenvalues):
        gap = np.min(np.abs(z - eigenvalues))
        scale = max(1.0, abs(z), float(np.max(np.abs(eigenvalues))))
        if gap <= _SHIFT_RTOL * scale:
            raise SingularShiftError(f"shift z={z} coincides with an eigenvalue")

    def resolve(self, z, v: StateVector) -> StateVector:
        """Return ``(zI - A)^{-1} v``."""
        self._check_dim(v)
        return StateVector(self._resolve_coords(complex(z), v.coords), self.basis_tag)

    def resolve_coords(self, z, coords):
        """Array-level resolvent, skipping StateVector wrapping."""
        return self._resolve_coords(complex(z), np.asarray(coords, dtype=np.complex128))

    def _resolve_coords(self, z, coords):
        raise NotImplementedError

    def apply(self, v: StateVector) -> StateVector:
        return self.power_apply(1.0, v)

    def power_apply(self, alpha, v: StateVector) -> StateVector:
        raise CapabilityMissingError(f"{type(self).__name__} does not provide A^alpha")

    # pointwise (nodal) representation used by nonlinear functionals
    def to_nodal(self, coords):
        return np.asarray(coords, dtype=np.complex128)

    def from_nodal(self, values):
        return np.asarray(values, dtype=np.complex128)

    def evaluate(self, coords, x):
        raise CapabilityMissingError(
            f"{type(self).__name__} cannot evaluate states at spatial points"
        )

    def norm(self, coords) -> float:
        """X-norm used by the iteration residual; discrete max-norm by default."""
        coords = np.asarray(coords)
        return float(np.max(np.abs(coords))) if coords.size else 0.0


class ScalarOperator(OperatorBackend):
    """Multiplication by a complex number ``lam`` with positive real part."""

    def __init__(self, lam):
        lam = complex(lam)
        if lam.real <= 0:
            raise ValueError("lam must have positive real part")
        self.lam = lam
        self.dim = 1

    def spectral_params(self):
        return _sector_for([self.lam])

    def _resolve_coords(self, z, coords):
        self._check_shift(z, np.array([self.lam]))
        return coords / (z - self.lam)

    def power_apply(self, alpha, v):
        self._check_dim(v)
        return StateVector(self.lam ** alpha * v.coords, self.basis_tag)


class DiagonalOperator(OperatorBackend):
    """Diagonal operator with the given eigenvalues."""

    def __init__(self, eigenvalues):
        eig = np.array(eigenvalues, dtype=np.complex128).reshape(-1)
        if eig.size == 0:
            raise ValueError("need at least one eigenvalue")
        eig.flags.writeable = False
        self.eigenvalues = eig
        self.dim = eig.size
        self._params = _sector_for(eig)

    def spectral_params(self):
        return self._params

    def _resolve_coords(self, z, coords):
        self._check_shift(z, self.eigenvalues)
        return coords / (z - self.eigenvalues)

    def power_apply(self, alpha, v):
        self._check_dim(v)
        return StateVector(self.eigenvalues ** alpha * v.coords, self.basis_tag)


@numba.njit(cache=True, nogil=True)
def _thomas_kernel(lower, diag, upper, rhs, out, cp, threshold):
    n = diag.shape[0]
    b = diag[0]
    if abs(b) < threshold:
        return 0
    if n > 1:
        cp[0] = upper[0] / b
    out[0] = rhs[0] / b
    for i in range(1, n):
        b = diag[i] - lower[i - 1] * cp[i - 1]
        if abs(b) < threshold:
            return i
        if i < n - 1:
            cp[i] = upper[i] / b
        out[i] = (rhs[i] - lower[i - 1] * out[i - 1]) / b
    for i in range(n - 2, -1, -1):
        out[i] -= cp[i] * out[i + 1]
    return -1


def thomas_solve(lower, diag, upper, rhs, threshold=1e-300):
    """Solve a (complex) tridiagonal system by the Thomas algorithm.

    Parameters
    ----------
    lower, upper : array_like, length n-1
        Sub- and super-diagonal.
    diag : array_like, length n
    rhs : array_like, length n
    threshold : float
        Smallest admissible modulus of an eliminated pivot.

    Returns
    -------
    ndarray of complex128, length n

    Raises
    ------
    PivotBreakdownError
        If a pivot modulus drops below ``threshold``.
    """
    diag = np.ascontiguousarray(diag, dtype=np.complex128)
    n = diag.shape[0]
    lower = np.ascontiguousarray(lower, dtype=np.complex128)
    upper = np.ascontiguousarray(upper, dtype=np.complex128)
    rhs = np.ascontiguousarray(rhs, dtype=np.complex128)
    if n == 0:
        raise DimensionMismatchError("empty system")
    if lower.shape != (n - 1,) or upper.shape != (n - 1,) or rhs.shape != (n,):
        raise DimensionMismatchError(
            f"inconsistent tridiagonal shapes: lower {lower.shape}, diag {diag.shape}, "
            f"upper {upper.shape}, rhs {rhs.shape}"
        )
    out = np.empty(n, dtype=np.complex128)
    cp = np.empty(max(n - 1, 1), dtype=np.complex128)
    row = _thomas_kernel(lower, diag, upper, rhs, out, cp, threshold)
    if row >= 0:
        raise PivotBreakdownError(f"pivot breakdown at row {row}")
    return out


def fd_eigenvalues(M_int):
    dx = 1.0 / (M_int + 1)
    k = np.arange(1, M_int + 1)
    return (4.0 / dx**2) * np.sin(k * np.pi * dx / 2) ** 2


def fd_spectral_params(M_int) -> SpectralParams:
    """Exact smallest eigenvalue of the Dirichlet second difference on ``M_int`` points."""
    if M_int < 1:
        raise ValueError("M_int must be >= 1")
    dx = 1.0 / (M_int + 1)
    return SpectralParams(rho0=(4.0 / dx**2) * math.sin(math.pi * dx / 2) ** 2, phi0=0.0, M=1.0)


class FdLaplacian1D(OperatorBackend):
    """``-d^2/dx^2`` on (0, 1), Dirichlet ends, second difference on ``M_int`` interior points.

    Coordinates are nodal values at ``x_i = i / (M_int + 1)``.
    """

    basis_tag = "nodal-grid"

    def __init__(self, M_int, pivot_threshold=1e-300):
        if M_int < 1:
            raise ValueError("M_int must be >= 1")
        self.M_int = int(M_int)
        self.dim = self.M_int
        self.dx = 1.0 / (self.M_int + 1)
        self.pivot_threshold = pivot_threshold
        self.grid = np.arange(1, self.M_int + 1) * self.dx
        self.eigenvalues = fd_eigenvalues(self.M_int)
        off = np.full(self.M_int - 1, 1.0 / self.dx**2, dtype=np.complex128)
        off.flags.writeable = False
        self._off = off
        for arr in (self.grid, self.eigenvalues):
            arr.flags.writeable = False
        self._modes = None

    def spectral_params(self):
        return fd_spectral_params(self.M_int)

    def _resolve_coords(self, z, coords):
        self._check_shift(z, self.eigenvalues)
        diag = np.full(self.M_int, z - 2.0 / self.dx**2, dtype=np.complex128)
        return thomas_solve(self._off, diag, self._off, coords, self.pivot_threshold)

    def matrix(self):
        """Dense ``A_h`` (for oracles and small problems)."""
        n = self.M_int
        a = np.diag(np.full(n, 2.0)) - np.diag(np.ones(n - 1), 1) - np.diag(np.ones(n - 1), -1)
        return a / self.dx**2

    def _eigvecs(self):
        # orthonormal sine eigenvectors; built lazily, result is never mutated
        if self._modes is None:
            k = np.arange(1, self.M_int + 1)
            s = math.sqrt(2 * self.dx) * np.sin(np.pi * np.outer(self.grid, k))
            s.flags.writeable = False
            self._modes = s
        return self._modes

    def power_apply(self, alpha, v):
        self._check_dim(v)
        s = self._eigvecs()
        return StateVector(s @ (self.eigenvalues ** alpha * (s.T @ v.coords)), self.basis_tag)

    def apply(self, v):
        self._check_dim(v)
        u = v.coords
        padded = np.concatenate(([0.0], u, [0.0]))
        return StateVector((2 * u - padded[:-2] - padded[2:]) / self.dx**2, self.basis_tag)

    def evaluate(self, coords, x):
        xs = np.concatenate(([0.0], self.grid, [1.0]))
        c = np.concatenate(([0.0], np.asarray(coords), [0.0]))
        x = np.asarray(x, dtype=float)
        return np.interp(x, xs, c.real) + 1j * np.interp(x, xs, c.imag)


class SineSpectralLaplacian(OperatorBackend):
    """``-d^2/dx^2`` on (0, 1) with Dirichlet ends in the basis ``sin(k pi x)``, k = 1..K.

    Nonlinear pointwise maps are evaluated on a uniform interior grid of
    ``oversample * K`` points and projected back with the discrete sine
    (trapezoid) projection.  ``norm_points`` controls the scaled-CGL grid used
    for the max-norm.
    """

    basis_tag = "sine-mode"

    def __init__(self, K_modes, oversample=4, norm_points=64):
        if K_modes < 1:
            raise ValueError("K_modes must be >= 1")
        if oversample < 1:
            raise ValueError("oversample must be >= 1")
        self.K_modes = int(K_modes)
        self.dim = self.K_modes
        self.oversample = int(oversample)
        self.k = np.arange(1, self.K_modes + 1)
        self.eigenvalues = (self.k * np.pi) ** 2
        n_nodal = self.oversample * self.K_modes
        self.nodal_grid = np.arange(1, n_nodal + 1) / (n_nodal + 1)
        self._synth = np.sin(np.pi * np.outer(self.nodal_grid, self.k))
        self._proj = (2.0 / (n_nodal + 1)) * self._synth.T
        self.norm_grid = scaled_cgl_points(norm_points)
        self._norm_synth = np.sin(np.pi * np.outer(self.norm_grid, self.k))
        for arr in (self.k, self.eigenvalues, self.nodal_grid, self._synth, self._proj,
                    self.norm_grid, self._norm_synth):
            arr.flags.writeable = False

    def spectral_params(self):
        return SpectralParams(rho0=math.pi**2, phi0=0.0, M=1.0)

    def _resolve_coords(self, z, coords):
        self._check_shift(z, self.eigenvalues)
        return coords / (z - self.eigenvalues)

    def power_apply(self, alpha, v):
        self._check_dim(v)
        return StateVector(self.eigenvalues ** alpha * v.coords, self.basis_tag)

    def to_nodal(self, coords):
        return self._synth @ np.asarray(coords, dtype=np.complex128)

    def from_nodal(self, values):
        return self._proj @ np.asarray(values, dtype=np.complex128)

    def project(self, f):
        """Mode coefficients of a callable ``f(x)`` via the discrete sine projection."""
        return StateVector(self.from_nodal(f(self.nodal_grid)), self.basis_tag)

    def evaluate(self, coords, x):
        x = np.asarray(x, dtype=float)
        return np.sin(np.pi * np.multiply.outer(x, self.k)) @ np.asarray(coords)

    def norm(self, coords):
        return float(np.max(np.abs(self._norm_synth @ np.asarray(coords))))


def resolve(backend: OperatorBackend, z, v: StateVector) -> StateVector:
    """``(zI - A)^{-1} v``."""
    return backend.resolve(z, v)


def resolvent_corrected(backend: OperatorBackend, z, v: StateVector) -> StateVector:
    """Corrected resolvent ``R_A(z) v - v / z``.

    The subtraction makes the contour integrand decay fast enough for the
    quadrature to converge uniformly down to ``t = -1``.
    """
    z = complex(z)
    if abs(z) <= np.finfo(float).tiny:
        raise ZeroShiftError("corrected resolvent undefined at z = 0")
    w = backend.resolve(z, v)
    return StateVector(w.coords - v.coords / z, v.basis_tag)
