import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlcauchy import (
    CapabilityMissingError,
    DiagonalOperator,
    DimensionMismatchError,
    FdLaplacian1D,
    ScalarOperator,
    SineSpectralLaplacian,
    SingularShiftError,
    StateVector,
    ZeroShiftError,
    resolve,
    resolvent_corrected,
    scaled_cgl_points,
    thomas_solve,
)
from nlcauchy.exceptions import PivotBreakdownError
from nlcauchy.operators import fd_eigenvalues


def test_state_vector_arithmetic_and_tags():
    a = StateVector([1, 2], "t")
    b = StateVector([3, 4], "t")
    assert (a + b) == StateVector([4, 6], "t")
    assert (b - a) * 2 == StateVector([4, 4], "t")
    assert (-a / 2) == StateVector([-0.5, -1], "t")
    with pytest.raises(DimensionMismatchError):
        a + StateVector([1, 2], "other")
    with pytest.raises(DimensionMismatchError):
        a + StateVector([1, 2, 3], "t")


def test_state_vector_is_immutable():
    a = StateVector([1.0, 2.0], "t")
    with pytest.raises(AttributeError):
        a.coords = np.zeros(2)
    with pytest.raises(ValueError):
        a.coords[0] = 5


def test_scaled_cgl_points_endpoints():
    x = scaled_cgl_points(8)
    assert x[0] == 0.0 and x[-1] == 1.0
    assert np.all(np.diff(x) > 0)


@pytest.mark.parametrize("M", [1, 2, 17, 200])
def test_fd_resolvent_matches_dense_solve(M):
    op = FdLaplacian1D(M)
    rng = np.random.default_rng(M)
    v = op.vector(rng.standard_normal(M) + 1j * rng.standard_normal(M))
    for z in (-3.0 + 40j, 1.0 - 5j, 0.5 + 0j):
        ref = np.linalg.solve(z * np.eye(M) - op.matrix(), v.coords)
        got = op.resolve(z, v).coords
        assert np.linalg.norm(got - ref) <= 1e-12 * np.linalg.norm(ref)


def test_fd_eigenvalues_match_dense_matrix():
    op = FdLaplacian1D(30)
    assert np.allclose(np.sort(np.linalg.eigvalsh(op.matrix())), fd_eigenvalues(30), rtol=1e-12)
    assert op.spectral_params().rho0 == pytest.approx(fd_eigenvalues(30)[0], rel=1e-14)


def test_fd_apply_and_power_apply_agree():
    op = FdLaplacian1D(25)
    v = op.vector(np.sin(3 * op.grid) + op.grid**2)
    assert np.allclose(op.apply(v).coords, op.power_apply(1.0, v).coords, atol=1e-8 * 625)
    assert np.allclose(op.power_apply(0.0, v).coords, v.coords, atol=1e-12)


def test_singular_shift_rejected():
    op = FdLaplacian1D(10)
    with pytest.raises(SingularShiftError):
        op.resolve(op.eigenvalues[3], op.vector(np.ones(10)))
    with pytest.raises(SingularShiftError):
        ScalarOperator(2.0).resolve(2.0, StateVector([1.0], "abstract-coordinate"))


def test_corrected_resolvent_rejects_zero_shift():
    op = ScalarOperator(1.0)
    with pytest.raises(ZeroShiftError):
        resolvent_corrected(op, 0.0, op.vector([1.0]))


@pytest.mark.parametrize("make", [lambda: FdLaplacian1D(40), lambda: SineSpectralLaplacian(16),
                                  lambda: DiagonalOperator([1.0, 4.0 + 1j, 9.0])])
def test_corrected_resolvent_recomposition(make):
    op = make()
    rng = np.random.default_rng(1)
    v = op.vector(rng.standard_normal(op.dim))
    for z in (3 - 7j, -2 + 0.5j, 50j):
        lhs = resolvent_corrected(op, z, v) + v / z
        rhs = resolve(op, z, v)
        assert np.max(np.abs((lhs - rhs).coords)) <= 1e-14 * max(1.0, np.max(np.abs(rhs.coords)))


def test_backend_rejects_foreign_vectors():
    fd, sine = FdLaplacian1D(8), SineSpectralLaplacian(8)
    with pytest.raises(DimensionMismatchError):
        fd.resolve(1j, sine.vector(np.ones(8)))
    with pytest.raises(DimensionMismatchError):
        fd.resolve(1j, StateVector(np.ones(7), "nodal-grid"))


def test_missing_capabilities():
    op = DiagonalOperator([1.0, 2.0])
    with pytest.raises(CapabilityMissingError):
        op.evaluate(np.ones(2), [0.5])
    assert isinstance(CapabilityMissingError("x"), NotImplementedError)


def test_thomas_pivot_breakdown_and_shapes():
    with pytest.raises(PivotBreakdownError):
        thomas_solve([1.0], [0.0, 1.0], [1.0], [1.0, 1.0])
    with pytest.raises(DimensionMismatchError):
        thomas_solve([1.0, 1.0], [1.0, 1.0], [1.0], [1.0, 1.0])
    assert thomas_solve([], [2.0], [], [4.0])[0] == 2.0


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 40), seed=st.integers(0, 2**32 - 1))
def test_thomas_matches_dense_for_dominant_systems(n, seed):
    rng = np.random.default_rng(seed)
    lower = rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)
    upper = rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)
    diag = 5 + rng.standard_normal(n) + 1j * rng.standard_normal(n)
    rhs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    a = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
    ref = np.linalg.solve(a, rhs)
    got = thomas_solve(lower, diag, upper, rhs)
    assert np.linalg.norm(got - ref) <= 1e-12 * np.linalg.norm(ref)


def test_sine_backend_projection_is_exact_on_modes():
    op = SineSpectralLaplacian(12, oversample=4)
    coords = np.zeros(12)
    coords[[0, 4, 11]] = [1.0, -0.5, 0.25]
    back = op.project(lambda x: op.evaluate(coords, x).real)
    assert np.allclose(back.coords, coords, atol=1e-13)
    assert op.norm(coords) == pytest.approx(np.max(np.abs(op.evaluate(coords, op.norm_grid))))


def test_sine_backend_resolvent_is_diagonal():
    op = SineSpectralLaplacian(5)
    v = op.vector(np.arange(1, 6))
    z = 2 + 3j
    assert np.allclose(op.resolve(z, v).coords, np.arange(1, 6) / (z - (np.arange(1, 6) * math.pi) ** 2))
