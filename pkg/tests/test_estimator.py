import math

import numpy as np
import pytest
from sklearn.base import clone

from nlcauchy import NonlocalCauchySolver, SincExponential, example_exact_solution, example_u0
from nlcauchy import SineSpectralLaplacian


def test_get_params_and_clone():
    est = NonlocalCauchySolver(mu=0.5, N=32, n=8)
    params = est.get_params()
    assert params["mu"] == 0.5 and params["N"] == 32
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    est.set_params(n=4)
    assert est.n == 4


def test_sinc_exponential_transform():
    est = SincExponential(backend="scalar", t=0.0, N=128).fit()
    out = est.transform([[1.0], [2.0]])
    assert out.shape == (2, 1)
    assert abs(out[1, 0] - 2 * math.exp(-math.pi**2)) < 1e-9
    with pytest.raises(ValueError):
        est.transform([[1.0, 2.0]])


def test_unfitted_transform_raises():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        SincExponential().transform([[1.0]])


def test_solver_fit_predict_score():
    K = 32
    u0 = SineSpectralLaplacian(K).project(lambda x: example_u0(x, 0.25)).coords
    est = NonlocalCauchySolver(size=K, mu=0.25, N=32, n=8).fit(u0[None, :])
    assert est.report_.converged
    assert est.nodes_.shape == (9,)
    pred = est.predict(est.nodes_)
    assert np.allclose(pred, est.solution_.rows())
    assert -est.score(example_exact_solution) < 1e-2


def test_solver_input_validation():
    with pytest.raises(ValueError):
        NonlocalCauchySolver(size=4).fit(np.ones((2, 4)))
    with pytest.raises(TypeError):
        NonlocalCauchySolver(size=4, N=2.5).fit(np.ones((1, 4)))
    with pytest.raises(ValueError):
        NonlocalCauchySolver(size=4).fit([[np.nan, 0, 0, 0]])
