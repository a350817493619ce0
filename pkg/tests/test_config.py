import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlcauchy import ConfigError, RunConfig, parse_config


def test_defaults_and_parse():
    cfg = parse_config("# comment\nquadrature.N = 32\n\nfunctional.mu = 1.5  # inline\n")
    assert cfg["quadrature.N"] == 32 and cfg["functional.mu"] == 1.5
    assert cfg["collocation.n"] == 16


def test_lists_and_optionals():
    cfg = parse_config("quadrature.N_list = 4, 8,16\nspectral.d = none\nexpm.t_list =\n")
    assert cfg["quadrature.N_list"] == (4, 8, 16)
    assert cfg["spectral.d"] is None
    assert cfg["expm.t_list"] == ()


@pytest.mark.parametrize("text", ["nope = 1", "quadrature.N = x", "quadrature.N = 0",
                                  "spectral.d = 2.0", "just words"])
def test_bad_config_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_override():
    cfg = RunConfig().override(["solver.tol=1e-10", "backend.kind = fd"])
    assert cfg["solver.tol"] == 1e-10 and cfg["backend.kind"] == "fd"
    with pytest.raises(ConfigError):
        RunConfig().override(["solver.tol"])


@settings(max_examples=50, deadline=None)
@given(
    N=st.integers(1, 10_000),
    mu=st.floats(allow_nan=False, allow_infinity=False),
    ns=st.lists(st.integers(1, 512), max_size=6),
    d=st.one_of(st.none(), st.floats(0.01, 1.5)),
)
def test_round_trip_idempotent(N, mu, ns, d):
    cfg = RunConfig({"quadrature.N": N, "functional.mu": mu, "collocation.n_list": ns,
                     "spectral.d": d})
    text = cfg.to_text()
    again = parse_config(text)
    assert again == cfg
    assert again.to_text() == text
