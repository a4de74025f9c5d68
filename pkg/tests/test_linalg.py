import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semimplicit.core import ConfigurationError, SingularSystemError, build_grid
from semimplicit.linalg import BandedLU, factor_shifted, shifted_matrix, solve
from semimplicit.spatial import StencilMatrix, biharmonic_matrix, diffusion_matrix


def _random_stencil(rng, n, w, shift=0.0):
    bands = rng.standard_normal((n, 2 * w + 1))
    bands[:, w] += shift
    return StencilMatrix(bands)


@pytest.mark.parametrize("w", [0, 1, 2, 4])
def test_cyclic_banded_matches_dense_oracle(w, rng, backend):
    n = 30
    b = _random_stencil(rng, n, w)
    c = 0.05
    rhs = rng.standard_normal(n)
    x = solve(factor_shifted(b, c, backend=backend), rhs)
    ref = np.linalg.solve(np.eye(n) - c * b.to_dense(), rhs)
    assert np.allclose(x, ref, rtol=1e-10, atol=1e-12)


def test_banded_lu_pivots(rng, backend):
    n, kl, ku = 20, 2, 3
    dense = np.zeros((n, n))
    for i in range(n):
        for j in range(max(0, i - kl), min(n, i + ku + 1)):
            dense[i, j] = rng.standard_normal()
    np.fill_diagonal(dense, 1e-3)  # forces row interchanges
    rowband = np.zeros((n, 2 * kl + ku + 1))
    for i in range(n):
        for j in range(max(0, i - kl), min(n, i + ku + 1)):
            rowband[i, j - i + kl] = dense[i, j]
    lu = BandedLU(rowband, kl, ku, backend=backend)
    rhs = rng.standard_normal((n, 3))
    assert np.allclose(lu.solve(rhs), np.linalg.solve(dense, rhs))


def test_backends_agree_on_periodic_operator(rng):
    pytest.importorskip("numba")
    g = build_grid(-np.pi, np.pi, 64)
    b = -biharmonic_matrix(g, np.sin(g.x), lambda v: v * v + 2)
    rhs = rng.standard_normal(64)
    xa = solve(factor_shifted(b, g.dx, backend="numpy"), rhs)
    xb = solve(factor_shifted(b, g.dx, backend="numba"), rhs)
    assert np.array_equal(xa, xb) or np.allclose(xa, xb, rtol=1e-13)


def test_dense_strategy_and_identity(rng):
    g = build_grid(0, 1, 16)
    b = diffusion_matrix(g, np.ones(16))
    rhs = rng.standard_normal(16)
    xd = solve(factor_shifted(b, 1e-3, strategy="dense"), rhs)
    xb = solve(factor_shifted(b, 1e-3), rhs)
    assert np.allclose(xd, xb)
    assert np.array_equal(solve(factor_shifted(b, 0.0), rhs), rhs)
    assert np.allclose(shifted_matrix(b, 2.0).to_dense(), np.eye(16) - 2.0 * b.to_dense())


def test_dense_ndarray_input(rng):
    a = rng.standard_normal((5, 5))
    rhs = rng.standard_normal(5)
    x = solve(factor_shifted(a, 0.1), rhs)
    assert np.allclose((np.eye(5) - 0.1 * a) @ x, rhs)


def test_singular_system_reported():
    # I - 1 * I is singular in every representation
    with pytest.raises(SingularSystemError) as exc:
        factor_shifted(StencilMatrix.identity(12), 1.0)
    assert "condition estimate" in str(exc.value)
    with pytest.raises(SingularSystemError):
        factor_shifted(np.eye(3), 1.0)


def test_configuration_errors(rng):
    b = _random_stencil(rng, 4, 2)
    with pytest.raises(ConfigurationError):
        factor_shifted(b, 0.1)  # n < 2w + 1
    b = _random_stencil(rng, 10, 1)
    with pytest.raises(ConfigurationError):
        factor_shifted(b, np.inf)
    with pytest.raises(ConfigurationError):
        factor_shifted(b, 0.1, strategy="magic")
    with pytest.raises(ConfigurationError):
        solve(factor_shifted(b, 0.1), np.zeros(9))


def test_condition_estimate_brackets_true_value(rng):
    b = _random_stencil(rng, 24, 2, shift=-4.0)
    fac = factor_shifted(b, 0.5)
    dense = np.eye(24) - 0.5 * b.to_dense()
    true = np.linalg.cond(dense, 1)
    assert 0.1 * true <= fac.condition_estimate <= true * (1 + 1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(8, 40), st.integers(0, 3), st.floats(1e-3, 0.3), st.integers(0, 2**31 - 1))
def test_property_residual_small(n, w, c, seed):
    if n < 2 * w + 1:
        return
    rng = np.random.default_rng(seed)
    b = _random_stencil(rng, n, w, shift=-3.0)
    rhs = rng.standard_normal(n)
    a = np.eye(n) - c * b.to_dense()
    x = solve(factor_shifted(b, c), rhs)
    assert np.linalg.norm(a @ x - rhs) <= 1e-9 * np.linalg.cond(a) * np.linalg.norm(rhs)
