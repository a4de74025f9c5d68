import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from semimplicit.core import (
    ConfigurationError,
    NumericalError,
    PdeProblem,
    StateVector,
    assemble_split,
    build_grid,
    discrete_norms,
)
from semimplicit.harness.cases import CASES
from semimplicit.spatial import second_derivative


def test_grid_spacing_and_nodes():
    g = build_grid(-math.pi, math.pi, 40)
    assert g.dx == pytest.approx(2 * math.pi / 40)
    assert g.x[0] == -math.pi
    assert g.x[-1] == pytest.approx(math.pi - g.dx)
    assert g.periodic


def test_grid_kdv_domain():
    g = build_grid(-1.5 * math.pi, 2.5 * math.pi, 80)
    assert g.dx == pytest.approx(4 * math.pi / 80)


@pytest.mark.parametrize("args", [(0, 1, 4), (1, 1, 10), (1, 0, 10), (0, 1, 10.5), (0, math.inf, 10)])
def test_grid_rejects_degenerate(args):
    with pytest.raises(ConfigurationError):
        build_grid(*args)


def test_state_vector_checks():
    with pytest.raises(NumericalError):
        StateVector(np.array([1.0, np.nan]))
    with pytest.raises(ConfigurationError):
        StateVector(np.zeros((2, 2)))
    s = StateVector([1, 2, 3], 0.5)
    c = s.copy()
    c.values[0] = 9
    assert s.values[0] == 1


def test_norms_zero_and_constant():
    z = discrete_norms(np.zeros(10), 0.1)
    assert (z.l1, z.l2, z.linf) == (0, 0, 0)
    n, length, c = 50, 3.0, -2.5
    e = discrete_norms(np.full(n, c), length / n)
    assert e.l1 == pytest.approx(length * abs(c))
    assert e.linf == abs(c)
    with pytest.raises(ConfigurationError):
        discrete_norms(np.array([]), 0.1)


def test_norm_of_sine_against_quadrature():
    from scipy.integrate import quad

    g = build_grid(-math.pi, math.pi, 640)
    e = discrete_norms(np.sin(g.x), g.dx)
    ref = math.sqrt(quad(lambda x: math.sin(x) ** 2, -math.pi, math.pi)[0])
    assert e.l2 == pytest.approx(ref, rel=1e-12)
    mean = discrete_norms(np.sin(g.x), g.dx, normalize_by=2 * math.pi)
    assert mean.l2 == pytest.approx(1 / math.sqrt(2), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.integers(1, 60), elements=st.floats(-1e6, 1e6)), st.floats(1e-3, 10))
def test_norm_sanity(e, dx):
    r = discrete_norms(e, dx)
    length = dx * e.size
    assert r.l1 <= length * r.linf * (1 + 1e-12) + 1e-300
    assert r.l2**2 <= length * r.linf**2 * (1 + 1e-12) + 1e-300
    assert min(r.l1, r.l2, r.linf) >= 0


def test_assemble_split_linear_heat():
    g = build_grid(-math.pi, math.pi, 64)
    lap = second_derivative(g)
    prob = PdeProblem(lambda u, t: np.zeros_like(u), lambda u: lap, g)
    f, b = assemble_split(prob, StateVector(np.sin(g.x)))
    assert np.all(f == 0)
    assert np.abs(b @ np.sin(g.x) + np.sin(g.x)).max() < 1e-5


def test_assemble_split_convdiff_at_zero_is_scaled_laplacian():
    case = CASES["R1_convdiff"]
    prob = case.problem(40)
    g = prob.grid
    _, b = assemble_split(prob, StateVector(np.zeros(40)))
    # independent assembly of 2 * (flux-form Laplacian with unit coefficient)
    d = np.zeros((40, 40))
    c = np.array([-1, 27, -27, 1]) / (24 * g.dx)  # gradient at i+1/2 from i-1..i+2
    grad = np.zeros((40, 40))
    div = np.zeros((40, 40))
    for i in range(40):
        for k, off in enumerate((-1, 0, 1, 2)):
            grad[i, (i + off) % 40] += -c[k]
        for k, off in enumerate((-2, -1, 0, 1)):
            div[i, (i + off) % 40] += -c[k]
    d = 2.0 * div @ grad
    assert np.abs(b.to_dense() - d).max() < 1e-10 * np.abs(d).max()


def test_assemble_split_rejects_bad_state():
    prob = CASES["M1_diffusion"].problem(16)
    with pytest.raises(ConfigurationError):
        assemble_split(prob, StateVector(np.zeros(15)))


def test_residual_against_exact_rhs_decays():
    # convection-diffusion: u_t = -(u^2/2)_x + ((u^2+2)u_x)_x + f evaluated with the exact u_t
    case = CASES["R1_convdiff"]
    errs = []
    for n in (40, 80, 160):
        prob = case.problem(n)
        x = prob.grid.x
        ut = np.cos(x)  # d/dt sin(x + t) at t = 0
        errs.append(np.abs(prob.rhs(np.sin(x), 0.0) - ut).max())
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 2.5)


@pytest.mark.parametrize("cid", ["R2_kdv", "M3_kdv"])
def test_conservation_structure(cid, rng):
    prob = CASES[cid].problem(48)
    for _ in range(4):
        u = rng.standard_normal(48)
        f, b = assemble_split(prob, StateVector(u))
        assert abs(f.sum()) < 1e-12 * max(1.0, np.abs(f).max())
        assert np.abs(b.column_sums()).max() < 1e-9 * max(1.0, np.abs(b.bands).max())
