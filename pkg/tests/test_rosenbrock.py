import math
from fractions import Fraction as F

import numpy as np
import pytest
import scipy.linalg
from scipy.integrate import solve_ivp

from semimplicit.core import ConfigurationError, PdeProblem, StateVector, StepStats
from semimplicit.rosenbrock import (
    GAMMA_SDIRK,
    ConstructionError,
    RosenbrockTableau,
    builtin_tableau,
    check_stiffly_accurate,
    construct_third_order,
    gamma_label,
    one_stage_tableau,
    parse_gamma,
    rosenbrock_step,
    si_euler_double,
    si_rk_step,
    tableau_from_text,
    tableau_to_text,
    two_stage_sdirk_double,
    validate_order_conditions,
)


def test_three_quarter_scheme_coefficients():
    t = builtin_tableau("3/4")
    assert t.gamma == F(3, 4)
    assert t.a_tilde[1][0] == F(3, 13)
    assert t.a_tilde[2][:2] == (F(5, 3), 0)
    assert t.a_tilde[3][:3] == (F(1063, 1485), F(52, 297), F(6, 55))
    assert (t.alpha[1][0], t.alpha[2][1], t.alpha[3][1]) == (F(3, 2), F(5, 3), 1)
    assert t.gamma_mat[1][0] == F(-255, 52)
    assert t.gamma_mat[2][:2] == (F(125, 54), F(-115, 108))
    assert t.gamma_mat[3][:3] == (F(2, 5), -1, F(-3, 20))
    assert t.b == (F(2, 5), 0, F(-3, 20), F(3, 4))


def test_constructor_reproduces_three_quarter_scheme():
    assert construct_third_order(F(3, 4)) == builtin_tableau("3/4")


@pytest.mark.parametrize("gamma", ["3/4", "13/50", "3/10", "1-1/sqrt2", "2/5"])
def test_constructed_tableaux_are_third_order(gamma):
    t = construct_third_order(gamma)
    rep = validate_order_conditions(t)
    assert rep.satisfied_order == 3
    assert check_stiffly_accurate(t)
    if isinstance(parse_gamma(gamma), F):
        assert rep.exact and all(r == 0 for r in rep.residuals.values())
    else:
        assert max(abs(float(r)) for r in rep.residuals.values()) < 1e-12


@pytest.mark.parametrize("gamma,step", [("1/2", 2), ("1/3", 2), ("1", 6)])
def test_constructor_breakdown(gamma, step):
    with pytest.raises(ConstructionError) as exc:
        construct_third_order(gamma)
    assert exc.value.step == step


def test_constructor_other_root_rejected():
    with pytest.raises(ConstructionError):
        construct_third_order("13/50", c4_choice="other")
    with pytest.raises(ConfigurationError):
        construct_third_order("3/4", c4_choice="middle")
    with pytest.raises(ConfigurationError):
        construct_third_order("1/5")


def test_order_report_detects_perturbation():
    t = builtin_tableau("3/4")
    bad = t.with_b((F(2, 5), F(1, 100), F(-3, 20), F(3, 4) - F(1, 100)))
    rep = validate_order_conditions(bad)
    assert rep.satisfied_order < 3
    assert any("FAIL" in ln for ln in rep.lines())


def test_parse_and_label_gamma():
    assert parse_gamma("0.26") == F(13, 50)
    assert parse_gamma("1 - 1/sqrt(2)") == GAMMA_SDIRK
    assert parse_gamma(1) == F(1)
    assert gamma_label(GAMMA_SDIRK) == "1-1/sqrt2"
    assert gamma_label(F(3, 4)) == "3/4"
    with pytest.raises(ConfigurationError):
        parse_gamma("abc")
    with pytest.raises(ConfigurationError):
        builtin_tableau("2/5")


@pytest.mark.parametrize("gamma", ["3/4", "1-1/sqrt2"])
def test_text_round_trip(gamma):
    t = builtin_tableau(gamma)
    back = tableau_from_text(tableau_to_text(t))
    assert back.s == t.s
    assert np.allclose(back.arrays()["beta"], t.arrays()["beta"], rtol=0, atol=0)
    if t.exact:
        assert back == RosenbrockTableau(t.gamma, t.a_tilde, t.alpha, t.gamma_mat, t.b, t.name)


def test_tableau_validation():
    z = F(0)
    with pytest.raises(ConfigurationError):
        RosenbrockTableau(F(1), ((z, F(1)), (z, z)), ((z, z), (z, z)), ((F(1), z), (z, F(1))), (F(1), z))
    with pytest.raises(ConfigurationError):
        RosenbrockTableau(F(1), ((z,),), ((z,),), ((F(2),),), (F(1),))
    with pytest.raises(ConfigurationError):
        tableau_from_text("stages: 2\n")


# --- stepping -------------------------------------------------------------


def _ode_problem(kappa=50.0):
    """u' = v - u^3, v' = -kappa (1 + u^2) v: F explicit, B(u) stiff."""

    def explicit(w, t):
        u, v = w
        return np.array([v - u**3, 0.0])

    def implicit(w):
        return np.array([[0.0, 0.0], [0.0, -kappa * (1 + w[0] ** 2)]])

    return PdeProblem(explicit, implicit, None)


def _reference(prob, w0, T):
    sol = solve_ivp(lambda t, w: prob.rhs(w, t), (0, T), w0, method="Radau", rtol=1e-13, atol=1e-14)
    return sol.y[:, -1]


def _observed_orders(prob, tab, w0, T, ns):
    ref = _reference(prob, w0, T)
    errs = []
    for n in ns:
        s = StateVector(w0)
        for _ in range(n):
            s = rosenbrock_step(prob, tab, s, T / n, strategy="dense")
        errs.append(np.abs(s.values - ref).max())
    return [math.log2(a / b) for a, b in zip(errs, errs[1:])]


@pytest.mark.parametrize("gamma", ["3/4", "13/50", "1-1/sqrt2"])
def test_rosenbrock_third_order_on_ode(gamma):
    orders = _observed_orders(_ode_problem(1.0), builtin_tableau(gamma), np.array([0.8, 1.0]), 0.5, (40, 80, 160))
    assert all(abs(o - 3) < 0.1 for o in orders)


@pytest.mark.parametrize("gamma", ["3/4", "13/50", "1-1/sqrt2"])
def test_rosenbrock_stiff_order_tends_to_three(gamma):
    # with kappa dt = O(1) the large-gamma scheme is pre-asymptotic (order reduction)
    orders = _observed_orders(_ode_problem(50.0), builtin_tableau(gamma), np.array([0.8, 1.0]), 0.5,
                              (80, 160, 320, 640, 1280))
    assert orders[-1] > 2.85
    if gamma == "3/4":
        assert all(b > a for a, b in zip(orders, orders[1:]))


def test_rosenbrock_one_factorization_per_step():
    prob = _ode_problem()
    st = StepStats()
    s = StateVector(np.array([0.5, 0.5]))
    for _ in range(5):
        s = rosenbrock_step(prob, builtin_tableau("3/4"), s, 0.01, st, strategy="dense")
    assert st.factorizations == 5 and st.jacobian_assemblies == 5 and st.solves == 20 and st.steps == 5


def test_rosenbrock_rejects_bad_dt():
    with pytest.raises(ConfigurationError):
        rosenbrock_step(_ode_problem(), one_stage_tableau(), StateVector(np.zeros(2)), 0.0)


@pytest.mark.parametrize("tab,order", [(si_euler_double(), 1), (two_stage_sdirk_double(), 2)])
def test_si_rk_step_order_against_expm(tab, order, rng):
    lam = np.array([[-0.5, 1.0], [-1.0, -0.5]])
    mu = np.array([[-3.0, 0.2], [0.1, -2.0]])
    prob = PdeProblem(lambda u, t: lam @ u, lambda u: mu, None)
    w0 = np.array([1.0, -0.5])
    T = 1.0
    ref = scipy.linalg.expm(T * (lam + mu)) @ w0
    errs = []
    for n in (20, 40, 80):
        s = StateVector(w0)
        for _ in range(n):
            s = si_rk_step(prob, tab, s, T / n, strategy="dense")
        errs.append(np.abs(s.values - ref).max())
    assert abs(math.log2(errs[-2] / errs[-1]) - order) < 0.15


def test_si_rk_zero_step_and_counts():
    prob = PdeProblem(lambda u, t: 0 * u, lambda u: -np.eye(2), None)
    s = StateVector(np.ones(2))
    assert np.array_equal(si_rk_step(prob, si_euler_double(), s, 0.0).values, s.values)
    st = StepStats()
    si_rk_step(prob, two_stage_sdirk_double(), s, 0.1, st, strategy="dense")
    assert st.factorizations == 2
    with pytest.raises(ConfigurationError):
        si_rk_step(prob, si_euler_double(), s, -0.1)
