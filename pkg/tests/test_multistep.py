import math
from fractions import Fraction as F

import numpy as np
import pytest

from semimplicit.core import ConfigurationError, PdeProblem, StateVector, StepStats, build_grid
from semimplicit.harness.cases import CASES
from semimplicit.harness.verify import fitted_slope, pc_errors
from semimplicit.multistep import (
    History,
    PcConfig,
    bdf_coefficients,
    si_bdf_correct,
    si_euler_predictor,
    si_pc_step,
    starting_procedure,
)
from semimplicit.spatial import second_derivative

KNOWN = {
    1: ((F(-1),), F(1)),
    2: ((F(-4, 3), F(1, 3)), F(2, 3)),
    3: ((F(-18, 11), F(9, 11), F(-2, 11)), F(6, 11)),
    4: ((F(-48, 25), F(36, 25), F(-16, 25), F(3, 25)), F(12, 25)),
}


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_bdf_coefficients_exact(p):
    s = bdf_coefficients(p)
    assert s.a_coeffs == KNOWN[p][0]
    assert s.b_minus1 == KNOWN[p][1]


@pytest.mark.parametrize("p", [0, 5, 2.5])
def test_bdf_order_range(p):
    with pytest.raises(ConfigurationError):
        bdf_coefficients(p)


def _linear(lam, mu):
    return PdeProblem(lambda u, t: lam * u, lambda u: np.array([[mu]]), None)


def test_predictor_matches_imex_euler():
    lam, mu, dt = -0.7, -3.0, 0.2
    u = si_euler_predictor(_linear(lam, mu), StateVector(np.array([1.3])), dt, strategy="dense")
    assert u.values[0] == pytest.approx((1 + dt * lam) / (1 - dt * mu) * 1.3, rel=1e-15)
    zero = PdeProblem(lambda u, t: 0 * u, lambda u: np.zeros((1, 1)), None)
    assert si_euler_predictor(zero, StateVector(np.array([2.0])), 0.5).values[0] == 2.0


def test_predictor_contracts_on_stiff_heat():
    g = build_grid(0, 2 * math.pi, 64)
    lap = second_derivative(g)
    prob = PdeProblem(lambda u, t: np.zeros_like(u), lambda u: lap, g)
    u = StateVector(np.random.default_rng(3).standard_normal(64))
    for dt in (1e-3, 100 * g.dx**2, 10.0):
        assert np.linalg.norm(si_euler_predictor(prob, u, dt).values) <= np.linalg.norm(u.values) + 1e-12


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_corrector_polynomial_exactness(p):
    # u' = q'(t) as explicit source with B = 0: BDFp is exact for degree <= p
    coeffs = np.arange(1, p + 2, dtype=float)
    q = np.polynomial.Polynomial(coeffs)
    dq = q.deriv()
    prob = PdeProblem(lambda u, t: np.array([dq(t)]), lambda u: np.zeros((1, 1)), None)
    dt = 0.3
    hist = History(p, [StateVector(np.array([q(j * dt)]), j * dt) for j in range(p)])
    v = si_bdf_correct(prob, hist, StateVector(np.zeros(1)), dt, bdf_coefficients(p), strategy="dense")
    assert v.values[0] == pytest.approx(q(p * dt), rel=1e-13)


def test_corrector_matches_classical_bdf3_recurrence():
    mu, dt = -20.0, 0.05
    hist_vals = [1.0, 0.5, 0.3]
    hist = History(3, [StateVector(np.array([v]), k * dt) for k, v in enumerate(hist_vals)])
    v = si_bdf_correct(_linear(0.0, mu), hist, StateVector(np.array([123.0])), dt, bdf_coefficients(3),
                       strategy="dense")
    un, un1, un2 = hist_vals[2], hist_vals[1], hist_vals[0]
    ref = (18 / 11 * un - 9 / 11 * un1 + 2 / 11 * un2) / (1 - 6 / 11 * dt * mu)
    assert v.values[0] == pytest.approx(ref, rel=1e-14)


def test_corrector_history_length_checked():
    hist = History(2, [StateVector(np.ones(1)), StateVector(np.ones(1), 0.1)])
    with pytest.raises(ConfigurationError):
        si_bdf_correct(_linear(0, -1), hist, StateVector(np.ones(1)), 0.1, bdf_coefficients(3))


def test_history_rules():
    h = History(3)
    h.push(StateVector(np.ones(2), 0.0))
    h.push(StateVector(np.ones(2), 0.1))
    with pytest.raises(ConfigurationError):
        h.push(StateVector(np.ones(2), 0.25))
    with pytest.raises(ConfigurationError):
        h.push(StateVector(np.ones(3), 0.2))
    h.push(StateVector(np.ones(2), 0.2))
    h.push(StateVector(2 * np.ones(2), 0.3))
    assert len(h) == 3 and h.full and h.latest.time == 0.3
    assert [s.time for s in h.newest_first()] == [0.3, 0.2, 0.1]
    with pytest.raises(ConfigurationError):
        History(0)


def test_pc_config_validation():
    assert PcConfig(3).mu == 3
    for kw in ({"p": 5}, {"p": 2, "mu": 0}, {"p": 2, "start_m": 3}, {"p": 2, "predictor": "rk4"}):
        with pytest.raises(ConfigurationError):
            PcConfig(**kw)


@pytest.mark.parametrize("mu", [1, 2, 3, 4])
def test_factorizations_per_step(mu):
    case = CASES["M4_biharmonic"]
    prob = case.problem(32)
    x = prob.grid.x
    hist = History(3, [StateVector(case.exact(x, k * 0.01), k * 0.01) for k in range(3)])
    st = StepStats()
    si_pc_step(prob, hist, 0.01, PcConfig(3, mu), st)
    assert st.factorizations == mu + 1 and st.solves == mu + 1 and st.steps == 1


def test_chain_predictor_runs_and_is_accurate():
    errs = {}
    for pred in ("si-euler", "chain"):
        prob = CASES["M1_diffusion"].problem(40)
        x = prob.grid.x
        dt = 0.05
        hist = History(3, [StateVector(np.sin(x - k * dt), k * dt) for k in range(3)])
        v = si_pc_step(prob, hist, dt, PcConfig(3, 1, pred))
        errs[pred] = np.abs(v.values - np.sin(x - 3 * dt)).max()
    assert errs["chain"] < errs["si-euler"]


def test_starting_procedure_accuracy():
    case = CASES["M1_diffusion"]
    prob = case.problem(80)
    x = prob.grid.x
    dt = prob.grid.dx
    u0 = StateVector(case.exact(x, 0.0))
    assert len(starting_procedure(prob, u0, dt, PcConfig(1))) == 1
    hist = starting_procedure(prob, u0, dt, PcConfig(3, start_m=4))
    times = [s.time for s in hist.newest_first()][::-1]
    assert times == pytest.approx([0, dt, 2 * dt])
    err = max(np.abs(s.values - case.exact(x, s.time)).max() for s in hist.newest_first())
    assert err < 1e-4
    exact = starting_procedure(prob, u0, dt, PcConfig(3, exact_start=True))
    assert np.array_equal(exact.latest.values, case.exact(x, 2 * dt))


def test_corrector_iteration_orders():
    ns = [40 * 2**k for k in range(6)]
    e1, e2, e3 = (pc_errors(3, mu, ns) for mu in (1, 2, 3))
    assert 1.7 <= fitted_slope(ns, e1) <= 2.3
    assert fitted_slope(ns, e2) >= 2.8
    assert fitted_slope(ns, e3) >= 2.8
    assert e3[-1] <= 1.05 * e2[-1]


def test_bdf2_mu1_is_already_second_order():
    # p* = p - 1: one correction reaches the corrector order
    ns = [40 * 2**k for k in range(4)]
    assert fitted_slope(ns, pc_errors(2, 1, ns)) > 1.8
