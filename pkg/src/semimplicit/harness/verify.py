"""Fast invariant checks run by ``semimplicit verify``.

Each check returns a :class:`CheckResult`; none takes more than a few
seconds.  The full acceptance suite lives in the test directory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from ..core import PdeProblem, StateVector, StepStats, assemble_split
from ..multistep import History, PcConfig, si_pc_step
from ..rosenbrock import BUILTIN_GAMMAS, builtin_tableau, check_stiffly_accurate, rosenbrock_step, validate_order_conditions
from ..spatial import WenoConfig
from ..stability import r_at_infinity, stability_function
from .cases import CASES, TestCase


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}: {self.detail}"


def linear_problem(lam: float, mu: float) -> PdeProblem:
    """Scalar ``u' = lam u + mu u`` with ``lam`` explicit and ``mu`` implicit."""
    return PdeProblem(lambda u, t: lam * u, lambda u: np.array([[mu]]), None, order_k=2, name="linear test")


def check_tableaux() -> CheckResult:
    bad = []
    for label in BUILTIN_GAMMAS:
        t = builtin_tableau(label)
        rep = validate_order_conditions(t)
        if rep.satisfied_order < 3 or not check_stiffly_accurate(t):
            bad.append(label)
    return CheckResult("tableaux order 3 and stiffly accurate", not bad, f"failing: {bad}" if bad else "all built-ins")


def check_stability_identities() -> CheckResult:
    worst_origin = worst_inf = 0.0
    for label in BUILTIN_GAMMAS:
        t = builtin_tableau(label)
        worst_origin = max(worst_origin, abs(stability_function(t, 0.0, 0.0) - 1.0))
        worst_inf = max(worst_inf, abs(r_at_infinity(t)))
    ok = worst_origin < 1e-15 and worst_inf < 1e-14
    return CheckResult("R(0,0) = 1 and R_inf = 0", ok, f"|R(0,0)-1| <= {worst_origin:.1e}, |R_inf| <= {worst_inf:.1e}")


def check_linear_exactness(points: int = 5) -> CheckResult:
    grid = np.linspace(-2.0, 0.5, points)
    worst = 0.0
    for label in BUILTIN_GAMMAS:
        t = builtin_tableau(label)
        for zl in grid:
            for zm in grid:
                prob = linear_problem(zl, zm)
                u1 = rosenbrock_step(prob, t, StateVector(np.array([1.0])), 1.0, strategy="dense").values[0]
                worst = max(worst, abs(u1 - stability_function(t, zl, zm).real))
    return CheckResult("one step on the linear test equals R", worst < 1e-13, f"max deviation {worst:.2e}")


def check_solve_counts() -> CheckResult:
    case = CASES["M1_diffusion"]
    prob = case.problem(32)
    x = prob.grid.x
    st = StepStats()
    rosenbrock_step(prob, builtin_tableau("3/4"), StateVector(case.exact(x, 0.0)), 0.01, st)
    ok = st.factorizations == 1
    msgs = [f"rosenbrock {st.factorizations}"]
    for mu in (1, 2, 3):
        hist = History(3, [StateVector(case.exact(x, k * 0.01), k * 0.01) for k in range(3)])
        st = StepStats()
        si_pc_step(prob, hist, 0.01, PcConfig(3, mu), st)
        ok &= st.factorizations == mu + 1
        msgs.append(f"mu={mu}: {st.factorizations}")
    return CheckResult("factorizations per step", ok, ", ".join(msgs))


def check_conservation_structure() -> CheckResult:
    case = CASES["R2_kdv"]
    prob = case.problem(64)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(3):
        u = case.exact(prob.grid.x, 0.0) + 0.05 * rng.standard_normal(prob.grid.n_points)
        f, b = assemble_split(prob, StateVector(u))
        worst = max(worst, np.abs(b.column_sums()).max(), abs(f.sum()))
    return CheckResult("1^T B = 0 and 1^T F = 0 for the dispersive case", worst < 1e-12, f"max {worst:.1e}")


def consistency_residual(case: TestCase, n: int) -> float:
    """``max|F + B U - u_t|`` at ``t = 0`` with ``u_t`` by a central difference.

    WENO runs with linear weights (huge ``epsilon``), which isolates the
    problem setup from the limiter: with small ``epsilon`` the third-order
    reconstruction loses accuracy at critical points of ``u``.
    """
    prob = case.problem(n, weno=WenoConfig(case.weno, 1e30))
    x = prob.grid.x
    h = 1e-4
    ut = (case.exact(x, h) - case.exact(x, -h)) / (2 * h)
    return float(np.abs(prob.rhs(case.exact(x, 0.0), 0.0) - ut).max())


def check_case_consistency() -> CheckResult:
    msgs, ok = [], True
    for cid, case in CASES.items():
        r1, r2 = consistency_residual(case, 80), consistency_residual(case, 160)
        order = math.log2(r1 / r2)
        ok &= order > 2.5
        msgs.append(f"{cid.split('_')[0]}{'L10' if 'lambda10' in cid else ''} {order:.2f}")
    return CheckResult("spatial residual order at t = 0", ok, ", ".join(msgs))


CHECKS: List[Callable[[], CheckResult]] = [
    check_tableaux,
    check_stability_identities,
    check_linear_exactness,
    check_solve_counts,
    check_conservation_structure,
    check_case_consistency,
]


def run_checks() -> List[CheckResult]:
    return [c() for c in CHECKS]


# --- scalar problem for the predictor-corrector order study ------------------


def scalar_problem(kappa: float = 1.0) -> PdeProblem:
    """``u' = -kappa u (1 + u^2)`` with ``B(u) = -kappa (1 + u^2)`` and ``F = 0``."""
    return PdeProblem(
        lambda u, t: np.zeros_like(u),
        lambda u: np.array([[-kappa * (1.0 + u[0] ** 2)]]),
        None,
        name="scalar cubic decay",
    )


def scalar_exact(u0: float, kappa: float, t: float) -> float:
    """``u = sqrt(w / (1 - w))`` with ``w = w0 exp(-2 kappa t)``."""
    w = u0**2 / (1.0 + u0**2) * math.exp(-2.0 * kappa * t)
    return math.sqrt(w / (1.0 - w))


def pc_errors(p: int, mu: int, ns, kappa: float = 1.0, u0: float = 0.5, T: float = 1.0) -> np.ndarray:
    """Final-time errors of SI-PC^mu BDFp on :func:`scalar_problem` from exact history."""
    prob = scalar_problem(kappa)
    cfg = PcConfig(p, mu)
    errs = []
    for n in ns:
        dt = T / n
        hist = History(p, [StateVector(np.array([scalar_exact(u0, kappa, j * dt)]), j * dt) for j in range(p)])
        for _ in range(p - 1, n):
            hist.push(si_pc_step(prob, hist, dt, cfg, strategy="dense"))
        errs.append(abs(hist.latest.values[0] - scalar_exact(u0, kappa, T)))
    return np.array(errs)


def fitted_slope(ns, errs) -> float:
    """Least-squares slope of ``log err`` against ``log dt``."""
    return float(np.polyfit(-np.log(np.asarray(ns, dtype=float)), np.log(errs), 1)[0])
