"""One-step semi-implicit integrators: Rosenbrock-type and generic SI-RK."""

from __future__ import annotations

from functools import lru_cache
from typing import Optional

import numpy as np

from ..core import ConfigurationError, PdeProblem, StateVector, StepStats, assemble_split, check_finite
from ..linalg import factor_shifted, solve
from .tableau import DoubleButcherTableau, RosenbrockTableau


@lru_cache(maxsize=64)
def _coeffs(t: RosenbrockTableau):
    return t.arrays()


def _combine(base, coeffs, ks):
    out = base.copy()
    for c, k in zip(coeffs, ks):
        if c != 0.0:
            out += c * k
    return out


def rosenbrock_step(
    problem: PdeProblem,
    t: RosenbrockTableau,
    u_n: StateVector,
    dt: float,
    stats: Optional[StepStats] = None,
    strategy: str = "banded",
    backend: Optional[str] = None,
) -> StateVector:
    """Advance one step with the Jacobian ``J = B(U^n)`` frozen for all stages.

    Stage right-hand sides re-evaluate ``F`` and ``B`` at the explicit stage
    value ``U^i`` (time ``t_n + c_i dt``); the solver matrix ``I - dt gamma J``
    is factored once.
    """
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    c = _coeffs(t)
    at, al, gm, bw, ct = c["a_tilde"], c["alpha"], c["gamma_mat"], c["b"], c["c_tilde"]
    g = float(t.gamma)
    u = u_n.values
    f0, jac = assemble_split(problem, u_n)
    fac = factor_shifted(jac, dt * g, strategy=strategy, backend=backend)
    if stats is not None:
        stats.jacobian_assemblies += 1
        stats.factorizations += 1
    ks = []
    for i in range(t.s):
        ui = _combine(u, at[i, :i], ks)
        vi = _combine(u, al[i, :i], ks)
        if i == 0:
            fi, bi = f0, jac
        else:
            fi, bi = problem.split(ui, u_n.time + ct[i] * dt)
            check_finite(fi, "stage explicit part")
            if stats is not None:
                stats.rhs_assemblies += 1
        rhs = fi + bi @ vi
        if i > 0 and np.any(gm[i, :i] != 0.0):
            rhs = rhs + jac @ _combine(np.zeros_like(u), gm[i, :i], ks)
        k = solve(fac, dt * rhs)
        if stats is not None:
            stats.solves += 1
        ks.append(k)
    u_new = _combine(u, bw, ks)
    check_finite(u_new, "Rosenbrock update")
    if stats is not None:
        stats.steps += 1
    return StateVector(u_new, u_n.time + dt)


def si_rk_step(
    problem: PdeProblem,
    t: DoubleButcherTableau,
    u_n: StateVector,
    dt: float,
    stats: Optional[StepStats] = None,
    strategy: str = "banded",
    backend: Optional[str] = None,
) -> StateVector:
    """Partitioned SI-RK step; ``I - dt a_ii B(U^i)`` is refactored per stage."""
    if dt < 0:
        raise ConfigurationError("dt must be non-negative")
    if dt == 0:
        return u_n.copy()
    u = u_n.values
    ct = t.a_tilde.sum(axis=1)
    ks = []
    for i in range(t.s):
        ui = _combine(u, t.a_tilde[i, :i], ks)
        vi = _combine(u, t.a[i, :i], ks)
        fi, bi = problem.split(ui, u_n.time + ct[i] * dt)
        check_finite(fi, "stage explicit part")
        rhs = dt * (fi + bi @ vi)
        aii = t.a[i, i]
        if aii != 0.0:
            fac = factor_shifted(bi, dt * aii, strategy=strategy, backend=backend)
            k = solve(fac, rhs)
            if stats is not None:
                stats.factorizations += 1
                stats.solves += 1
        else:
            k = rhs
        if stats is not None:
            stats.rhs_assemblies += 1
        ks.append(k)
    u_new = _combine(u, t.b, ks)
    check_finite(u_new, "SI-RK update")
    if stats is not None:
        stats.steps += 1
    return StateVector(u_new, u_n.time + dt)
