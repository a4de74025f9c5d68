"""Semi-implicit predictor-corrector BDF schemes (SI-PC^mu BDFp).

Each step runs a semi-implicit predictor for ``u*`` and then ``mu``
corrections

    (I - dt b B(u*)) v = -sum_j a_j v^{n-j} + dt b F(u*, t_{n+1}),

each re-assembling ``B`` and ``F`` at the latest iterate.  The corrector is
linear in ``v``, so no Newton iteration is involved.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Tuple

import numpy as np

from .core import ConfigurationError, PdeProblem, StateVector, StepStats, assemble_split, check_finite
from .linalg import factor_shifted, solve

START_M_CHOICES = (1, 2, 4, 8, 16)


@dataclass(frozen=True)
class BdfScheme:
    """``v^{n+1} + sum_j a_j v^{n-j} = dt b_minus1 H(., v^{n+1})``."""

    p: int
    a_coeffs: Tuple[Fraction, ...]
    b_minus1: Fraction

    @property
    def a_float(self) -> np.ndarray:
        return np.array([float(a) for a in self.a_coeffs])


def _bdf_residuals(a, b, degree):
    # apply the scheme to t^m with t_{n+1} = 0, t_{n-j} = -(j+1), dt = 1
    res = []
    for m in range(degree + 1):
        lhs = (1 if m == 0 else 0) + sum(aj * Fraction(-(j + 1)) ** m for j, aj in enumerate(a))
        rhs = b * m if m == 1 else 0
        res.append(lhs - rhs)
    return res


def bdf_coefficients(p: int) -> BdfScheme:
    """Exact BDF coefficients from the backward-difference expansion."""
    if int(p) != p or not 1 <= p <= 4:
        raise ConfigurationError(f"BDF order must be 1..4, got {p}")
    p = int(p)
    lead = sum(Fraction(1, k) for k in range(1, p + 1))
    coef = []
    for i in range(1, p + 1):
        ci = sum(Fraction((-1) ** i * math.comb(k, i), k) for k in range(i, p + 1))
        coef.append(ci / lead)
    b = 1 / lead
    if any(_bdf_residuals(coef, b, p)):
        raise ArithmeticError("BDF coefficient derivation is not polynomially exact")
    return BdfScheme(p, tuple(coef), b)


@dataclass(frozen=True)
class PcConfig:
    """``predictor`` is ``'si-euler'`` or ``'chain'`` (SI-PC of order p-1)."""

    p: int
    mu: Optional[int] = None
    predictor: str = "si-euler"
    start_m: int = 4
    exact_start: bool = False

    def __post_init__(self):
        if not 1 <= self.p <= 4:
            raise ConfigurationError(f"corrector order must be 1..4, got {self.p}")
        if self.mu is None:
            object.__setattr__(self, "mu", self.p)
        if self.mu < 1:
            raise ConfigurationError("mu must be at least 1")
        if self.start_m not in START_M_CHOICES:
            raise ConfigurationError(f"start_m must be one of {START_M_CHOICES}")
        if self.predictor not in ("si-euler", "chain"):
            raise ConfigurationError(f"unknown predictor {self.predictor!r}")


class History:
    """The last ``size`` corrected states, oldest first, uniformly spaced."""

    def __init__(self, size: int, states: Iterable[StateVector] = ()):
        if size < 1:
            raise ConfigurationError("history size must be positive")
        self.size = size
        self._buf = deque(maxlen=size)
        for s in states:
            self.push(s)

    def push(self, s: StateVector):
        if self._buf:
            last = self._buf[-1]
            if s.values.shape != last.values.shape:
                raise ConfigurationError("history states differ in length")
            if len(self._buf) >= 2:
                h_prev = last.time - self._buf[-2].time
                h_new = s.time - last.time
                if not math.isclose(h_new, h_prev, rel_tol=1e-9, abs_tol=1e-14):
                    raise ConfigurationError("history must be uniformly spaced (constant dt)")
        self._buf.append(s)

    def __len__(self):
        return len(self._buf)

    @property
    def full(self) -> bool:
        return len(self._buf) == self.size

    @property
    def latest(self) -> StateVector:
        return self._buf[-1]

    def newest_first(self):
        return list(reversed(self._buf))

    def tail(self, k: int) -> "History":
        return History(k, list(self._buf)[-k:])


def _counted(stats):
    if stats is not None:
        stats.jacobian_assemblies += 1
        stats.factorizations += 1
        stats.solves += 1


def si_euler_predictor(
    problem: PdeProblem, u_n: StateVector, dt: float, stats: Optional[StepStats] = None, **solver
) -> StateVector:
    """``(I - dt B(u^n)) u* = u^n + dt F(u^n, t_n)``."""
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    f, b = assemble_split(problem, u_n)
    fac = factor_shifted(b, dt, **solver)
    u_star = solve(fac, u_n.values + dt * f)
    _counted(stats)
    check_finite(u_star, "predictor")
    return StateVector(u_star, u_n.time + dt)


def si_bdf_correct(
    problem: PdeProblem,
    hist: History,
    u_star: StateVector,
    dt: float,
    scheme: BdfScheme,
    stats: Optional[StepStats] = None,
    **solver,
) -> StateVector:
    """One linear corrector solve with ``B`` and ``F`` frozen at ``u*``."""
    if len(hist) != scheme.p:
        raise ConfigurationError(f"BDF{scheme.p} needs {scheme.p} history states, got {len(hist)}")
    t_new = hist.latest.time + dt
    bm = float(scheme.b_minus1)
    f, b = assemble_split(problem, StateVector(u_star.values, t_new))
    rhs = dt * bm * f
    for aj, v in zip(scheme.a_float, hist.newest_first()):
        rhs -= aj * v.values
    fac = factor_shifted(b, dt * bm, **solver)
    v_new = solve(fac, rhs)
    _counted(stats)
    check_finite(v_new, "corrector")
    return StateVector(v_new, t_new)


def si_pc_step(
    problem: PdeProblem, hist: History, dt: float, cfg: PcConfig, stats: Optional[StepStats] = None, **solver
) -> StateVector:
    """Predictor then ``mu`` corrections; returns ``v^{n+1}`` (history untouched)."""
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    scheme = bdf_coefficients(cfg.p)
    if cfg.predictor == "chain" and cfg.p > 1:
        lower = PcConfig(cfg.p - 1, cfg.p - 1, "chain", cfg.start_m)
        u_star = si_pc_step(problem, hist.tail(cfg.p - 1), dt, lower, stats, **solver)
    else:
        u_star = si_euler_predictor(problem, hist.latest, dt, stats, **solver)
    for _ in range(cfg.mu):
        u_star = si_bdf_correct(problem, hist, u_star, dt, scheme, stats, **solver)
    if stats is not None:
        stats.steps += 1
    return u_star


def starting_procedure(
    problem: PdeProblem, u0: StateVector, dt: float, cfg: PcConfig, stats: Optional[StepStats] = None, **solver
) -> History:
    """History ``u0, u(dt), ..., u((p-1) dt)`` for a ``p``-step start.

    Values come from the exact solution when ``cfg.exact_start`` is set,
    otherwise from SI-PC of order ``p-1`` run at step ``dt/m`` (itself
    started recursively) and sampled every ``m`` substeps.
    """
    p = cfg.p
    hist = History(p, [u0])
    if p == 1:
        return hist
    if cfg.exact_start:
        for k in range(1, p):
            t = u0.time + k * dt
            hist.push(StateVector(problem.exact(t), t))
        return hist
    m = cfg.start_m
    h = dt / m
    lower = PcConfig(p - 1, p - 1, cfg.predictor, m)
    sub = starting_procedure(problem, u0, h, lower, stats, **solver)
    done = p - 2  # substeps already covered by the sub-history
    for k, s in enumerate(list(sub._buf)[1:], start=1):
        if k % m == 0:
            hist.push(StateVector(s.values, u0.time + (k // m) * dt))
    target = (p - 1) * m
    while done < target:
        v = si_pc_step(problem, sub, h, lower, stats, **solver)
        sub.push(v)
        done += 1
        if done % m == 0:
            t = u0.time + (done // m) * dt
            hist.push(StateVector(v.values, t))
    return hist
