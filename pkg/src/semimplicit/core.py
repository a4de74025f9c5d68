"""Grids, state vectors, error norms and the split right-hand side contract.

Every integrator in the package consumes a :class:`PdeProblem`, which knows
how to produce the pair ``(F(U), B(U))`` such that ``F(U) + B(U) U`` is the
semi-discrete right-hand side.  ``F`` is treated explicitly; in ``B(U) V`` only
``V`` is treated implicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

MIN_POINTS = 8


class ConfigurationError(ValueError):
    """Invalid parameters or inconsistent setup."""


class NumericalError(ArithmeticError):
    """Non-finite data or a failed numerical operation."""


class SingularSystemError(NumericalError):
    def __init__(self, message, condition_estimate=math.inf):
        super().__init__(f"{message} (condition estimate {condition_estimate:.3e})")
        self.condition_estimate = condition_estimate


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid; node ``i`` sits at ``x_left + i*dx``."""

    n_points: int
    x_left: float
    x_right: float
    periodic: bool = True

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_points

    @property
    def length(self) -> float:
        return self.x_right - self.x_left

    @property
    def x(self) -> np.ndarray:
        return self.x_left + self.dx * np.arange(self.n_points)


def build_grid(x_left: float, x_right: float, n: int, min_points: int = MIN_POINTS) -> Grid:
    if not (math.isfinite(x_left) and math.isfinite(x_right)) or x_right <= x_left:
        raise ConfigurationError(f"empty or invalid domain ({x_left}, {x_right})")
    if int(n) != n or n < min_points:
        raise ConfigurationError(f"need at least {min_points} grid points, got {n}")
    return Grid(int(n), float(x_left), float(x_right))


@dataclass
class StateVector:
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise ConfigurationError("state values must be a 1-D array")
        check_finite(self.values, "state")

    def copy(self) -> "StateVector":
        return StateVector(self.values.copy(), self.time)


def check_finite(a, what="array"):
    if not np.all(np.isfinite(a)):
        raise NumericalError(f"non-finite entries in {what}")


@dataclass(frozen=True)
class ErrorNorms:
    l1: float
    l2: float
    linf: float


def discrete_norms(error, dx: float, normalize_by: Optional[float] = None) -> ErrorNorms:
    """Grid norms ``dx*sum|e|``, ``sqrt(dx*sum e^2)`` and ``max|e|``.

    ``normalize_by`` divides the integral norms by a domain measure ``L``
    (``l1/L``, ``l2/sqrt(L)``), i.e. mean-value norms.  Error tables in the
    literature for periodic problems are usually given in that form.
    """
    e = np.asarray(error, dtype=float)
    if e.size == 0:
        raise ConfigurationError("empty error vector")
    if not dx > 0:
        raise ConfigurationError("dx must be positive")
    ae = np.abs(e)
    l1 = dx * ae.sum()
    l2 = math.sqrt(dx * np.dot(e, e))
    if normalize_by is not None:
        l1 /= normalize_by
        l2 /= math.sqrt(normalize_by)
    return ErrorNorms(float(l1), float(l2), float(ae.max()))


@dataclass
class PdeProblem:
    """Semi-discrete problem ``dU/dt = F(U, t) + B(U) U``.

    ``explicit_part(u, t)`` returns ``F`` (convection plus source) and
    ``implicit_matrix(u)`` returns ``B`` as a
    :class:`~semimplicit.spatial.StencilMatrix` or a dense ndarray.  ``grid``
    may be ``None`` for plain ODE systems.
    """

    explicit_part: Callable[[np.ndarray, float], np.ndarray]
    implicit_matrix: Callable[[np.ndarray], object]
    grid: Optional[Grid] = None
    order_k: int = 2
    source: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    exact_solution: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    flux_derivative_bound: Optional[Callable[[np.ndarray], float]] = None
    name: str = ""
    info: dict = field(default_factory=dict)

    def split(self, u: np.ndarray, t: float):
        return self.explicit_part(u, t), self.implicit_matrix(u)

    def rhs(self, u: np.ndarray, t: float) -> np.ndarray:
        f, b = self.split(u, t)
        return f + b @ u

    def exact(self, t: float) -> np.ndarray:
        if self.exact_solution is None:
            raise ConfigurationError(f"problem {self.name!r} has no exact solution")
        return np.asarray(self.exact_solution(self.grid.x, t), dtype=float)


@dataclass
class StepStats:
    """Work counters filled in by the steppers when passed in."""

    jacobian_assemblies: int = 0
    rhs_assemblies: int = 0
    factorizations: int = 0
    solves: int = 0
    steps: int = 0

    def reset(self):
        self.jacobian_assemblies = self.rhs_assemblies = 0
        self.factorizations = self.solves = self.steps = 0


def assemble_split(problem: PdeProblem, u: StateVector):
    """Return ``(F(U), B(U))`` for state ``u`` at its own time."""
    if problem.grid is not None and u.values.shape[0] != problem.grid.n_points:
        raise ConfigurationError(
            f"state has {u.values.shape[0]} entries, grid has {problem.grid.n_points}"
        )
    check_finite(u.values, "state")
    f, b = problem.split(u.values, u.time)
    check_finite(f, "explicit part")
    return f, b
