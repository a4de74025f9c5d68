"""Finite-difference WENO convection with local Lax-Friedrichs splitting.

``weno_convection`` returns ``-f(u)_x`` on a periodic grid.  The flux is
split as ``f± = (f(u) ± alpha u) / 2`` with ``alpha = max|f'(u)|`` and each
part is reconstructed at the cell interfaces with the classical third order
(two sub-stencils) or fifth order (three sub-stencils) weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .._accel import njit, pick
from ..core import ConfigurationError, Grid, NumericalError

WENO32 = "WENO32"
WENO53 = "WENO53"


@dataclass(frozen=True)
class WenoConfig:
    variant: str = WENO32
    epsilon: float = 1e-6
    # "global_max" or a fixed positive float
    llf_alpha: Union[str, float] = "global_max"

    def __post_init__(self):
        if self.variant not in (WENO32, WENO53):
            raise ConfigurationError(f"unknown WENO variant {self.variant!r}")
        if not self.epsilon > 0:
            raise ConfigurationError("WENO epsilon must be positive")
        if self.llf_alpha != "global_max" and not float(self.llf_alpha) > 0:
            raise ConfigurationError("fixed LLF alpha must be positive")


# --- numpy kernels ---------------------------------------------------------
# Each returns the reconstructed interface value at i+1/2 from the
# left-biased stencil (a, b, c, d, e) = (v[i-2], v[i-1], v[i], v[i+1], v[i+2]).


def _weno3_np(b, c, d, eps):
    q0 = -0.5 * b + 1.5 * c
    q1 = 0.5 * c + 0.5 * d
    a0 = (1.0 / 3.0) / (eps + (c - b) ** 2) ** 2
    a1 = (2.0 / 3.0) / (eps + (d - c) ** 2) ** 2
    return (a0 * q0 + a1 * q1) / (a0 + a1)


def _weno5_np(a, b, c, d, e, eps):
    q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0
    q1 = (-b + 5.0 * c + 2.0 * d) / 6.0
    q2 = (2.0 * c + 5.0 * d - e) / 6.0
    s0 = 13.0 / 12.0 * (a - 2.0 * b + c) ** 2 + 0.25 * (a - 4.0 * b + 3.0 * c) ** 2
    s1 = 13.0 / 12.0 * (b - 2.0 * c + d) ** 2 + 0.25 * (b - d) ** 2
    s2 = 13.0 / 12.0 * (c - 2.0 * d + e) ** 2 + 0.25 * (3.0 * c - 4.0 * d + e) ** 2
    a0 = 0.1 / (eps + s0) ** 2
    a1 = 0.6 / (eps + s1) ** 2
    a2 = 0.3 / (eps + s2) ** 2
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)


def _interface_flux_np(fp, fm, order, eps):
    """Numerical flux at i+1/2 for all i (periodic)."""
    r = lambda v, s: np.roll(v, -s)  # noqa: E731  v[i+s]
    if order == 3:
        hp = _weno3_np(r(fp, -1), fp, r(fp, 1), eps)
        hm = _weno3_np(r(fm, 2), r(fm, 1), fm, eps)
    else:
        hp = _weno5_np(r(fp, -2), r(fp, -1), fp, r(fp, 1), r(fp, 2), eps)
        hm = _weno5_np(r(fm, 3), r(fm, 2), r(fm, 1), fm, r(fm, -1), eps)
    return hp + hm


# --- numba kernels ---------------------------------------------------------


@njit(cache=True)
def _interface_flux_nb(fp, fm, order, eps):
    n = fp.shape[0]
    h = np.empty(n)
    for i in range(n):
        im1 = (i - 1) % n
        ip1 = (i + 1) % n
        ip2 = (i + 2) % n
        if order == 3:
            b, c, d = fp[im1], fp[i], fp[ip1]
            a0 = (1.0 / 3.0) / (eps + (c - b) ** 2) ** 2
            a1 = (2.0 / 3.0) / (eps + (d - c) ** 2) ** 2
            hp = (a0 * (-0.5 * b + 1.5 * c) + a1 * (0.5 * c + 0.5 * d)) / (a0 + a1)
            b, c, d = fm[ip2], fm[ip1], fm[i]
            a0 = (1.0 / 3.0) / (eps + (c - b) ** 2) ** 2
            a1 = (2.0 / 3.0) / (eps + (d - c) ** 2) ** 2
            hm = (a0 * (-0.5 * b + 1.5 * c) + a1 * (0.5 * c + 0.5 * d)) / (a0 + a1)
        else:
            im2 = (i - 2) % n
            ip3 = (i + 3) % n
            hp = 0.0
            hm = 0.0
            for side in range(2):
                if side == 0:
                    a, b, c, d, e = fp[im2], fp[im1], fp[i], fp[ip1], fp[ip2]
                else:
                    a, b, c, d, e = fm[ip3], fm[ip2], fm[ip1], fm[i], fm[im1]
                q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0
                q1 = (-b + 5.0 * c + 2.0 * d) / 6.0
                q2 = (2.0 * c + 5.0 * d - e) / 6.0
                s0 = 13.0 / 12.0 * (a - 2.0 * b + c) ** 2 + 0.25 * (a - 4.0 * b + 3.0 * c) ** 2
                s1 = 13.0 / 12.0 * (b - 2.0 * c + d) ** 2 + 0.25 * (b - d) ** 2
                s2 = 13.0 / 12.0 * (c - 2.0 * d + e) ** 2 + 0.25 * (3.0 * c - 4.0 * d + e) ** 2
                w0 = 0.1 / (eps + s0) ** 2
                w1 = 0.6 / (eps + s1) ** 2
                w2 = 0.3 / (eps + s2) ** 2
                val = (w0 * q0 + w1 * q1 + w2 * q2) / (w0 + w1 + w2)
                if side == 0:
                    hp = val
                else:
                    hm = val
        h[i] = hp + hm
    return h


def _order(variant):
    return 3 if variant == WENO32 else 5


def weno_convection(
    grid: Grid,
    u: np.ndarray,
    flux: Callable[[np.ndarray], np.ndarray],
    config: WenoConfig = WenoConfig(),
    flux_derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    backend: Optional[str] = None,
) -> np.ndarray:
    """Approximate ``-f(u)_x`` by conservative flux differencing.

    ``flux_derivative`` gives ``f'(u)`` for the LLF viscosity; when absent the
    viscosity is estimated from divided differences of ``f`` between nodes.
    """
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise NumericalError("non-finite state in WENO convection")
    f = np.asarray(flux(u), dtype=float)
    if config.llf_alpha == "global_max":
        alpha = llf_alpha(u, f, flux_derivative)
    else:
        alpha = float(config.llf_alpha)
    fp = 0.5 * (f + alpha * u)
    fm = 0.5 * (f - alpha * u)
    kernel = pick(_interface_flux_nb, _interface_flux_np, backend)
    h = kernel(fp, fm, _order(config.variant), config.epsilon)
    return -(h - np.roll(h, 1)) / grid.dx


def llf_alpha(u, f, flux_derivative=None) -> float:
    if flux_derivative is not None:
        alpha = float(np.max(np.abs(flux_derivative(u))))
    else:
        du = np.roll(u, -1) - u
        df = np.roll(f, -1) - f
        with np.errstate(divide="ignore", invalid="ignore"):
            slopes = np.where(np.abs(du) > 1e-14, np.abs(df / du), 0.0)
        alpha = float(slopes.max())
    if not np.isfinite(alpha):
        raise NumericalError("non-finite LLF viscosity")
    return alpha


def nonlinear_weights(v: np.ndarray, variant: str = WENO32, epsilon: float = 1e-6) -> np.ndarray:
    """Nonlinear weights of the left-biased reconstruction at every interface.

    Returns an array of shape ``(n, r)`` with ``r = 2`` or ``3`` sub-stencils.
    """
    v = np.asarray(v, dtype=float)
    r = lambda s: np.roll(v, -s)  # noqa: E731
    if variant == WENO32:
        b, c, d = r(-1), v, r(1)
        alphas = [(1.0 / 3.0) / (epsilon + (c - b) ** 2) ** 2, (2.0 / 3.0) / (epsilon + (d - c) ** 2) ** 2]
    else:
        a, b, c, d, e = r(-2), r(-1), v, r(1), r(2)
        s0 = 13.0 / 12.0 * (a - 2 * b + c) ** 2 + 0.25 * (a - 4 * b + 3 * c) ** 2
        s1 = 13.0 / 12.0 * (b - 2 * c + d) ** 2 + 0.25 * (b - d) ** 2
        s2 = 13.0 / 12.0 * (c - 2 * d + e) ** 2 + 0.25 * (3 * c - 4 * d + e) ** 2
        alphas = [0.1 / (epsilon + s0) ** 2, 0.6 / (epsilon + s1) ** 2, 0.3 / (epsilon + s2) ** 2]
    al = np.stack(alphas, axis=1)
    return al / al.sum(axis=1, keepdims=True)
