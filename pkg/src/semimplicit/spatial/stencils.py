"""Cyclic banded stencil matrices and the composed implicit operators.

A :class:`StencilMatrix` of half-bandwidth ``w`` stores
``bands[i, k] = M[i, (i + k - w) mod n]`` for ``k = 0..2w``.  Products,
diagonal scalings and matvecs all stay in this O(n w) form.
"""

from __future__ import annotations

import warnings

import numpy as np

from ..core import ConfigurationError, Grid, NumericalError

_D1 = {
    2: np.array([-0.5, 0.0, 0.5]),
    4: np.array([1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12]),
}
_D2 = {
    2: np.array([1.0, -2.0, 1.0]),
    4: np.array([-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12]),
}


class StencilMatrix:
    """Square cyclic banded matrix."""

    __array_priority__ = 1000

    def __init__(self, bands: np.ndarray):
        bands = np.asarray(bands, dtype=float)
        if bands.ndim != 2 or bands.shape[1] % 2 != 1:
            raise ConfigurationError("bands must have shape (n, 2w+1)")
        self.bands = bands
        self.bands.flags.writeable = False

    @property
    def n(self) -> int:
        return self.bands.shape[0]

    @property
    def bandwidth(self) -> int:
        return (self.bands.shape[1] - 1) // 2

    @property
    def shape(self):
        return (self.n, self.n)

    @classmethod
    def circulant(cls, n: int, coeffs) -> "StencilMatrix":
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(np.tile(coeffs, (n, 1)))

    @classmethod
    def diagonal(cls, d) -> "StencilMatrix":
        d = np.asarray(d, dtype=float)
        return cls(d[:, None].copy())

    @classmethod
    def identity(cls, n: int) -> "StencilMatrix":
        return cls(np.ones((n, 1)))

    def _offsets(self):
        w = self.bandwidth
        return range(-w, w + 1)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        y = np.zeros(x.shape, dtype=np.result_type(x, self.bands))
        w = self.bandwidth
        col = self.bands if x.ndim == 1 else self.bands[:, :, None]
        for k in range(2 * w + 1):
            sl = col[:, k] if x.ndim == 1 else col[:, k, :]
            y += sl * np.roll(x, -(k - w), axis=0)
        return y

    def compose(self, other: "StencilMatrix") -> "StencilMatrix":
        if other.n != self.n:
            raise ConfigurationError("size mismatch in stencil product")
        wa, wb = self.bandwidth, other.bandwidth
        wc = wa + wb
        if 2 * wc + 1 > self.n:
            raise ConfigurationError(
                f"grid of {self.n} points too small for composed stencil half-width {wc}"
            )
        out = np.zeros((self.n, 2 * wc + 1))
        for ka in range(2 * wa + 1):
            shifted = np.roll(other.bands, -(ka - wa), axis=0)
            out[:, ka : ka + 2 * wb + 1] += self.bands[:, ka : ka + 1] * shifted
        return StencilMatrix(out)

    def scale_rows(self, d) -> "StencilMatrix":
        """``diag(d) @ self``."""
        return StencilMatrix(np.asarray(d, dtype=float)[:, None] * self.bands)

    def scale_cols(self, d) -> "StencilMatrix":
        """``self @ diag(d)``."""
        d = np.asarray(d, dtype=float)
        w = self.bandwidth
        out = np.empty_like(self.bands)
        for k in range(2 * w + 1):
            out[:, k] = self.bands[:, k] * np.roll(d, -(k - w))
        return StencilMatrix(out)

    def widen(self, w: int) -> np.ndarray:
        """Band array padded with zeros to half-bandwidth ``w``."""
        cur = self.bandwidth
        if w < cur:
            raise ValueError("cannot narrow a stencil matrix")
        out = np.zeros((self.n, 2 * w + 1))
        out[:, w - cur : w + cur + 1] = self.bands
        return out

    def transpose(self) -> "StencilMatrix":
        w = self.bandwidth
        out = np.empty_like(self.bands)
        for k in range(2 * w + 1):
            out[:, 2 * w - k] = np.roll(self.bands[:, k], k - w)
        return StencilMatrix(out)

    @property
    def T(self):
        return self.transpose()

    def to_dense(self) -> np.ndarray:
        n, w = self.n, self.bandwidth
        m = np.zeros((n, n))
        rows = np.arange(n)
        for k in range(2 * w + 1):
            np.add.at(m, (rows, (rows + k - w) % n), self.bands[:, k])
        return m

    def column_sums(self) -> np.ndarray:
        w = self.bandwidth
        s = np.zeros(self.n)
        for k in range(2 * w + 1):
            s += np.roll(self.bands[:, k], k - w)
        return s

    def row_sums(self) -> np.ndarray:
        return self.bands.sum(axis=1)

    def __matmul__(self, other):
        if isinstance(other, StencilMatrix):
            return self.compose(other)
        return self.matvec(other)

    def __add__(self, other):
        if not isinstance(other, StencilMatrix):
            return NotImplemented
        w = max(self.bandwidth, other.bandwidth)
        return StencilMatrix(self.widen(w) + other.widen(w))

    def __sub__(self, other):
        if not isinstance(other, StencilMatrix):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return StencilMatrix(-self.bands)

    def __mul__(self, c):
        return StencilMatrix(float(c) * self.bands)

    __rmul__ = __mul__

    def __repr__(self):
        return f"StencilMatrix(n={self.n}, bandwidth={self.bandwidth})"


def _check_order(order):
    if order not in _D1:
        raise ConfigurationError(f"unsupported stencil order {order}; use 2 or 4")


def first_derivative(grid: Grid, order: int = 4) -> StencilMatrix:
    _check_order(order)
    return StencilMatrix.circulant(grid.n_points, _D1[order] / grid.dx)


def second_derivative(grid: Grid, order: int = 4) -> StencilMatrix:
    _check_order(order)
    return StencilMatrix.circulant(grid.n_points, _D2[order] / grid.dx**2)


def _coefficient(a, n, what):
    a = np.broadcast_to(np.asarray(a, dtype=float), (n,))
    if not np.all(np.isfinite(a)):
        raise NumericalError(f"non-finite {what}")
    return a


# staggered operators: row i of the interface stencil produces the value at
# x_{i+1/2}; the divergence maps interface values back to the nodes
_STAG_GRAD = {
    2: np.array([0.0, -1.0, 1.0]),
    4: np.array([0.0, 1.0 / 24, -27.0 / 24, 27.0 / 24, -1.0 / 24]),
}
_STAG_DIV = {
    2: np.array([-1.0, 1.0, 0.0]),
    4: np.array([1.0 / 24, -27.0 / 24, 27.0 / 24, -1.0 / 24, 0.0]),
}
_STAG_MID = {
    2: np.array([0.0, 0.5, 0.5]),
    4: np.array([0.0, -1.0 / 16, 9.0 / 16, 9.0 / 16, -1.0 / 16]),
}

DIFFUSION_FORMS = ("flux", "composed", "expanded")


def diffusion_matrix(grid: Grid, a_of_u, order: int = 4, form: str = "flux") -> StencilMatrix:
    """Matrix of ``V -> (a V_x)_x`` with ``a`` sampled at the nodes.

    ``form='flux'`` differences interface fluxes ``a_{i+1/2} (V_x)_{i+1/2}``
    (conservative, damps every nonzero mode).  ``'composed'`` gives
    ``D1 diag(a) D1``, whose grid-scale sawtooth sits in the kernel, and
    ``'expanded'`` gives ``a D2 + (D1 a) D1``.
    """
    _check_order(order)
    a = _coefficient(a_of_u, grid.n_points, "diffusion coefficient")
    if np.any(a < 0):
        warnings.warn("negative diffusion coefficient entries", RuntimeWarning, stacklevel=2)
    n = grid.n_points
    if form == "flux":
        a_half = StencilMatrix.circulant(n, _STAG_MID[order]).matvec(a)
        grad = StencilMatrix.circulant(n, _STAG_GRAD[order] / grid.dx)
        div = StencilMatrix.circulant(n, _STAG_DIV[order] / grid.dx)
        return div @ grad.scale_rows(a_half)
    if form == "composed":
        d1 = first_derivative(grid, order)
        return d1.scale_cols(a) @ d1
    if form == "expanded":
        d1 = first_derivative(grid, order)
        return second_derivative(grid, order).scale_rows(a) + d1.scale_rows(d1.matvec(a))
    raise ConfigurationError(f"unknown diffusion form {form!r}")


DISPERSIVE_FORMS = ("expanded", "nested")


def dispersive_matrix(grid: Grid, u, exponent_n: int, order: int = 4, form: str = "expanded") -> StencilMatrix:
    """Matrix ``B(U)`` with ``B(U) U = (U (U^n)_xx)_x``.

    ``form='nested'`` is ``D1 diag(U) D2 diag(U^(n-1))``, i.e. the operator
    ``V -> (U (U^(n-1) V)_xx)_x``.  ``form='expanded'`` first applies the
    product rule, ``(u^n)_xx = n u^(n-1) u_xx + n(n-1) u^(n-2) u_x^2``, and
    keeps the highest derivative on ``V``:

        V -> n (U^n V_xx)_x + n(n-1) (U^(n-1) U_x V_x)_x.

    Both agree at ``V = U`` and coincide for ``n = 1``.  In the expanded form
    the explicit argument enters through ``U`` and ``U_x`` only, so the stiff
    third derivative acts solely on the implicit factor.
    """
    if exponent_n not in (1, 2):
        raise ConfigurationError(f"unsupported dispersive exponent n={exponent_n}")
    if form not in DISPERSIVE_FORMS:
        raise ConfigurationError(f"unknown dispersive form {form!r}")
    u = _coefficient(u, grid.n_points, "state")
    d1 = first_derivative(grid, order)
    d2 = second_derivative(grid, order)
    if form == "nested" or exponent_n == 1:
        inner = d2 if exponent_n == 1 else d2.scale_cols(u ** (exponent_n - 1))
        return d1.scale_cols(u) @ inner
    n = exponent_n
    main = d1.scale_cols(n * u**n) @ d2
    lower = d1.scale_cols(n * (n - 1) * u ** (n - 1) * d1.matvec(u)) @ d1
    return main + lower


def biharmonic_matrix(grid: Grid, u, a_func, a_form: str = "of_u", order: int = 4) -> StencilMatrix:
    """Matrix of ``V -> (a V_xx)_xx`` with ``a = a_func(U)`` or ``a_func(U_x)``."""
    u = _coefficient(u, grid.n_points, "state")
    d2 = second_derivative(grid, order)
    if a_form == "of_u":
        arg = u
    elif a_form == "of_ux":
        arg = first_derivative(grid, order) @ u
    else:
        raise ConfigurationError(f"unknown biharmonic coefficient form {a_form!r}")
    a = _coefficient(a_func(arg), grid.n_points, "biharmonic coefficient")
    return d2.scale_cols(a) @ d2
