"""Factor and solve the shifted systems ``(I - c B) x = r``.

For a cyclic banded ``B`` the system matrix splits as ``A = A_band + U V^T``
where ``A_band`` is its non-wrapping band and ``U V^T`` holds the periodic
corner blocks (rank ``<= 2w``).  ``A_band`` is factored by a banded LU with
partial pivoting and the corners are restored with the Woodbury identity,
so each solve costs O(n w^2).  A dense LU path exists for verification and
for small ODE systems.
"""

from __future__ import annotations

import logging
import warnings
from typing import Optional

import numpy as np
import scipy.linalg

from ._accel import njit, pick
from .core import ConfigurationError, SingularSystemError
from .spatial.stencils import StencilMatrix

log = logging.getLogger(__name__)

_PIVOT_TOL = 1e2 * np.finfo(float).eps


# Row-band storage: R[i, j - i + kl] = A[i, j] for j in [i - kl, i + ku + kl];
# the extra kl columns receive fill from row interchanges.


@njit(cache=True)
def _gbtrf_nb(r, lmul, piv, kl, ku, tol):
    n = r.shape[0]
    for k in range(n):
        m = min(kl, n - 1 - k)
        p = k
        best = abs(r[k, kl])
        for q in range(1, m + 1):
            v = abs(r[k + q, kl - q])
            if v > best:
                best = v
                p = k + q
        piv[k] = p
        if best <= tol:
            return k + 1
        jmax = min(k + kl + ku, n - 1)
        if p != k:
            s = p - k
            for t in range(jmax - k + 1):
                tmp = r[k, kl + t]
                r[k, kl + t] = r[p, kl + t - s]
                r[p, kl + t - s] = tmp
        pivot = r[k, kl]
        for q in range(1, m + 1):
            lv = r[k + q, kl - q] / pivot
            lmul[k, q - 1] = lv
            r[k + q, kl - q] = 0.0
            if lv != 0.0:
                for t in range(1, jmax - k + 1):
                    r[k + q, kl + t - q] -= lv * r[k, kl + t]
    return 0


@njit(cache=True)
def _gbtrs_nb(r, lmul, piv, kl, ku, b):
    n = r.shape[0]
    nrhs = b.shape[1]
    for k in range(n):
        p = piv[k]
        if p != k:
            for c in range(nrhs):
                tmp = b[k, c]
                b[k, c] = b[p, c]
                b[p, c] = tmp
        m = min(kl, n - 1 - k)
        for q in range(1, m + 1):
            lv = lmul[k, q - 1]
            if lv != 0.0:
                for c in range(nrhs):
                    b[k + q, c] -= lv * b[k, c]
    for k in range(n - 1, -1, -1):
        jmax = min(k + kl + ku, n - 1)
        for c in range(nrhs):
            acc = b[k, c]
            for t in range(1, jmax - k + 1):
                acc -= r[k, kl + t] * b[k + t, c]
            b[k, c] = acc / r[k, kl]
    return b


def _gbtrf_np(r, lmul, piv, kl, ku, tol):
    n = r.shape[0]
    for k in range(n):
        m = min(kl, n - 1 - k)
        q = np.arange(m + 1)
        colk = r[k + q, kl - q]
        j = int(np.argmax(np.abs(colk)))
        p = k + j
        piv[k] = p
        if abs(colk[j]) <= tol:
            return k + 1
        jmax = min(k + kl + ku, n - 1)
        t = np.arange(jmax - k + 1)
        if p != k:
            row_k = r[k, kl + t].copy()
            r[k, kl + t] = r[p, kl + t - j]
            r[p, kl + t - j] = row_k
        if m == 0:
            continue
        qq = np.arange(1, m + 1)
        lv = r[k + qq, kl - qq] / r[k, kl]
        lmul[k, :m] = lv
        r[k + qq, kl - qq] = 0.0
        if jmax > k:
            tt = np.arange(1, jmax - k + 1)
            rows = (k + qq)[:, None]
            cols = kl + tt[None, :] - qq[:, None]
            r[rows, cols] -= lv[:, None] * r[k, kl + tt][None, :]
    return 0


def _gbtrs_np(r, lmul, piv, kl, ku, b):
    n = r.shape[0]
    for k in range(n):
        p = piv[k]
        if p != k:
            b[[k, p]] = b[[p, k]]
        m = min(kl, n - 1 - k)
        if m:
            b[k + 1 : k + 1 + m] -= lmul[k, :m, None] * b[k]
    for k in range(n - 1, -1, -1):
        jmax = min(k + kl + ku, n - 1)
        if jmax > k:
            b[k] -= r[k, kl + 1 : kl + 1 + jmax - k] @ b[k + 1 : jmax + 1]
        b[k] /= r[k, kl]
    return b


class BandedLU:
    """LU factorisation with partial pivoting of a (non-cyclic) band matrix."""

    def __init__(self, rowband: np.ndarray, kl: int, ku: int, backend: Optional[str] = None, scale: float = 1.0):
        n = rowband.shape[0]
        self.n, self.kl, self.ku = n, kl, ku
        self._r = np.ascontiguousarray(rowband, dtype=float).copy()
        self._l = np.zeros((n, max(kl, 1)))
        self._piv = np.zeros(n, dtype=np.int64)
        self._factor = pick(_gbtrf_nb, _gbtrf_np, backend)
        self._solve = pick(_gbtrs_nb, _gbtrs_np, backend)
        info = self._factor(self._r, self._l, self._piv, kl, ku, _PIVOT_TOL * scale)
        if info:
            raise SingularSystemError(f"zero pivot at row {info - 1} of banded LU")

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        squeeze = b.ndim == 1
        x = np.array(b.reshape(self.n, -1), dtype=float, order="C")
        self._solve(self._r, self._l, self._piv, self.kl, self.ku, x)
        return x[:, 0] if squeeze else x


def _power_condition(solve, n, norm_a, iters=4):
    """Lower bound style estimate ``||A||_1 * ||A^{-1}||_1`` by power iteration."""
    x = np.ones(n) / n
    x[1::2] *= -0.5
    est = 0.0
    for _ in range(iters):
        y = solve(x)
        ny = np.abs(y).sum()
        if not np.isfinite(ny):
            return np.inf
        est = max(est, ny / np.abs(x).sum())
        if ny == 0:
            break
        x = np.sign(y) / n
        x[x == 0] = 1.0 / n
    return float(norm_a * est)


class Factorization:
    """Reusable factorisation of ``I - c B``."""

    n: int
    strategy: str

    def solve(self, rhs):
        raise NotImplementedError

    @property
    def condition_estimate(self) -> float:
        if getattr(self, "_cond", None) is None:
            self._cond = _power_condition(self.solve, self.n, self._norm1)
        return self._cond


class IdentityFactorization(Factorization):
    strategy = "identity"

    def __init__(self, n):
        self.n = n
        self._norm1 = 1.0
        self._cond = 1.0

    def solve(self, rhs):
        return np.array(rhs, dtype=float, copy=True)


class DenseFactorization(Factorization):
    strategy = "dense"

    def __init__(self, a: np.ndarray):
        a = np.atleast_2d(np.asarray(a, dtype=float))
        self.n = a.shape[0]
        self._norm1 = float(np.abs(a).sum(axis=0).max())
        if self.n == 1:
            if abs(a[0, 0]) <= _PIVOT_TOL * max(self._norm1, 1.0):
                raise SingularSystemError("singular 1x1 system", np.inf)
            self._inv = 1.0 / a[0, 0]
            self._lu = None
        else:
            with warnings.catch_warnings():
                # exact zero pivots are reported below as SingularSystemError
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                self._lu = scipy.linalg.lu_factor(a, check_finite=True)
            udiag = np.abs(np.diag(self._lu[0]))
            if udiag.min() <= _PIVOT_TOL * max(self._norm1, 1.0):
                raise SingularSystemError("singular dense system", np.inf)

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        if self._lu is None:
            return rhs * self._inv
        return scipy.linalg.lu_solve(self._lu, rhs)


class CyclicBandedFactorization(Factorization):
    """Banded LU of the non-wrapping part plus a Woodbury corner correction."""

    strategy = "banded"

    def __init__(self, a: StencilMatrix, backend: Optional[str] = None):
        n, w = a.n, a.bandwidth
        if n < 2 * w + 1:
            raise ConfigurationError(f"grid of {n} points too small for bandwidth {w}")
        self.n, self.w = n, w
        bands = a.bands
        self._norm1 = float(np.abs(a.transpose().bands).sum(axis=1).max())
        rows = np.arange(n)[:, None]
        cols = rows + np.arange(-w, w + 1)[None, :]
        inside = (cols >= 0) & (cols < n)
        rowband = np.zeros((n, 3 * w + 1))
        rowband[:, : 2 * w + 1] = np.where(inside, bands, 0.0)
        self._band = BandedLU(rowband, w, w, backend=backend, scale=max(self._norm1, 1.0))
        if w == 0:
            self._z = None
            return
        corner_rows = np.concatenate([np.arange(w), np.arange(n - w, n)])
        vt = np.zeros((2 * w, n))
        for r, i in enumerate(corner_rows):
            for k in range(2 * w + 1):
                j = i + k - w
                if j < 0 or j >= n:
                    vt[r, j % n] += bands[i, k]
        u = np.zeros((n, 2 * w))
        u[corner_rows, np.arange(2 * w)] = 1.0
        self._vt = vt
        self._z = self._band.solve(u)
        cap = np.eye(2 * w) + vt @ self._z
        self._cap = scipy.linalg.lu_factor(cap)
        if np.abs(np.diag(self._cap[0])).min() <= _PIVOT_TOL * max(np.abs(cap).max(), 1.0):
            raise SingularSystemError("singular corner capacitance matrix", np.inf)

    def solve(self, rhs):
        y = self._band.solve(rhs)
        if self._z is None:
            return y
        corr = scipy.linalg.lu_solve(self._cap, self._vt @ y)
        return y - self._z @ corr


def shifted_matrix(b, c: float):
    """``I - c B`` in the same representation as ``B``."""
    if isinstance(b, StencilMatrix):
        return StencilMatrix.identity(b.n) - c * b
    b = np.atleast_2d(np.asarray(b, dtype=float))
    return np.eye(b.shape[0]) - c * b


def factor_shifted(b, c: float, strategy: str = "banded", backend: Optional[str] = None) -> Factorization:
    """Factor ``I - c B`` once for repeated solves.

    ``b`` is a :class:`StencilMatrix` (cyclic banded) or a dense array.
    ``strategy='dense'`` forces a dense LU, used as a verification oracle.
    """
    if not np.isfinite(c):
        raise ConfigurationError("shift must be finite")
    n = b.n if isinstance(b, StencilMatrix) else np.atleast_2d(b).shape[0]
    if c == 0.0:
        return IdentityFactorization(n)
    a = shifted_matrix(b, c)
    if isinstance(a, StencilMatrix):
        if strategy == "dense":
            return DenseFactorization(a.to_dense())
        if strategy != "banded":
            raise ConfigurationError(f"unknown factorization strategy {strategy!r}")
        try:
            return CyclicBandedFactorization(a, backend=backend)
        except SingularSystemError:
            log.debug("banded/corner split singular; retrying with dense LU")
            try:
                return DenseFactorization(a.to_dense())
            except SingularSystemError as exc:
                raise SingularSystemError("singular shifted system", exc.condition_estimate) from None
    return DenseFactorization(a)


def solve(f: Factorization, rhs) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != f.n:
        raise ConfigurationError(f"rhs has length {rhs.shape[0]}, system has {f.n}")
    return f.solve(rhs)
