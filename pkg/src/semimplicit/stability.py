"""Linear stability of semi-implicit Rosenbrock tableaux.

For ``U' = lambda U + mu V`` one step gives ``U^1 = R(z_tilde, z)`` with
``z_tilde = dt lambda``, ``z = dt mu`` and

    R(z_tilde, z) = 1 + (z_tilde + z) b^T (I - z_tilde A_tilde - z B)^{-1} e,

``B = alpha + gamma_mat``.  The matrix is lower triangular with diagonal
``1 - gamma z``, so one forward substitution evaluates ``R``.  The region
``S_tilde`` collects the ``z_tilde`` with ``max_y |R(z_tilde, iy)| <= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from ._accel import njit, pick
from .core import ConfigurationError, NumericalError
from .rosenbrock.tableau import RosenbrockTableau


class PoleError(NumericalError):
    """The stage matrix ``I - z_tilde A_tilde - z B`` is singular."""


def _mats(t: RosenbrockTableau):
    arr = t.arrays()
    return arr["a_tilde"], arr["beta"], arr["b"]


def stability_function(t: RosenbrockTableau, z_tilde, z):
    """Evaluate ``R(z_tilde, z)``; broadcasts over array arguments.

    Scalar calls raise :class:`PoleError` at a pole; array calls return
    ``nan`` there.
    """
    at, beta, b = _mats(t)
    zt = np.asarray(z_tilde, dtype=complex)
    zz = np.asarray(z, dtype=complex)
    zt, zz = np.broadcast_arrays(zt, zz)
    scalar = zt.ndim == 0
    s = t.s
    xs = []
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(s):
            d = 1.0 - zz * beta[i, i]
            acc = np.ones_like(zt)
            for j in range(i):
                acc = acc + (zt * at[i, j] + zz * beta[i, j]) * xs[j]
            xs.append(acc / d)
        r = 1.0 + (zt + zz) * sum(b[i] * xs[i] for i in range(s))
        pole = np.zeros(zt.shape, dtype=bool)
        for i in range(s):
            pole |= np.abs(1.0 - zz * beta[i, i]) == 0.0
    if scalar:
        if pole:
            raise PoleError(f"pole of R at z = {complex(zz)}")
        return complex(r)
    return np.where(pole, np.nan + 0j, r)


def r_at_infinity(t: RosenbrockTableau, exact: bool = False):
    """``1 - b^T B^{-1} e``: the limit of ``R(z_tilde, z)`` as ``|z| -> inf``.

    The limit does not depend on ``z_tilde``: dividing the stage matrix by
    ``z`` removes the ``z_tilde A_tilde`` term.  With ``exact=True`` a
    rational tableau gives a :class:`Fraction`.
    """
    s = t.s
    use_exact = exact and t.exact
    beta = t.beta if use_exact else t.arrays()["beta"]
    one = Fraction(1) if use_exact else 1.0
    x: List = []
    for i in range(s):
        d = beta[i][i]
        if d == 0:
            raise NumericalError("B is singular (zero diagonal)")
        acc = one - sum((beta[i][j] * x[j] for j in range(i)), 0 * one)
        x.append(acc / d)
    val = one - sum((t.b[i] * x[i] if use_exact else float(t.b[i]) * x[i] for i in range(s)), 0 * one)
    return val if use_exact else float(val)


def r_large_y(t: RosenbrockTableau, z_tilde, y_big: float = 1e12) -> complex:
    """``R(z_tilde, i Y)`` at large ``Y``, for comparison with ``r_at_infinity``."""
    return stability_function(t, z_tilde, 1j * y_big)


def y_ladder(samples: int, y_min: float = 1e-3, y_max: float = 1e6) -> np.ndarray:
    """``{0} U +-logspace(y_min, y_max, samples)``, sorted ascending."""
    if samples < 2:
        raise ConfigurationError("need at least 2 y samples")
    pos = np.logspace(math.log10(y_min), math.log10(y_max), samples)
    return np.concatenate([-pos[::-1], [0.0], pos])


# --- field kernels ----------------------------------------------------------

_GOLD = 0.5 * (math.sqrt(5.0) - 1.0)


@njit(cache=True)
def _r_abs_nb(zt, z, at, beta, b, x):
    s = b.shape[0]
    tot = 0.0 + 0.0j
    for i in range(s):
        acc = 1.0 + 0.0j
        for j in range(i):
            acc += (zt * at[i, j] + z * beta[i, j]) * x[j]
        x[i] = acc / (1.0 - z * beta[i, i])
        tot += b[i] * x[i]
    return abs(1.0 + (zt + z) * tot)


@njit(cache=True)
def _golden_nb(zt, lo, hi, at, beta, b, iters, x):
    g = 0.5 * (np.sqrt(5.0) - 1.0)
    c = hi - g * (hi - lo)
    d = lo + g * (hi - lo)
    fc = _r_abs_nb(zt, 1j * c, at, beta, b, x)
    fd = _r_abs_nb(zt, 1j * d, at, beta, b, x)
    for _ in range(iters):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - g * (hi - lo)
            fc = _r_abs_nb(zt, 1j * c, at, beta, b, x)
        else:
            lo, c, fc = c, d, fd
            d = lo + g * (hi - lo)
            fd = _r_abs_nb(zt, 1j * d, at, beta, b, x)
    return max(fc, fd)


@njit(cache=True)
def _field_nb(re, im, ys, at, beta, b, floor, iters):
    ny, nx = im.shape[0], re.shape[0]
    out = np.empty((ny, nx))
    x = np.empty(b.shape[0], dtype=np.complex128)
    nyv = ys.shape[0]
    for i in range(ny):
        for j in range(nx):
            zt = re[j] + 1j * im[i]
            best = floor
            kbest = -1
            for k in range(nyv):
                v = _r_abs_nb(zt, 1j * ys[k], at, beta, b, x)
                if v > best:
                    best = v
                    kbest = k
            if iters > 0 and kbest > 0 and kbest < nyv - 1:
                v = _golden_nb(zt, ys[kbest - 1], ys[kbest + 1], at, beta, b, iters, x)
                if v > best:
                    best = v
            out[i, j] = best
    return out


def _r_abs_np(zt, z, at, beta, b):
    s = b.shape[0]
    xs = []
    tot = np.zeros(np.broadcast(zt, z).shape, dtype=complex)
    for i in range(s):
        acc = np.ones_like(tot)
        for j in range(i):
            acc = acc + (zt * at[i, j] + z * beta[i, j]) * xs[j]
        xi = acc / (1.0 - z * beta[i, i])
        xs.append(xi)
        tot = tot + b[i] * xi
    return np.abs(1.0 + (zt + z) * tot)


def _field_np(re, im, ys, at, beta, b, floor, iters):
    zt = re[None, :] + 1j * im[:, None]
    best = np.full(zt.shape, floor)
    kbest = np.full(zt.shape, -1)
    for k, y in enumerate(ys):
        v = _r_abs_np(zt, 1j * y, at, beta, b)
        better = v > best
        best = np.where(better, v, best)
        kbest = np.where(better, k, kbest)
    if iters > 0:
        inner = (kbest > 0) & (kbest < ys.shape[0] - 1)
        if np.any(inner):
            z_in = zt[inner]
            lo = ys[kbest[inner] - 1].astype(float)
            hi = ys[kbest[inner] + 1].astype(float)
            c = hi - _GOLD * (hi - lo)
            d = lo + _GOLD * (hi - lo)
            fc = _r_abs_np(z_in, 1j * c, at, beta, b)
            fd = _r_abs_np(z_in, 1j * d, at, beta, b)
            for _ in range(iters):
                left = fc > fd
                hi = np.where(left, d, hi)
                lo = np.where(left, lo, c)
                c_new = np.where(left, hi - _GOLD * (hi - lo), d)
                d_new = np.where(left, c, lo + _GOLD * (hi - lo))
                fc, fd = (
                    np.where(left, _r_abs_np(z_in, 1j * c_new, at, beta, b), fd),
                    np.where(left, fc, _r_abs_np(z_in, 1j * d_new, at, beta, b)),
                )
                c, d = c_new, d_new
            best[inner] = np.maximum(best[inner], np.maximum(fc, fd))
    return best


def max_modulus(
    t: RosenbrockTableau,
    z_tilde,
    y_samples: int = 600,
    refine_iters: int = 40,
    backend: Optional[str] = None,
) -> np.ndarray:
    """``M(z_tilde) = max(|R(z_tilde, 0)|, max_y |R(z_tilde, iy)|, |R_inf|)``."""
    zt = np.atleast_1d(np.asarray(z_tilde, dtype=complex))
    at, beta, b = _mats(t)
    ys = y_ladder(y_samples)
    floor = abs(r_at_infinity(t))
    kernel = pick(_field_nb, _field_np, backend)
    flat = zt.ravel()
    vals = np.empty(flat.shape[0])
    for k, z in enumerate(flat):
        grid = kernel(np.array([z.real]), np.array([z.imag]), ys, at, beta, b, floor, refine_iters)
        vals[k] = grid[0, 0]
    return vals.reshape(np.shape(z_tilde)) if np.ndim(z_tilde) else float(vals[0])


@dataclass
class RegionContour:
    """Field ``M`` on a tensor grid over ``z_tilde`` and its level-1 contours."""

    re: np.ndarray
    im: np.ndarray
    field: np.ndarray
    contours: List[np.ndarray]
    flagged: np.ndarray
    name: str = ""
    y_samples: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def cell(self) -> float:
        return max(self.re[1] - self.re[0], self.im[1] - self.im[0])

    def points(self) -> np.ndarray:
        if not self.contours:
            return np.zeros((0, 2))
        return np.concatenate(self.contours, axis=0)

    def inside(self, z_tilde) -> bool:
        """Nearest-node lookup of ``M <= 1``."""
        j = int(np.argmin(np.abs(self.re - np.real(z_tilde))))
        i = int(np.argmin(np.abs(self.im - np.imag(z_tilde))))
        return bool(self.field[i, j] <= 1.0)

    def export_field(self, path):
        with open(path, "w") as fh:
            fh.write(f"# {self.name}: Re(z_tilde) Im(z_tilde) M\n")
            for i, y in enumerate(self.im):
                for j, x in enumerate(self.re):
                    fh.write(f"{x:.10g} {y:.10g} {self.field[i, j]:.10g}\n")
                fh.write("\n")

    def export_contour(self, path):
        with open(path, "w") as fh:
            fh.write(f"# {self.name}: level-1 boundary locus, Re Im per line, polylines separated by blank lines\n")
            for c in self.contours:
                for x, y in c:
                    fh.write(f"{x:.10g} {y:.10g}\n")
                fh.write("\n")

    def plot(self, path, ax=None):
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        own = ax is None
        if own:
            fig, ax = plt.subplots(figsize=(5, 5))
        ax.contourf(self.re, self.im, (self.field <= 1.0).astype(float), levels=[0.5, 1.5], colors=["#c6dbef"])
        for c in self.contours:
            ax.plot(c[:, 0], c[:, 1], "k-", lw=1)
        ax.axhline(0, color="0.6", lw=0.5)
        ax.axvline(0, color="0.6", lw=0.5)
        ax.set_xlabel("Re z~")
        ax.set_ylabel("Im z~")
        ax.set_title(self.name)
        ax.set_aspect("equal")
        if own:
            fig.tight_layout()
            fig.savefig(path, dpi=120)
            plt.close(fig)


def boundary_locus(
    t: RosenbrockTableau,
    re_range: Tuple[float, float] = (-6.0, 2.0),
    im_range: Tuple[float, float] = (-4.0, 4.0),
    resolution: int = 400,
    y_samples: int = 600,
    refine_iters: int = 40,
    backend: Optional[str] = None,
    out_dir: Optional[str] = None,
) -> RegionContour:
    """Sample ``M`` on a ``resolution x resolution`` grid and trace ``M = 1``."""
    from skimage import measure

    if resolution < 64:
        raise ConfigurationError("resolution must be at least 64")
    re = np.linspace(re_range[0], re_range[1], resolution)
    im = np.linspace(im_range[0], im_range[1], resolution)
    at, beta, b = _mats(t)
    ys = y_ladder(y_samples)
    floor = abs(r_at_infinity(t))
    kernel = pick(_field_nb, _field_np, backend)
    m = kernel(re, im, ys, at, beta, b, floor, refine_iters)
    flagged = ~np.isfinite(m)
    raw = measure.find_contours(np.where(flagged, 0.0, m), 1.0, mask=~flagged)
    contours = []
    for c in raw:
        rows, cols = c[:, 0], c[:, 1]
        x = np.interp(cols, np.arange(resolution), re)
        y = np.interp(rows, np.arange(resolution), im)
        contours.append(np.column_stack([x, y]))
    region = RegionContour(re, im, m, contours, flagged, name=t.name, y_samples=y_samples)
    if out_dir is not None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        tag = t.name.replace(" ", "_").replace("/", "-").replace("=", "")
        region.export_field(os.path.join(out_dir, f"{tag}_field.dat"))
        region.export_contour(os.path.join(out_dir, f"{tag}_contour.dat"))
    return region


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point sets ``(k, 2)``."""
    from scipy.spatial.distance import directed_hausdorff

    if len(a) == 0 or len(b) == 0:
        return math.inf if (len(a) or len(b)) else 0.0
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])

