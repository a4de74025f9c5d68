"""Semi-implicit Rosenbrock tableaux: storage, construction and order checks.

Coefficients are kept either as exact :class:`fractions.Fraction` values or
as floats (for irrational ``gamma``).  The stage structure is

    U^i    = U^n + sum_{j<i} a_tilde[i, j] K^j
    Vbar^i = U^n + sum_{j<i} alpha[i, j]   K^j
    (I - dt gamma J) K^i = dt [H(U^i, Vbar^i) + J sum_{j<i} gamma_mat[i, j] K^j]

with ``beta = alpha + gamma_mat`` (``beta_ii = gamma``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Sequence, Tuple, Union

import numpy as np

from ..core import ConfigurationError

Number = Union[Fraction, float]

GAMMA_SDIRK = 1.0 - 1.0 / math.sqrt(2.0)
FLOAT_TOL = 1e-12


class ConstructionError(ConfigurationError):
    """The third-order construction broke down at a given step."""

    def __init__(self, step: int, reason: str):
        super().__init__(f"construction failed at step {step}: {reason}")
        self.step = step


def _is_exact(*vals) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in vals)


def _square(rows: Sequence[Sequence[Number]], s: int, what: str):
    rows = tuple(tuple(r) for r in rows)
    if len(rows) != s or any(len(r) != s for r in rows):
        raise ConfigurationError(f"{what} must be {s}x{s}")
    return rows


@dataclass(frozen=True)
class RosenbrockTableau:
    """Coefficients of an ``s``-stage semi-implicit Rosenbrock scheme.

    ``a_tilde`` and ``alpha`` are strictly lower triangular; ``gamma_mat`` is
    lower triangular with ``gamma`` on the diagonal.
    """

    gamma: Number
    a_tilde: Tuple[Tuple[Number, ...], ...]
    alpha: Tuple[Tuple[Number, ...], ...]
    gamma_mat: Tuple[Tuple[Number, ...], ...]
    b: Tuple[Number, ...]
    name: str = ""

    def __post_init__(self):
        s = len(self.b)
        if s < 1:
            raise ConfigurationError("tableau needs at least one stage")
        object.__setattr__(self, "b", tuple(self.b))
        for what in ("a_tilde", "alpha", "gamma_mat"):
            object.__setattr__(self, what, _square(getattr(self, what), s, what))
        for i in range(s):
            for j in range(i, s):
                if self.a_tilde[i][j] != 0 or self.alpha[i][j] != 0:
                    raise ConfigurationError("a_tilde and alpha must be strictly lower triangular")
                if j > i and self.gamma_mat[i][j] != 0:
                    raise ConfigurationError("gamma_mat must be lower triangular")
            if self.gamma_mat[i][i] != self.gamma:
                raise ConfigurationError("gamma_mat diagonal must equal gamma")

    @property
    def s(self) -> int:
        return len(self.b)

    @property
    def exact(self) -> bool:
        vals = [self.gamma, *self.b]
        for m in (self.a_tilde, self.alpha, self.gamma_mat):
            vals.extend(v for row in m for v in row)
        return _is_exact(*vals)

    @property
    def beta(self):
        s = self.s
        return tuple(tuple(self.alpha[i][j] + self.gamma_mat[i][j] for j in range(s)) for i in range(s))

    @property
    def c_tilde(self):
        return tuple(sum(row, Fraction(0) if self.exact else 0.0) for row in self.a_tilde)

    @property
    def alpha_sum(self):
        return tuple(sum(row, Fraction(0) if self.exact else 0.0) for row in self.alpha)

    @property
    def beta_prime(self):
        beta = self.beta
        zero = Fraction(0) if self.exact else 0.0
        return tuple(sum(beta[i][:i], zero) for i in range(self.s))

    def arrays(self) -> Dict[str, np.ndarray]:
        """Float copies: ``a_tilde, alpha, gamma_mat, beta, b, c_tilde``."""
        f = lambda m: np.array([[float(v) for v in row] for row in m])  # noqa: E731
        return {
            "a_tilde": f(self.a_tilde),
            "alpha": f(self.alpha),
            "gamma_mat": f(self.gamma_mat),
            "beta": f(self.beta),
            "b": np.array([float(v) for v in self.b]),
            "c_tilde": np.array([float(v) for v in self.c_tilde]),
        }

    def with_b(self, b) -> "RosenbrockTableau":
        return RosenbrockTableau(self.gamma, self.a_tilde, self.alpha, self.gamma_mat, tuple(b), self.name)


@dataclass(frozen=True)
class DoubleButcherTableau:
    """Partitioned RK pair: explicit ``a_tilde``, DIRK ``a``, shared ``b``."""

    a_tilde: np.ndarray
    a: np.ndarray
    b: np.ndarray
    name: str = ""

    def __post_init__(self):
        at = np.asarray(self.a_tilde, dtype=float)
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        s = b.shape[0]
        if at.shape != (s, s) or a.shape != (s, s):
            raise ConfigurationError("double tableau blocks must be s x s")
        if np.any(np.triu(at) != 0):
            raise ConfigurationError("explicit part must be strictly lower triangular")
        if np.any(np.triu(a, 1) != 0):
            raise ConfigurationError("implicit part must be lower triangular (DIRK)")
        object.__setattr__(self, "a_tilde", at)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def s(self) -> int:
        return self.b.shape[0]


def si_euler_double() -> DoubleButcherTableau:
    """IMEX Euler as a one-stage double tableau."""
    return DoubleButcherTableau([[0.0]], [[1.0]], [1.0], name="si-euler")


def two_stage_sdirk_double() -> DoubleButcherTableau:
    """Second-order IMEX pair: explicit midpoint-like part with an L-stable SDIRK."""
    g = GAMMA_SDIRK
    return DoubleButcherTableau([[0, 0], [1, 0]], [[g, 0], [1 - 2 * g, g]], [0.5, 0.5], name="imex-sdirk2")


# --- gamma parsing ----------------------------------------------------------


def parse_gamma(value) -> Number:
    """Accept ``Fraction``/float or strings like ``3/4``, ``0.3``, ``1-1/sqrt2``."""
    if isinstance(value, (Fraction, float)):
        return value
    if isinstance(value, int):
        return Fraction(value)
    text = str(value).replace(" ", "").lower()
    if text in ("1-1/sqrt2", "1-1/sqrt(2)", "1-sqrt2/2", "1-sqrt(2)/2", "sdirk"):
        return GAMMA_SDIRK
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigurationError(f"cannot parse gamma {value!r}") from None


def gamma_label(g: Number) -> str:
    if isinstance(g, Fraction):
        return str(g)
    if abs(g - GAMMA_SDIRK) < 1e-15:
        return "1-1/sqrt2"
    return repr(float(g))


# --- construction -----------------------------------------------------------


def _nearly_zero(x) -> bool:
    return x == 0 if isinstance(x, Fraction) else abs(x) < 1e-13


def construct_third_order(gamma, c4_choice: str = "unit") -> RosenbrockTableau:
    """Four-stage, third-order, stiffly accurate tableau for a given ``gamma``.

    Free parameters are fixed as ``b2 = a_tilde32 = 0``, ``alpha2 = 2 gamma``,
    ``alpha31 = alpha41 = alpha43 = 0``.  ``c4_choice`` selects the root of
    the quadratic for ``c_tilde4``: ``'unit'`` takes ``1`` when it is a root
    (otherwise the real root nearest 1), ``'other'`` takes the remaining root.
    A result that misses a third-order condition raises
    :class:`ConstructionError`; with ``alpha4 = 1`` the condition
    ``sum b c alpha = 1/3`` rules out any root other than ``1``.
    """
    g = parse_gamma(gamma)
    if not g >= Fraction(1, 4):
        raise ConfigurationError(f"gamma = {gamma_label(g)} below 1/4 is not supported")
    one = Fraction(1) if isinstance(g, Fraction) else 1.0
    half, third, sixth = one / 2, one / 3, one / 6

    # step 1: fixed choices
    b2 = 0 * one
    b4 = g
    alpha2 = 2 * g

    # step 2: b3 and alpha3
    if _nearly_zero(third - g) or _nearly_zero(half - g):
        raise ConstructionError(2, "b3 or alpha3 undefined (gamma = 1/3 or 1/2)")
    alpha3 = (third - g) / (half - g)
    b3 = (half - g) ** 2 / (third - g)
    b1 = one - b2 - b3 - b4

    # step 3: c_tilde4 from the quadratic
    qa = g * g / b3 + g
    qb = -g / b3
    qc = one / (4 * b3) - third
    if _nearly_zero(qa):
        raise ConstructionError(3, "degenerate quadratic for c_tilde4")
    if _nearly_zero(qa + qb + qc):
        roots = [one, qc / qa]
    else:
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            raise ConstructionError(3, "no real root for c_tilde4")
        sq = math.sqrt(float(disc))
        roots = [(-float(qb) + sq) / (2 * float(qa)), (-float(qb) - sq) / (2 * float(qa))]
    roots.sort(key=lambda r: abs(float(r) - 1.0))
    if c4_choice == "unit":
        c4 = roots[0]
    elif c4_choice == "other":
        c4 = roots[1]
    else:
        raise ConfigurationError(f"unknown c4_choice {c4_choice!r}")
    if not isinstance(c4, Fraction) and isinstance(g, Fraction):
        one, half, third, sixth = 1.0, 0.5, 1 / 3, 1 / 6
        g, b1, b2, b3, b4, alpha2, alpha3 = map(float, (g, b1, b2, b3, b4, alpha2, alpha3))
    c3 = (half - g * c4) / b3

    # step 4: beta'3 and the beta32-scaled forms of beta'2, c_tilde2
    bp3 = (half - 2 * g + g * g) / b3
    q_val = sixth - g + g * g - g * b3 * bp3
    p_val = sixth - g + g * g * c4

    # steps 5-6: a_tilde42, a_tilde43, beta32 (linear in x = 1/beta32)
    k = sixth - g / 2
    a1 = (alpha3 / 6 - c3 / 3) * q_val / b3 + p_val / (3 * b3) * bp3 - k * p_val / b3 * alpha3
    a0 = -(alpha2 / 6) * bp3 + k * c3 * alpha2
    if _nearly_zero(a0) or _nearly_zero(a1):
        raise ConstructionError(6, "beta32 undetermined")
    beta32 = -a1 / a0
    bp2 = q_val / (b3 * beta32)
    c2 = p_val / (b3 * beta32)
    det = c2 * alpha3 - c3 * alpha2
    if _nearly_zero(det):
        raise ConstructionError(5, "singular system for a_tilde42, a_tilde43")
    a42 = (alpha3 / (6 * g) - c3 / (3 * g)) / det
    a43 = (c2 / (3 * g) - alpha2 / (6 * g)) / det

    # steps 7-8: remaining coefficients from the abbreviations and stiff accuracy
    a41 = c4 - a42 - a43
    beta21 = bp2
    beta31 = bp3 - beta32
    z = 0 * one
    a_tilde = ((z, z, z, z), (c2, z, z, z), (c3, z, z, z), (a41, a42, a43, z))
    alpha = ((z, z, z, z), (alpha2, z, z, z), (z, alpha3, z, z), (z, one, z, z))
    gamma_mat = (
        (g, z, z, z),
        (beta21 - alpha2, g, z, z),
        (beta31, beta32 - alpha3, g, z),
        (b1, b2 - one, b3, g),
    )
    tab = RosenbrockTableau(g, a_tilde, alpha, gamma_mat, (b1, b2, b3, b4), name=f"si-r gamma={gamma_label(g)}")
    report = validate_order_conditions(tab)
    if report.satisfied_order < 3:
        failed = [k for k in report.residuals if not report.condition_holds(k)]
        raise ConstructionError(3, f"c_tilde4 = {float(c4):.6g} violates {', '.join(failed)}")
    return tab


def _scheme_three_quarters() -> RosenbrockTableau:
    F = Fraction
    z = F(0)
    g = F(3, 4)
    a_tilde = (
        (z, z, z, z),
        (F(3, 13), z, z, z),
        (F(5, 3), z, z, z),
        (F(1063, 1485), F(52, 297), F(6, 55), z),
    )
    alpha = ((z, z, z, z), (F(3, 2), z, z, z), (z, F(5, 3), z, z), (z, F(1), z, z))
    gamma_mat = (
        (g, z, z, z),
        (F(-255, 52), g, z, z),
        (F(125, 54), F(-115, 108), g, z),
        (F(2, 5), F(-1), F(-3, 20), g),
    )
    b = (F(2, 5), z, F(-3, 20), F(3, 4))
    return RosenbrockTableau(g, a_tilde, alpha, gamma_mat, b, name="si-r gamma=3/4")


BUILTIN_GAMMAS = {"1-1/sqrt2": GAMMA_SDIRK, "13/50": Fraction(13, 50), "3/4": Fraction(3, 4)}


def builtin_tableau(gamma_choice) -> RosenbrockTableau:
    g = parse_gamma(gamma_choice)
    if g == Fraction(3, 4):
        return _scheme_three_quarters()
    for v in BUILTIN_GAMMAS.values():
        if (isinstance(v, Fraction) and g == v) or (not isinstance(v, Fraction) and abs(float(g) - v) < 1e-15):
            return construct_third_order(v)
    raise ConfigurationError(f"no built-in tableau for gamma = {gamma_label(g)}")


def one_stage_tableau(gamma=Fraction(1)) -> RosenbrockTableau:
    g = parse_gamma(gamma)
    z = 0 * g
    return RosenbrockTableau(g, ((z,),), ((z,),), ((g,),), (1 + z,), name=f"si-r1 gamma={gamma_label(g)}")


# --- order conditions -------------------------------------------------------

_CONDITIONS = (
    # name, order, description
    ("sum_b", 1, "sum b_i = 1"),
    ("b_c", 2, "sum b_i c_i = 1/2"),
    ("b_betap", 2, "sum b_i beta'_i = 1/2 - gamma"),
    ("b_c2", 3, "sum b_i c_i^2 = 1/3"),
    ("b_a_c", 3, "sum b_i a_ij c_j = 1/6"),
    ("b_c_alpha", 3, "sum b_i c_i alpha_i = 1/3"),
    ("b_alpha2", 3, "sum b_i alpha_i^2 = 1/3"),
    ("b_a_betap", 3, "sum b_i a_ij beta'_j = 1/6 - gamma/2"),
    ("b_beta_c", 3, "sum b_i beta_ij c_j = 1/6 - gamma/2"),
    ("b_beta_betap", 3, "sum b_i beta_ij beta'_j = 1/6 - gamma + gamma^2"),
)


@dataclass
class OrderConditionReport:
    residuals: Dict[str, Number]
    orders: Dict[str, int]
    exact: bool
    satisfied_order: int
    descriptions: Dict[str, str] = field(default_factory=dict)

    def condition_holds(self, name: str) -> bool:
        r = self.residuals[name]
        return r == 0 if self.exact else abs(float(r)) <= FLOAT_TOL

    def lines(self):
        for name, r in self.residuals.items():
            ok = "ok" if self.condition_holds(name) else "FAIL"
            val = str(r) if self.exact else f"{float(r):.3e}"
            yield f"  [{ok:>4}] order {self.orders[name]}  {self.descriptions[name]:<42} residual {val}"


def validate_order_conditions(t: RosenbrockTableau) -> OrderConditionReport:
    """Evaluate the autonomous order conditions through order three."""
    s, b, a, g = t.s, t.b, t.a_tilde, t.gamma
    exact = t.exact
    one = Fraction(1) if exact else 1.0
    c, al, bp, beta = t.c_tilde, t.alpha_sum, t.beta_prime, t.beta
    beta_strict = [[beta[i][j] if j < i else 0 * one for j in range(s)] for i in range(s)]
    S = lambda it: sum(it, 0 * one)  # noqa: E731
    I = range(s)  # noqa: E741
    vals = {
        "sum_b": S(b[i] for i in I) - 1,
        "b_c": S(b[i] * c[i] for i in I) - one / 2,
        "b_betap": S(b[i] * bp[i] for i in I) - (one / 2 - g),
        "b_c2": S(b[i] * c[i] ** 2 for i in I) - one / 3,
        "b_a_c": S(b[i] * a[i][j] * c[j] for i in I for j in I) - one / 6,
        "b_c_alpha": S(b[i] * c[i] * al[i] for i in I) - one / 3,
        "b_alpha2": S(b[i] * al[i] ** 2 for i in I) - one / 3,
        "b_a_betap": S(b[i] * a[i][j] * bp[j] for i in I for j in I) - (one / 6 - g / 2),
        "b_beta_c": S(b[i] * beta_strict[i][j] * c[j] for i in I for j in I) - (one / 6 - g / 2),
        "b_beta_betap": S(b[i] * beta_strict[i][j] * bp[j] for i in I for j in I) - (one / 6 - g + g * g),
    }
    orders = {n: o for n, o, _ in _CONDITIONS}
    desc = {n: d for n, _, d in _CONDITIONS}
    report = OrderConditionReport(vals, orders, exact, 0, desc)
    order = 0
    for p in (1, 2, 3):
        if all(report.condition_holds(n) for n in vals if orders[n] == p):
            order = p
        else:
            break
    report.satisfied_order = order
    return report


def check_stiffly_accurate(t: RosenbrockTableau) -> bool:
    """``beta_si = b_i`` for all ``i`` and ``alpha_s = 1``."""
    s = t.s
    last = t.beta[s - 1]
    eq = (lambda x, y: x == y) if t.exact else (lambda x, y: abs(float(x) - float(y)) <= FLOAT_TOL)
    return all(eq(last[i], t.b[i]) for i in range(s)) and eq(t.alpha_sum[s - 1], 1)


# --- text import/export -----------------------------------------------------


def _fmt(v: Number) -> str:
    return str(v) if isinstance(v, Fraction) else repr(float(v))


def _parse_num(tok: str) -> Number:
    if re.search(r"[.eE]|inf|nan", tok):
        return float(tok)
    return Fraction(tok)


def tableau_to_text(t: RosenbrockTableau) -> str:
    def lower(m, include_diag=False):
        rows = []
        for i in range(1 if not include_diag else 0, t.s):
            rows.append(" ".join(_fmt(m[i][j]) for j in range(i)))
        return " | ".join(r for r in rows)

    lines = [
        f"name: {t.name}",
        f"stages: {t.s}",
        f"gamma: {_fmt(t.gamma)}",
        f"b: {' '.join(_fmt(v) for v in t.b)}",
        f"a_tilde: {lower(t.a_tilde)}",
        f"alpha: {lower(t.alpha)}",
        f"gamma_offdiag: {lower(t.gamma_mat)}",
    ]
    return "\n".join(lines) + "\n"


def tableau_from_text(text: str) -> RosenbrockTableau:
    fields = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition(":")
        fields[key.strip()] = val.strip()
    try:
        s = int(fields["stages"])
        g = _parse_num(fields["gamma"])
        b = tuple(_parse_num(v) for v in fields["b"].split())
    except KeyError as exc:
        raise ConfigurationError(f"tableau text missing field {exc}") from None
    zero = 0 * g

    def lower(key, diag):
        m = [[zero] * s for _ in range(s)]
        rows = [r.split() for r in fields.get(key, "").split("|")] if s > 1 else []
        if s > 1 and len(rows) != s - 1:
            raise ConfigurationError(f"{key}: expected {s - 1} rows")
        for i, r in enumerate(rows, start=1):
            if len(r) != i:
                raise ConfigurationError(f"{key}: row {i} needs {i} entries")
            for j, tok in enumerate(r):
                m[i][j] = _parse_num(tok)
        if diag is not None:
            for i in range(s):
                m[i][i] = diag
        return tuple(tuple(r) for r in m)

    return RosenbrockTableau(
        g, lower("a_tilde", None), lower("alpha", None), lower("gamma_offdiag", g), b, name=fields.get("name", "")
    )
