"""Time integration driver, convergence studies and table I/O."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core import ConfigurationError, NumericalError, PdeProblem, StateVector, StepStats, discrete_norms
from ..multistep import PcConfig, si_pc_step, starting_procedure
from ..rosenbrock import builtin_tableau, construct_third_order, gamma_label, parse_gamma, rosenbrock_step
from ..spatial import WENO32, WENO53, WenoConfig
from .cases import TestCase, get_case

INTEGRATORS = ("rosenbrock", "si-pc-bdf")


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines one convergence run.

    ``None`` fields fall back to the test-case defaults.  ``weno=None``
    takes the case's WENO variant, its high-order variant for SI-PC BDF
    with ``p >= 4``.
    """

    integrator: str = "rosenbrock"
    gamma: str = "3/4"
    p: int = 3
    mu: Optional[int] = None
    predictor: str = "si-euler"
    start_m: Optional[int] = None
    exact_start: bool = False
    space_order: int = 4
    weno: Optional[str] = None
    weno_epsilon: Optional[float] = None
    n_list: Optional[Tuple[int, ...]] = None
    dt_factor: Optional[float] = None
    cfl: Optional[float] = None
    final_time: Optional[float] = None
    strategy: str = "banded"
    backend: Optional[str] = None

    def __post_init__(self):
        if self.integrator not in INTEGRATORS:
            raise ConfigurationError(f"integrator must be one of {INTEGRATORS}")
        if self.n_list is not None:
            ns = tuple(int(n) for n in self.n_list)
            if any(b <= a for a, b in zip(ns, ns[1:])):
                raise ConfigurationError("N list must be strictly increasing")
            object.__setattr__(self, "n_list", ns)
        if self.weno not in (None, WENO32, WENO53):
            raise ConfigurationError(f"unknown WENO variant {self.weno!r}")
        if self.weno_epsilon is not None and not self.weno_epsilon > 0:
            raise ConfigurationError("WENO epsilon must be positive")

    def weno_config(self, case: Optional[TestCase] = None) -> WenoConfig:
        high = self.integrator == "si-pc-bdf" and self.p >= 4
        base = case.default_weno(high) if case is not None else WenoConfig(WENO53 if high else WENO32)
        return WenoConfig(
            self.weno or base.variant,
            base.epsilon if self.weno_epsilon is None else self.weno_epsilon,
            base.llf_alpha,
        )

    def label(self) -> str:
        if self.integrator == "rosenbrock":
            return f"SI-R gamma={gamma_label(parse_gamma(self.gamma))}"
        mu = self.p if self.mu is None else self.mu
        return f"SI-PC^{mu} BDF{self.p}"


_CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_config_text(text: str, base: RunConfig = RunConfig()) -> RunConfig:
    """``key = value`` lines (``#`` comments) overriding ``base``."""
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_TYPES:
            raise ConfigurationError(f"config line {lineno}: unknown key {key!r}")
        updates[key] = _coerce(key, val)
    return replace(base, **updates)


def _coerce(key, val):
    if val.lower() in ("none", ""):
        return None
    if key in ("p", "mu", "start_m", "space_order"):
        return int(val)
    if key in ("dt_factor", "cfl", "final_time", "weno_epsilon"):
        return float(eval_number(val))
    if key == "exact_start":
        return val.lower() in ("1", "true", "yes", "on")
    if key == "n_list":
        return tuple(int(v) for v in val.replace(",", " ").split())
    return val


def eval_number(text: str) -> float:
    """Parse ``3.14``, ``pi``, ``pi/4`` or ``2*pi`` style constants."""
    t = text.strip().lower().replace(" ", "")
    num = 1.0
    for part in t.split("*"):
        den = 1.0
        if "/" in part:
            part, d = part.split("/", 1)
            den = float(d)
        v = math.pi if part == "pi" else float(part)
        num *= v / den
    return num


def timestep_rule(cfl: float, dx: float, max_fprime: float, fallback_c: float = 1.0) -> float:
    """``cfl * dx / max|f'|``; ``fallback_c * dx`` when ``max|f'| = 0``."""
    if not (cfl > 0 and dx > 0):
        raise ConfigurationError("cfl and dx must be positive")
    if max_fprime == 0:
        return fallback_c * dx
    return cfl * dx / max_fprime


def tableau_for(gamma):
    g = parse_gamma(gamma)
    try:
        return builtin_tableau(g)
    except ConfigurationError:
        return construct_third_order(g)


@dataclass
class RunResult:
    state: StateVector
    dt: float
    steps: int
    stats: StepStats
    history_mass: List[float] = field(default_factory=list)


def case_dt(case: TestCase, cfg: RunConfig, problem: PdeProblem, u0: np.ndarray) -> float:
    dx = problem.grid.dx
    cfl = cfg.cfl if cfg.cfl is not None else (case.cfl if cfg.dt_factor is None else None)
    if cfl is not None:
        return timestep_rule(cfl, dx, problem.flux_derivative_bound(u0), case.dt_factor or 1.0)
    c = cfg.dt_factor if cfg.dt_factor is not None else case.dt_factor
    return c * dx


def integrate(
    problem: PdeProblem,
    u0: np.ndarray,
    final_time: float,
    dt: float,
    cfg: RunConfig,
    start_m: int = 4,
    track_mass: bool = False,
) -> RunResult:
    """Integrate ``[0, T]``; lands exactly on ``T``.

    One-step runs shorten the last step; multistep runs use the uniform step
    ``T / ceil(T / dt)`` (constant step size is required by the history).
    """
    stats = StepStats()
    state = StateVector(u0, 0.0)
    mass = []
    dx = problem.grid.dx if problem.grid is not None else 1.0
    if track_mass:
        mass.append(float(state.values.sum() * dx))
    if final_time == 0:
        return RunResult(state, dt, 0, stats, mass)
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    solver = {"strategy": cfg.strategy, "backend": cfg.backend}
    if cfg.integrator == "rosenbrock":
        tab = tableau_for(cfg.gamma)
        n_steps = max(1, math.ceil(final_time / dt - 1e-9))
        for k in range(n_steps):
            h = dt if k < n_steps - 1 else final_time - state.time
            state = rosenbrock_step(problem, tab, state, h, stats, **solver)
            if track_mass:
                mass.append(float(state.values.sum() * dx))
        state.time = final_time
        return RunResult(state, dt, n_steps, stats, mass)

    n_steps = max(1, math.ceil(final_time / dt - 1e-9))
    h = final_time / n_steps
    pc = PcConfig(cfg.p, cfg.mu, cfg.predictor, cfg.start_m or start_m, cfg.exact_start)
    if n_steps < cfg.p - 1:
        raise ConfigurationError("final time shorter than the starting procedure")
    hist = starting_procedure(problem, state, h, pc, stats, **solver)
    if track_mass:
        mass.extend(float(s.values.sum() * dx) for s in list(hist.newest_first())[::-1][1:])
    steps_done = cfg.p - 1
    for k in range(steps_done, n_steps):
        v = si_pc_step(problem, hist, h, pc, stats, **solver)
        hist.push(v)
        if track_mass:
            mass.append(float(v.values.sum() * dx))
    out = hist.latest
    out.time = final_time
    return RunResult(out, h, n_steps, stats, mass)


@dataclass
class TableRow:
    n: int
    l1: float
    l2: float
    linf: float
    order_l1: Optional[float] = None
    order_l2: Optional[float] = None
    order_linf: Optional[float] = None
    note: str = ""


@dataclass
class ConvergenceTable:
    label: str
    rows: List[TableRow]
    case_id: str = ""

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def row(self, n: int) -> TableRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def rounded(self) -> "ConvergenceTable":
        def sig(v, digits):
            return None if v is None else float(f"{v:.{digits}e}")

        rows = [
            TableRow(
                r.n, sig(r.l1, 4), sig(r.l2, 4), sig(r.linf, 4),
                *(None if o is None else round(o, 2) for o in (r.order_l1, r.order_l2, r.order_linf)),
                r.note,
            )
            for r in self.rows
        ]
        return ConvergenceTable(self.label, rows, self.case_id)


def observed_order(coarse: float, fine: float) -> Optional[float]:
    if not (coarse > 0 and fine > 0) or not (math.isfinite(coarse) and math.isfinite(fine)):
        return None
    return math.log2(coarse / fine)


def fill_orders(rows: List[TableRow]):
    for prev, cur in zip(rows, rows[1:]):
        if cur.n != 2 * prev.n:
            continue
        cur.order_l1 = observed_order(prev.l1, cur.l1)
        cur.order_l2 = observed_order(prev.l2, cur.l2)
        cur.order_linf = observed_order(prev.linf, cur.linf)


def run_case(case: TestCase, cfg: RunConfig, n: int, track_mass: bool = False) -> Tuple[RunResult, np.ndarray]:
    weno = cfg.weno_config(case)
    problem = case.problem(n, cfg.space_order, weno, cfg.backend)
    u0 = case.initial(problem.grid)
    T = case.final_time if cfg.final_time is None else cfg.final_time
    dt = case_dt(case, cfg, problem, u0)
    res = integrate(problem, u0, T, dt, cfg, case.start_m, track_mass)
    err = res.state.values - case.exact(problem.grid.x, T)
    return res, err


def run_convergence_study(case, cfg: RunConfig) -> ConvergenceTable:
    """Errors against the exact solution at ``T`` for each ``N``."""
    case = get_case(case) if isinstance(case, str) else case
    ns = cfg.n_list or case.n_list
    length = case.domain[1] - case.domain[0]
    rows = []
    for n in ns:
        try:
            res, err = run_case(case, cfg, n)
            e = discrete_norms(err, length / n, normalize_by=length)
            rows.append(TableRow(n, e.l1, e.l2, e.linf))
        except (NumericalError, ConfigurationError, FloatingPointError) as exc:
            rows.append(TableRow(n, math.nan, math.nan, math.nan, note=f"failed: {exc}"))
    fill_orders(rows)
    return ConvergenceTable(cfg.label(), rows, case.id)


# --- emission ---------------------------------------------------------------

HEADER = ["scheme", "N", "L2", "order_L2", "L1", "order_L1", "Linf", "order_Linf"]


def _fe(v):
    return "nan" if v is None or not math.isfinite(v) else f"{v:.4e}"


def _fo(v):
    return "-" if v is None else f"{v:.2f}"


def _row_cells(label, r: TableRow):
    return [label, str(r.n), _fe(r.l2), _fo(r.order_l2), _fe(r.l1), _fo(r.order_l1), _fe(r.linf), _fo(r.order_linf)]


def emit_table(tables, fmt: str = "csv", path=None) -> str:
    """Render one or more tables; writes to ``path`` when given."""
    if isinstance(tables, ConvergenceTable):
        tables = [tables]
    if not tables or not any(t.rows for t in tables):
        raise ConfigurationError("nothing to emit: empty table")
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        for t in tables:
            for r in t.rows:
                w.writerow(_row_cells(t.label, r))
    elif fmt == "markdown":
        buf.write("| " + " | ".join(HEADER) + " |\n")
        buf.write("|" + "---|" * len(HEADER) + "\n")
        for t in tables:
            for k, r in enumerate(t.rows):
                cells = _row_cells(t.label if k == 0 else "", r)
                buf.write("| " + " | ".join(cells) + " |\n")
    else:
        raise ConfigurationError(f"unknown table format {fmt!r}")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def parse_table(text: str) -> List[ConvergenceTable]:
    """Inverse of :func:`emit_table` (either format)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigurationError("empty table text")
    if lines[0].startswith("|"):
        cells = [[c.strip() for c in ln.strip().strip("|").split("|")] for ln in lines if not ln.startswith("|---")]
    else:
        cells = list(csv.reader(lines))
    if cells[0] != HEADER:
        raise ConfigurationError("unrecognised table header")
    tables: List[ConvergenceTable] = []
    label = None
    for c in cells[1:]:
        if c[0] or label is None:
            if c[0] != label:
                label = c[0]
                tables.append(ConvergenceTable(label, []))
        fe = lambda s: math.nan if s == "nan" else float(s)  # noqa: E731
        fo = lambda s: None if s == "-" else float(s)  # noqa: E731
        tables[-1].rows.append(
            TableRow(int(c[1]), fe(c[4]), fe(c[2]), fe(c[6]), fo(c[5]), fo(c[3]), fo(c[7]))
        )
    return tables


def sweep_configs(case_id: str) -> List[RunConfig]:
    """The scheme variants shown in the published table for ``case_id``."""
    case = get_case(case_id)
    if case.id.startswith("R"):
        gammas = ["13/50", "3/4", "1-1/sqrt2"] if case.id == "R1_convdiff" else ["3/10", "3/4", "1-1/sqrt2"]
        return [RunConfig("rosenbrock", gamma=g) for g in gammas]
    return [RunConfig("si-pc-bdf", p=p, mu=p) for p in (2, 3, 4)]


def compare_rows(ours: TableRow, ref: Sequence[float]):
    """Ratios ``ours / reference`` for (L2, L1, Linf)."""
    return tuple(o / r if r else math.nan for o, r in zip((ours.l2, ours.l1, ours.linf), ref))
