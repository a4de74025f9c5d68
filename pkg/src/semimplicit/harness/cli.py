"""Command line interface: ``semimplicit {run,sweep,stability,tableau,verify}``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
3 verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import replace
from typing import List, Optional, Sequence

from ..core import ConfigurationError, NumericalError
from ..rosenbrock import (
    ConstructionError,
    builtin_tableau,
    check_stiffly_accurate,
    construct_third_order,
    parse_gamma,
    tableau_to_text,
    validate_order_conditions,
)
from ..stability import boundary_locus, r_at_infinity, r_large_y
from .cases import get_case
from .reference_tables import REFERENCE_SCALE, TABLE_CASES, reference_row, scheme_key, table_id
from .study import (
    INTEGRATORS,
    ConvergenceTable,
    RunConfig,
    emit_table,
    eval_number,
    parse_config_text,
    run_convergence_study,
    sweep_configs,
)
from .verify import run_checks

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_MISMATCH = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for numerical failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_run_options(p):
    p.add_argument("--config", help="key = value file with RunConfig fields")
    p.add_argument("--integrator", choices=INTEGRATORS)
    p.add_argument("--gamma", help="Rosenbrock gamma: 3/4, 13/50, 1-1/sqrt2, 3/10 ...")
    p.add_argument("--p", type=int, help="BDF order")
    p.add_argument("--mu", type=int, help="number of corrections (default p)")
    p.add_argument("--predictor", choices=("si-euler", "chain"))
    p.add_argument("--start-m", type=int, help="substeps per step in the starting procedure")
    p.add_argument("--exact-start", action="store_true", default=None, help="start from exact history values")
    p.add_argument("--N", dest="n_list", type=int, nargs="+", help="grid sizes")
    p.add_argument("--dt-factor", help="dt = C dx")
    p.add_argument("--cfl", help="dt = cfl dx / max|f'(u0)|")
    p.add_argument("--final-time", help="override T (accepts pi/4 style values)")
    p.add_argument("--weno", choices=("WENO32", "WENO53"))
    p.add_argument("--weno-epsilon", type=float)
    p.add_argument("--space-order", type=int, choices=(2, 4))
    p.add_argument("--strategy", choices=("banded", "dense"))
    p.add_argument("--backend", choices=("numba", "numpy"))
    p.add_argument("--format", choices=("csv", "markdown"), default="markdown")
    p.add_argument("--out", help="write the table to this path")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="semimplicit", description="Semi-implicit Rosenbrock and SI-PC BDF integrators.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="convergence run of one case and one scheme")
    p.add_argument("--case", required=True, help="case id (R1, M4, R2L10, ...)")
    _add_run_options(p)

    p = sub.add_parser("sweep", help="reproduce a published table with reference and ratio columns")
    p.add_argument("--table", required=True, choices=sorted(TABLE_CASES))
    p.add_argument("--norms", choices=("reference", "mean"), default="reference",
                   help="print errors in the reference convention (unit sine = unit norm) or as mean norms")
    _add_run_options(p)

    p = sub.add_parser("stability", help="boundary-locus field and contour export")
    p.add_argument("--gamma", default="3/4")
    p.add_argument("--re", type=float, nargs=2, default=(-6.0, 2.0), metavar=("MIN", "MAX"))
    p.add_argument("--im", type=float, nargs=2, default=(-4.0, 4.0), metavar=("MIN", "MAX"))
    p.add_argument("--resolution", type=int, default=400)
    p.add_argument("--y-samples", type=int, default=600)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--plot", help="also save a PNG (needs matplotlib)")
    p.add_argument("--backend", choices=("numba", "numpy"))

    p = sub.add_parser("tableau", help="construct, print and validate a third-order tableau")
    p.add_argument("--gamma", required=True)
    p.add_argument("--c4", choices=("unit", "other"), default="unit", help="root choice for c_tilde_4")
    p.add_argument("--validate", action="store_true")
    p.add_argument("--out", help="write the tableau text to this path")

    sub.add_parser("verify", help="run the fast invariant checks")
    return ap


def config_from_args(args, base: Optional[RunConfig] = None) -> RunConfig:
    cfg = base or RunConfig()
    if args.config:
        with open(args.config) as fh:
            cfg = parse_config_text(fh.read(), cfg)
    upd = {}
    for key in ("integrator", "gamma", "p", "mu", "predictor", "start_m", "exact_start", "weno",
                "weno_epsilon", "space_order", "strategy", "backend"):
        val = getattr(args, key, None)
        if val is not None:
            upd[key] = val
    for key in ("dt_factor", "cfl", "final_time"):
        val = getattr(args, key, None)
        if val is not None:
            upd[key] = eval_number(val)
    if args.n_list:
        upd["n_list"] = tuple(args.n_list)
    return replace(cfg, **upd)


def _write(text: str, path: Optional[str]):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _failed(tables: Sequence[ConvergenceTable]) -> bool:
    return any(r.note.startswith("failed") for t in tables for r in t.rows)


def cmd_run(args) -> int:
    case = get_case(args.case)
    cfg = config_from_args(args)
    table = run_convergence_study(case, cfg)
    _write(emit_table(table, args.format), args.out)
    for r in table.rows:
        if r.note:
            print(f"N={r.n}: {r.note}", file=sys.stderr)
    return EXIT_NUMERIC if _failed([table]) else EXIT_OK


SWEEP_HEADER = ["scheme", "N", "L2", "order_L2", "ref_L2", "ratio_L2", "L1", "ref_L1", "ratio_L1",
                "Linf", "order_Linf", "ref_Linf", "ratio_Linf"]


def _cell(v, fmt):
    return "-" if v is None or (isinstance(v, float) and not math.isfinite(v)) else format(v, fmt)


def sweep_rows(tid: str, tables: Sequence[ConvergenceTable], keys, norms: str = "reference") -> List[List[str]]:
    scale = REFERENCE_SCALE if norms == "reference" else (1.0, 1.0, 1.0)
    out = []
    for t, key in zip(tables, keys):
        for k, r in enumerate(t.rows):
            ref = reference_row(tid, key, r.n)
            ours = (r.l2, r.l1, r.linf)
            shown = [o * s for o, s in zip(ours, scale)]
            refs = [None] * 3 if ref is None else [v * s for v, s in zip(ref, scale)]
            ratios = [None if rv is None else o / rv for o, rv in zip(shown, refs)]
            out.append([
                t.label if k == 0 else "", str(r.n),
                _cell(shown[0], ".4e"), _cell(r.order_l2, ".2f"), _cell(refs[0], ".4e"), _cell(ratios[0], ".2f"),
                _cell(shown[1], ".4e"), _cell(refs[1], ".4e"), _cell(ratios[1], ".2f"),
                _cell(shown[2], ".4e"), _cell(r.order_linf, ".2f"), _cell(refs[2], ".4e"), _cell(ratios[2], ".2f"),
            ])
    return out


def render_rows(header, rows, fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    else:
        buf.write("| " + " | ".join(header) + " |\n")
        buf.write("|" + "---|" * len(header) + "\n")
        for r in rows:
            buf.write("| " + " | ".join(r) + " |\n")
    return buf.getvalue()


def cmd_sweep(args) -> int:
    tid = table_id(args.table)
    case = get_case(TABLE_CASES[tid])
    tables, keys = [], []
    for base in sweep_configs(case.id):
        cfg = config_from_args(args, base)
        tables.append(run_convergence_study(case, cfg))
        keys.append(scheme_key(cfg))
    text = render_rows(SWEEP_HEADER, sweep_rows(tid, tables, keys, args.norms), args.format)
    _write(text, args.out)
    return EXIT_NUMERIC if _failed(tables) else EXIT_OK


def _tableau(gamma, c4="unit"):
    g = parse_gamma(gamma)
    if c4 == "unit":
        try:
            return builtin_tableau(g)
        except ConfigurationError:
            pass
    return construct_third_order(g, c4)


def cmd_stability(args) -> int:
    tab = _tableau(args.gamma)
    region = boundary_locus(tab, tuple(args.re), tuple(args.im), args.resolution, args.y_samples,
                            backend=args.backend, out_dir=args.out_dir)
    if args.plot:
        region.plot(args.plot)
    n_pts = sum(len(c) for c in region.contours)
    print(f"{tab.name}: {len(region.contours)} contour(s), {n_pts} points, "
          f"{int(region.flagged.sum())} flagged nodes, written to {args.out_dir}")
    return EXIT_OK


def cmd_tableau(args) -> int:
    tab = _tableau(args.gamma, args.c4)
    text = tableau_to_text(tab)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(text, end="")
    if not args.validate:
        return EXIT_OK
    rep = validate_order_conditions(tab)
    print("order conditions:")
    for line in rep.lines():
        print(line)
    stiff = check_stiffly_accurate(tab)
    rinf = r_at_infinity(tab, exact=True)
    print(f"order 3: {'satisfied' if rep.satisfied_order >= 3 else 'NOT satisfied'}")
    print(f"residuals exact: {rep.exact}")
    print(f"stiffly accurate: {str(stiff).lower()}")
    print(f"R_inf = {rinf}   |R(0, 1e12 i)| = {abs(r_large_y(tab, 0.0)):.3e}")
    return EXIT_OK if rep.satisfied_order >= 3 and stiff else EXIT_MISMATCH


def cmd_verify(args) -> int:
    results = run_checks()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.ok for r in results) else EXIT_MISMATCH


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "stability": cmd_stability, "tableau": cmd_tableau,
            "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConstructionError, ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
