from .cases import CASES, KDV_EPSILON, TestCase, get_case
from .reference_tables import REFERENCE, REFERENCE_SCALE, TABLE_CASES, reference_row
from .study import (
    ConvergenceTable,
    RunConfig,
    TableRow,
    emit_table,
    integrate,
    parse_config_text,
    parse_table,
    run_case,
    run_convergence_study,
    sweep_configs,
    timestep_rule,
)

__all__ = [
    "CASES",
    "KDV_EPSILON",
    "REFERENCE",
    "REFERENCE_SCALE",
    "TABLE_CASES",
    "ConvergenceTable",
    "RunConfig",
    "TableRow",
    "TestCase",
    "emit_table",
    "get_case",
    "integrate",
    "parse_config_text",
    "parse_table",
    "reference_row",
    "run_case",
    "run_convergence_study",
    "sweep_configs",
    "timestep_rule",
]
