from .stepper import rosenbrock_step, si_rk_step
from .tableau import (
    BUILTIN_GAMMAS,
    GAMMA_SDIRK,
    ConstructionError,
    DoubleButcherTableau,
    OrderConditionReport,
    RosenbrockTableau,
    builtin_tableau,
    check_stiffly_accurate,
    construct_third_order,
    gamma_label,
    one_stage_tableau,
    parse_gamma,
    si_euler_double,
    tableau_from_text,
    tableau_to_text,
    two_stage_sdirk_double,
    validate_order_conditions,
)

__all__ = [
    "BUILTIN_GAMMAS",
    "GAMMA_SDIRK",
    "ConstructionError",
    "DoubleButcherTableau",
    "OrderConditionReport",
    "RosenbrockTableau",
    "builtin_tableau",
    "check_stiffly_accurate",
    "construct_third_order",
    "gamma_label",
    "one_stage_tableau",
    "parse_gamma",
    "rosenbrock_step",
    "si_euler_double",
    "si_rk_step",
    "tableau_from_text",
    "tableau_to_text",
    "two_stage_sdirk_double",
    "validate_order_conditions",
]
