"""Semi-implicit Rosenbrock and predictor-corrector BDF integrators for 1D PDEs.

Problems are written as ``dU/dt = F(U, t) + B(U) U``: ``F`` (convection,
sources) is explicit, ``B(U) V`` is linear in the implicit argument ``V``.
"""

from ._accel import backend_name
from .core import (
    ConfigurationError,
    ErrorNorms,
    Grid,
    NumericalError,
    PdeProblem,
    SingularSystemError,
    StateVector,
    StepStats,
    assemble_split,
    build_grid,
    discrete_norms,
)
from .multistep import BdfScheme, History, PcConfig, bdf_coefficients, si_pc_step, starting_procedure
from .rosenbrock import (
    RosenbrockTableau,
    builtin_tableau,
    construct_third_order,
    rosenbrock_step,
    validate_order_conditions,
)
from .stability import boundary_locus, r_at_infinity, stability_function

__version__ = "0.1.0"

__all__ = [
    "BdfScheme",
    "ConfigurationError",
    "ErrorNorms",
    "Grid",
    "History",
    "NumericalError",
    "PcConfig",
    "PdeProblem",
    "RosenbrockTableau",
    "SingularSystemError",
    "StateVector",
    "StepStats",
    "assemble_split",
    "backend_name",
    "bdf_coefficients",
    "boundary_locus",
    "build_grid",
    "builtin_tableau",
    "construct_third_order",
    "discrete_norms",
    "r_at_infinity",
    "rosenbrock_step",
    "si_pc_step",
    "stability_function",
    "starting_procedure",
    "validate_order_conditions",
]
