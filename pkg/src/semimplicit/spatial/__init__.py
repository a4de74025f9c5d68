from .stencils import (
    DIFFUSION_FORMS,
    DISPERSIVE_FORMS,
    StencilMatrix,
    biharmonic_matrix,
    diffusion_matrix,
    dispersive_matrix,
    first_derivative,
    second_derivative,
)
from .weno import WENO32, WENO53, WenoConfig, llf_alpha, nonlinear_weights, weno_convection

__all__ = [
    "DIFFUSION_FORMS",
    "DISPERSIVE_FORMS",
    "StencilMatrix",
    "WENO32",
    "WENO53",
    "WenoConfig",
    "biharmonic_matrix",
    "diffusion_matrix",
    "dispersive_matrix",
    "first_derivative",
    "llf_alpha",
    "nonlinear_weights",
    "second_derivative",
    "weno_convection",
]
