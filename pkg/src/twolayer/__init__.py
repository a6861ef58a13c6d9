"""Two-layer internal wave models on a doubly periodic domain.

Modules: ``params`` (coefficients), ``field2d`` (spectral fields),
``closed_form`` (solitary waves), ``kbk`` (the two-dimensional system),
``kp`` (the unidirectional reduction), ``reconstruct`` (velocities and
pressure), ``config``/``io``/``cli`` (runs and artifacts).
"""
from .errors import (ConfigError, ConstraintViolation, DecayError, NumericalAbort,
                     ParameterError, SpeedWindowError)
from .field2d import Field2D, Grid2D
from .params import ModelCoefficients, PhysicalParams, derive_coefficients

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConstraintViolation", "DecayError", "NumericalAbort",
    "ParameterError", "SpeedWindowError", "Field2D", "Grid2D",
    "ModelCoefficients", "PhysicalParams", "derive_coefficients",
]
