"""Exception types shared across the package.

The CLI maps each family to a fixed exit code (see :mod:`twolayer.cli`).
"""


class ParameterError(ValueError):
    """Invalid physical parameters or model coefficients."""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SpeedWindowError(ValueError):
    """Soliton speed outside the admissible window."""


class DecayError(ValueError):
    """Localized data does not decay sufficiently at the periodic box edge."""

    def __init__(self, message, edge_magnitude):
        super().__init__(f"{message} (edge magnitude {edge_magnitude:.3e})")
        self.edge_magnitude = edge_magnitude


class NumericalAbort(RuntimeError):
    """Time integration aborted: non-finite values or ill-posedness growth."""

    def __init__(self, message, step=None):
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
        self.step = step


class ConstraintViolation(RuntimeError):
    """A structural constraint (zero curl, kx=0 content) was violated."""
