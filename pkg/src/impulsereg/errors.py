"""Shared exception types."""


class InputError(ValueError):
    """Malformed user input: bad shapes, out-of-range parameters, grid mismatches."""


class ConfigError(InputError):
    """Invalid experiment configuration (unknown key, unparsable value)."""


class DiagnosticError(RuntimeError):
    """Numerical diagnostics failed: divergent analytic extension, degenerate weight."""


class ConvergenceError(RuntimeError):
    """Iterative solver did not reach the requested tolerance."""
