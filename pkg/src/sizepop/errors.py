"""Exception hierarchy for sizepop."""


class SizePopError(Exception):
    """Base class for all errors raised by sizepop."""


class AdmissibilityError(SizePopError, ValueError):
    """Model ingredients violate a sign or positivity constraint."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DomainError(SizePopError, ValueError):
    """A coefficient was evaluated outside of its domain."""


class ArgumentError(SizePopError, ValueError):
    """Invalid argument (grid size, time window, ...)."""


class DimensionError(SizePopError, ValueError):
    """State vector and generator dimensions disagree."""


class SolveError(SizePopError, ArithmeticError):
    """Linear solve failed (singular or numerically singular system)."""


class NonFiniteError(SizePopError, ArithmeticError):
    """A state vector acquired NaN or infinite entries."""


class ConvergenceError(SizePopError, RuntimeError):
    """Iteration did not converge within the allowed budget."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class DegenerateError(SizePopError, RuntimeError):
    """Iterate collapsed to zero."""


class ParseError(SizePopError, ValueError):
    """Malformed run configuration."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class IoError(SizePopError, OSError):
    """Output could not be written."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path is not None else message)
