"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called outside its documented preconditions."""


class RepresentationError(ContractViolation):
    """Field passed in the wrong representation (physical vs spectral)."""


class GeometryMismatch(ContractViolation):
    """Operands live on different grids."""


class PoissonMeanError(ContractViolation):
    """Poisson source not mean-free."""


class TruncationError(ContractViolation):
    """Requested operator size cannot represent the data faithfully."""


class MissingSeriesError(ContractViolation):
    """A required diagnostic column is absent from a trajectory."""

    def __init__(self, column):
        super().__init__(f"trajectory is missing required series {column!r}")
        self.column = column


class ConvergenceError(RuntimeError):
    """An iterative computation did not reach its tolerance."""

    def __init__(self, message, residual=None, offenders=None):
        super().__init__(message)
        self.residual = residual
        self.offenders = offenders or []


class OverflowAbort(RuntimeError):
    """Time stepping hit non-finite or absurdly large coefficients.

    ``time`` is the last time at which the state was still valid and
    ``trajectory`` (when set by the driver) holds the partial record.
    """

    def __init__(self, message="numerical overflow", time=None, trajectory=None):
        super().__init__(message)
        self.time = time
        self.trajectory = trajectory


class ConfigError(ValueError):
    """Bad configuration file; carries line/key diagnostics when known."""

    def __init__(self, message, line_no=None, key=None):
        loc = []
        if line_no is not None:
            loc.append(f"line {line_no}")
        if key is not None:
            loc.append(f"key {key!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line_no = line_no
        self.key = key
