"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class PlurivalError(Exception):
    exit_code = 1


class ValidationError(PlurivalError, ValueError):
    """Malformed input: dimension mismatch, negative exponent, bad normalization."""

    exit_code = 1


class CapacityError(PlurivalError):
    """A desk-scale limit (LP size, lattice enumeration box) was exceeded."""

    exit_code = 2

    def __init__(self, message, axis=None):
        super().__init__(message)
        self.axis = axis


class DomainError(PlurivalError):
    """The mathematical object requested does not exist for these inputs."""

    exit_code = 1


class PreconditionError(PlurivalError):
    exit_code = 1


class VerificationError(PlurivalError):
    """A theorem check failed; ``anchor`` names the statement that was violated."""

    exit_code = 3

    def __init__(self, message, anchor=None):
        super().__init__(message)
        self.anchor = anchor
