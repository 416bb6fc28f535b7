"""Exception hierarchy shared by all cvkerr modules."""


class CvKerrError(Exception):
    """Base class for every error raised by cvkerr."""


class InvalidArgument(CvKerrError, ValueError):
    pass


class DomainError(CvKerrError, ValueError):
    """A state does not fit the discretization it was asked to live on."""


class NumericalFailure(CvKerrError, ArithmeticError):
    pass


class BranchCutError(NumericalFailure):
    """Principal logarithm is ambiguous: an eigenvalue sits on the -1 branch cut."""


class AliasingError(NumericalFailure):
    """Grid transform pushed non-negligible mass onto the window edges."""


class TruncationError(NumericalFailure):
    """Fock truncation lost too much norm."""


class PostselectFailure(CvKerrError):
    """Homodyne outcomes fell outside the acceptance window on every retry."""

    def __init__(self, message, attempts=0, acceptance_probability=float("nan")):
        super().__init__(message)
        self.attempts = attempts
        self.acceptance_probability = acceptance_probability


class MemoryGuardError(CvKerrError, MemoryError):
    pass
