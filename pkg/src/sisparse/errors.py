"""Exception types.

Every error carries an ``exit_code`` used by the command-line front end:
2 for usage / input-parsing problems, 1 for domain failures.
"""


class SisparseError(Exception):
    """Base class for all library errors."""

    exit_code = 1

    def record(self):
        """Machine-readable description of the error."""
        return {"error": type(self).__name__, "message": str(self)}


# --- structural / input errors -------------------------------------------------

class MismatchedBanks(SisparseError):
    pass


class DimensionMismatch(SisparseError):
    pass


class NotHermitian(SisparseError):
    pass


class NotOrthonormal(SisparseError):
    pass


class NotUnitary(SisparseError):
    pass


class NotUnitaryCross(SisparseError):
    """Two orthonormal banks that do not span the same space."""


class TooLong(SisparseError):
    pass


class TooLarge(SisparseError):
    pass


class ZeroColumn(SisparseError):
    pass


class NotPerfectSquare(SisparseError):
    pass


class CoherenceBoundViolation(SisparseError):
    """Measured coherence falls outside [1/sqrt(N), 1] by more than 1e-9."""


# --- solver / pipeline errors ------------------------------------------------

class NoSolution(SisparseError):
    pass


class NotConverged(SisparseError):
    """Iterative solver stopped before meeting its tolerance.

    The best iterate and final residuals are attached so callers can inspect
    them.
    """

    def __init__(self, message, best=None, primal_residual=None, dual_residual=None):
        super().__init__(message)
        self.best = best
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual

    def record(self):
        rec = super().record()
        rec["primal_residual"] = self.primal_residual
        rec["dual_residual"] = self.dual_residual
        return rec


class InconsistentSystem(SisparseError):
    pass


class RankDeficientAtFrequency(SisparseError):
    def __init__(self, message, omega=None, index=None):
        super().__init__(message)
        self.omega = omega
        self.index = index

    def record(self):
        rec = super().record()
        rec["omega"] = self.omega
        rec["index"] = self.index
        return rec


class StructureNotConstant(SisparseError):
    pass


class SamplerNotBasis(SisparseError):
    pass


class IoError(SisparseError):
    """A report or data file could not be written."""


# --- CLI input errors (usage class) ------------------------------------------

class UsageError(SisparseError):
    exit_code = 2


class ParseError(UsageError):
    pass


class ValidationError(UsageError):
    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field

    def record(self):
        rec = super().record()
        rec["field"] = self.field
        return rec


class ConditionViolated(UserWarning):
    """A sufficient recovery condition fails although a consistent solution was found."""
