"""Exception hierarchy.  Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class LogTRError(Exception):
    exit_code = 2


class InvalidInput(LogTRError):
    """Malformed data or schema violation."""


class Unsupported(LogTRError):
    """A well-formed request outside the implemented scope."""

    exit_code = 3


# series
class SeriesError(LogTRError):
    exit_code = 3


class TagMismatch(SeriesError):
    pass


class DivisionByZeroSeries(SeriesError):
    pass


class TruncationExhausted(SeriesError):
    pass


class OutOfRange(TruncationExhausted):
    """A requested coefficient lies beyond the known window."""


class InvalidValuation(SeriesError):
    pass


class NotInvertible(SeriesError):
    pass


class NonSquareLeading(SeriesError):
    pass


class ResidueObstruction(SeriesError):
    pass


# curve admissibility
class AdmissibilityError(LogTRError):
    """Base for violations of the admissibility conditions."""

    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness


class NonSimpleRamification(AdmissibilityError):
    pass


class DySingularAtRamification(AdmissibilityError):
    pass


class SharedZeroLoci(AdmissibilityError):
    pass


class VitalAtLogCutConflict(AdmissibilityError):
    pass


class RamificationMismatch(AdmissibilityError):
    pass


class IrrationalRamification(AdmissibilityError):
    exit_code = 3


class UnsupportedLocalModel(Unsupported):
    pass


class CollisionOfSpecialPoints(LogTRError):
    pass


class EvaluationAtPole(LogTRError):
    pass


class TauUnsupported(Unsupported):
    pass


class InconclusiveFD(LogTRError):
    exit_code = 1
