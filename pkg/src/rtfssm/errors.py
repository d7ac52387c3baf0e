"""Exception hierarchy.

Every domain failure raised by the package derives from :class:`RtfError`, so
callers (and the CLI) can separate domain errors from programming errors.
"""


class RtfError(Exception):
    """Base class for all domain errors."""


class InvalidParams(RtfError, ValueError):
    pass


class TruncatedFormNotExpandable(RtfError):
    pass


class NeedsCorrectedNumerator(RtfError):
    pass


class PoleAtEvaluationPoint(RtfError):
    pass


class LengthMismatch(RtfError, ValueError):
    pass


class LengthTooShort(RtfError, ValueError):
    pass


class DenominatorZeroOnUnitCircle(RtfError):
    pass


class ChannelMismatch(RtfError, ValueError):
    pass


class StateSizeMismatch(RtfError, ValueError):
    pass


class NearSingularCorrection(RtfError):
    pass


class RepeatedPoles(RtfError):
    pass


class RootFindingDiverged(RtfError):
    pass


class NonRealKernel(RtfError):
    pass


class ZeroVector(RtfError, ValueError):
    pass


class FirTooLong(RtfError, ValueError):
    pass


class NonFiniteObjective(RtfError):
    pass


class NonFiniteGradient(RtfError):
    pass


class TrainingDiverged(RtfError):
    pass


class ParseError(RtfError):
    """Input file is not well-formed JSON/CSV."""


class SchemaError(RtfError):
    """Input file parses but its fields or shapes are inconsistent."""


class VersionError(RtfError):
    pass
