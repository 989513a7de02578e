"""Exception types raised across the package.

Every error derives from :class:`WageUrnError` (itself a ``ValueError``) so
callers can catch the family at once. The CLI maps :class:`ConfigError` and
:class:`DataError` subclasses onto distinct exit codes.
"""


class WageUrnError(ValueError):
    pass


class ConfigError(WageUrnError):
    """Invalid parameters or configuration."""


class DataError(WageUrnError):
    """Malformed or inconsistent input data."""


# model-core
class NonPositiveAlpha(ConfigError):
    pass


class GammaNotSimplex(ConfigError):
    pass


class LaborShareOutOfRange(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class ZeroBaseNonPositiveExponent(WageUrnError):
    pass


class AllWeightsZero(WageUrnError):
    pass


class IndexOutOfRange(WageUrnError):
    pass


class DegenerateLaborShareOne(WageUrnError):
    pass


class BoundaryPoint(WageUrnError):
    pass


class ExponentNotSublinear(WageUrnError):
    pass


# urn-engine
class EnvelopeViolated(AssertionError):
    """A true weight exceeded its sampling envelope (refresh-bound bug)."""


class NegativeTime(WageUrnError):
    pass


class DuplicateSeeds(ConfigError):
    pass


class InvalidSchedule(ConfigError):
    pass


# dynamics-analysis
class StepSizeNonPositive(ConfigError):
    pass


class LeftSimplex(WageUrnError):
    pass


class FixedPointTimeout(WageUrnError):
    """Integration hit its time limit; ``best`` holds the closest point found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


# calibration
class EmptyTable(DataError):
    pass


class NonPositiveWage(DataError):
    pass


class WealthDecrease(DataError):
    pass


class DegenerateDirection(WageUrnError):
    pass


class NoInteriorMinimum(WageUrnError):
    pass


class DegenerateTarget(WageUrnError):
    pass


class ZeroWageWithPositiveC(ConfigError):
    pass


# stats
class AllZero(WageUrnError):
    pass


class EpsilonTooSmall(WageUrnError):
    pass


class TailTooSmall(WageUrnError):
    pass


class MissingSnapshot(DataError):
    pass


# cli-io
class UnknownKind(ConfigError):
    pass


class MalformedCsv(DataError):
    pass
