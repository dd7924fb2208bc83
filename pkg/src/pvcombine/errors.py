"""Exception hierarchy shared by every pvcombine module."""


class PvCombineError(Exception):
    """Base class for all errors raised by pvcombine."""


# series
class MissingThresholdExceeded(PvCombineError):
    pass


class NonIntegerFactor(PvCombineError):
    pass


class PartialBlock(PvCombineError):
    pass


class UnsupportedResolution(PvCombineError):
    pass


# metrics
class DegenerateDenominator(PvCombineError):
    pass


class LengthMismatch(PvCombineError):
    pass


class EmptyInput(PvCombineError):
    pass


# statistical forecasters
class InsufficientHistory(PvCombineError):
    pass


class InsufficientLength(PvCombineError):
    pass


class NonConvergence(PvCombineError):
    pass


class SingularDesign(PvCombineError):
    pass


class MissingExogenous(PvCombineError):
    pass


class SearchExhausted(PvCombineError):
    pass


class KTooLarge(PvCombineError):
    pass


# regression forecasters
class RankDeficient(PvCombineError):
    pass


class DimensionMismatch(PvCombineError):
    pass


# swarm / combination / tuning
class InvalidDimension(PvCombineError):
    pass


class ZeroWeightSum(PvCombineError):
    pass


class EmptySpace(PvCombineError):
    pass


# evaluation + cli
class SeriesTooShort(PvCombineError):
    pass


class SchemaError(PvCombineError):
    pass


class NonMonotonicTimestamps(PvCombineError):
    pass


class EmptyCohort(PvCombineError):
    pass
