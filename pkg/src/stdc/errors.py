"""Exception types. The class name doubles as the CLI error category."""


class StdcError(Exception):
    """Base class for every error raised by this package."""


# audio_io
class UnsupportedFormat(StdcError):
    pass


class CorruptHeader(StdcError):
    pass


class EmptyAudio(StdcError):
    pass


class AliasedFrequency(StdcError, ValueError):
    pass


class BadHeader(StdcError):
    pass


class BadLabel(StdcError, ValueError):
    pass


class DuplicatePath(StdcError):
    pass


# framing / melspec / ldp
class ZeroLength(StdcError, ValueError):
    pass


class SignalTooShort(StdcError, ValueError):
    pass


class BadFrameLength(StdcError, ValueError):
    pass


class TooManyBands(StdcError, ValueError):
    pass


class NonFiniteInput(StdcError, ValueError):
    pass


class SpectrogramTooSmall(StdcError, ValueError):
    pass


# trainable stages
class ShapeMismatch(StdcError, ValueError):
    pass


class EmptySequence(StdcError, ValueError):
    pass


class TooFewVectors(StdcError, ValueError):
    pass


class StatsNotFitted(StdcError):
    pass


class EmptyTrainingSet(StdcError, ValueError):
    pass


class SingleClassData(StdcError, ValueError):
    pass


class SingleClassScores(StdcError, ValueError):
    pass


class BadParameter(StdcError, ValueError):
    pass


# containers and pipeline
class BadContainer(StdcError):
    pass


class BadConfig(StdcError):
    pass


class MissingModel(StdcError):
    pass


class IoFailure(StdcError):
    pass
