"""Exception types raised by the toolkit."""


class EmotrajError(ValueError):
    """Base class for all toolkit errors."""


class NonFiniteInput(EmotrajError):
    pass


class DegenerateTrajectory(EmotrajError):
    pass


class LengthMismatch(EmotrajError):
    pass


class InvalidGate(EmotrajError):
    pass


class InvalidBox(EmotrajError):
    pass


class UnknownLabel(EmotrajError):
    pass


class ZeroMass(EmotrajError):
    pass


class EmptyCorpus(EmotrajError):
    pass


class InvalidAlpha(EmotrajError):
    pass


class LexiconError(EmotrajError):
    pass


class EmptyVariants(EmotrajError):
    pass


class MissingTrajectory(EmotrajError):
    pass


class InvalidDimensions(EmotrajError):
    pass


class ZeroCentroid(EmotrajError):
    pass


class DegenerateInput(EmotrajError):
    pass


class IdMismatch(EmotrajError):
    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = sorted(missing, key=str)


class ZeroBaseline(EmotrajError):
    pass


class ConfigError(EmotrajError):
    pass
