"""Exception types shared across modules."""


class InvalidArgument(ValueError):
    pass


class HeightRangeError(OverflowError):
    """A height or power left the exactly representable range."""


class ResourceLimitError(MemoryError):
    pass


class HypothesisError(ValueError):
    """An operation was called outside the regime where its contract holds."""


class TruncatedDomainError(LookupError):
    """A tabulated function was queried beyond its table."""


class UndefinedRatioError(ZeroDivisionError):
    pass


class UnsupportedFunction(TypeError):
    pass
