"""Error types shared across the package."""


class DimensionError(ValueError):
    """Matrix or vector dimensions are inconsistent with the operation."""


class ParameterError(ValueError):
    """A scalar parameter is outside its documented range."""


class OrientationError(ValueError):
    """The channel has more rows than columns; pass the transpose instead."""


class DegenerateChannelError(ValueError):
    """The channel is rank deficient beyond what the decomposition tolerates."""


class IllConditionedGapError(ValueError):
    """Singular values are too close for the perturbation expansion to be trusted."""


class ValidityRangeError(RuntimeError):
    """A closed-form prediction was requested outside its region of validity."""


class ConfigError(ValueError):
    """An experiment configuration is malformed."""
