class OrbitError(ValueError):
    """Base class for data and validation errors raised by the package."""


class InvalidInputError(OrbitError):
    """Input violates a documented precondition (shape, range, label code)."""


class InconsistentLabelsError(OrbitError):
    """A label grid is not rank-monotone where monotonicity is required.

    ``deep_rank`` is the rank of the offending Land pixel and ``shallow_rank``
    the rank of the Water pixel lying above it.
    """

    def __init__(self, message, deep_rank=None, shallow_rank=None):
        super().__init__(message)
        self.deep_rank = deep_rank
        self.shallow_rank = shallow_rank


class FormatError(OrbitError):
    """A binary file failed header or payload validation.

    ``field`` names the violated part of the format.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
