"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures to
distinct process exit statuses without inspecting messages.
"""


class MarkovMixError(Exception):
    exit_code = 1


class UsageError(MarkovMixError):
    exit_code = 2


class InputFileError(MarkovMixError, OSError):
    exit_code = 3


class SchemaError(MarkovMixError, ValueError):
    exit_code = 4


class InvalidInputError(MarkovMixError, ValueError):
    exit_code = 5

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DuplicateRecordError(InvalidInputError):
    pass


class ZeroCellError(InvalidInputError):
    def __init__(self, message, cell):
        super().__init__(message, field=cell)
        self.cell = cell


class InfeasibleBetaError(InvalidInputError):
    def __init__(self, message, bound):
        super().__init__(message, field="beta")
        self.bound = bound


class NumericError(MarkovMixError, ArithmeticError):
    exit_code = 6


class DegenerateInputError(NumericError):
    pass


class MultiplicityError(NumericError):
    """Stationary distribution is not unique (or regularity could not be shown)."""

    def __init__(self, message, structure):
        super().__init__(message)
        self.structure = structure


class InsufficientDataError(NumericError):
    pass
