"""Exception hierarchy.

Every error carries the process exit code the command line uses when it
escapes a subcommand: 2 for bad input, 3 for numerical or degenerate data.
"""


class SociosemError(Exception):
    exit_code = 4


class InputError(SociosemError, ValueError):
    exit_code = 2


class NumericalError(SociosemError, ArithmeticError):
    exit_code = 3


class SchemaError(InputError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class DuplicateId(InputError):
    pass


class EmptyCorpus(InputError):
    pass


class RangeError(InputError):
    pass


class KindError(InputError):
    pass


class EmptyMatrix(InputError):
    pass


class NotEnoughActors(NumericalError):
    pass


class DegenerateInput(NumericalError):
    pass


class UndefinedCorrelation(NumericalError):
    pass


class UndefinedMetric(NumericalError):
    pass


class RankError(NumericalError):
    def __init__(self, message, predictors=()):
        self.predictors = tuple(predictors)
        super().__init__(message)
