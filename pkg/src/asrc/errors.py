"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented return codes (1 config, 2 data, 3 numerical).
"""


class ASRCError(Exception):
    exit_code = 2


class ConfigError(ASRCError):
    exit_code = 1


class InvalidInput(ASRCError, ValueError):
    pass


class DimensionMismatch(InvalidInput):
    pass


class ZeroColumn(InvalidInput):
    def __init__(self, index):
        super().__init__(f"column {index} has (near) zero l2-norm")
        self.index = index


class UnknownClass(ASRCError, KeyError):
    def __init__(self, class_id):
        super().__init__(f"unknown class id {class_id!r}")
        self.class_id = class_id


class InvalidDimension(InvalidInput):
    pass


class NumericalError(ASRCError, ArithmeticError):
    exit_code = 3


class SingularGram(NumericalError):
    pass


class NumericalDivergence(NumericalError):
    pass


class DataError(ASRCError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None, col=None):
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", col {col})" if col is not None else ")")
        super().__init__(message + where)
        self.row = row
        self.col = col


class MissingValue(ParseError):
    pass


class EmptyDataset(DataError):
    pass


class TruncatedFile(DataError):
    pass


class InsufficientSamples(DataError):
    def __init__(self, class_id, have, need):
        super().__init__(
            f"class {class_id} has {have} samples, needs more than {need}")
        self.class_id = class_id


class InvalidFoldCount(DataError):
    pass
