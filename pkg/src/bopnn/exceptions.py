"""Exception hierarchy shared by every module of the package."""


class BOPNNError(ValueError):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(BOPNNError):
    pass


class ConvergenceFailure(BOPNNError, RuntimeError):
    pass


class DegenerateInput(BOPNNError):
    pass


class InsufficientPoints(BOPNNError):
    pass


class SingleClassSample(BOPNNError):
    pass


class EmptyEnsemble(BOPNNError):
    pass


class NoOOBPoints(BOPNNError):
    """Every training point is in every bag, so no out-of-bag score exists."""


class ProjectionDisabled(BOPNNError):
    """The operation needs discriminant subspaces but the model has none."""


class ParseError(BOPNNError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class MissingValue(ParseError):
    pass


class UnknownTarget(BOPNNError):
    pass


class SchemaMismatch(BOPNNError):
    pass


class TooSmall(BOPNNError):
    pass


class VersionMismatch(BOPNNError):
    pass


class CorruptFile(BOPNNError):
    pass


class IndexOutOfRange(BOPNNError, IndexError):
    pass
