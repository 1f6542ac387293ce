"""Exception hierarchy shared by all modules.

Every domain failure derives from :class:`SymptangleError`; the CLI maps
those to exit code 1.
"""


class SymptangleError(Exception):
    """Base class for domain errors."""


class InvalidIndex(SymptangleError):
    pass


class InvalidRank(SymptangleError):
    pass


class RankMismatch(SymptangleError):
    pass


class TooLarge(SymptangleError):
    pass


class BadLabel(SymptangleError):
    pass


class OutOfAlcove(SymptangleError):
    pass


class ParseError(SymptangleError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class InvalidWord(SymptangleError):
    pass


class LabelMismatch(SymptangleError):
    pass


class BadVertexLabels(SymptangleError):
    pass


class NotApplicable(SymptangleError):
    pass


class BoundaryMismatch(SymptangleError):
    pass


class ShapeError(SymptangleError):
    pass


class NoConvergence(SymptangleError):
    def __init__(self, message, best_residual=float("inf")):
        self.best_residual = best_residual
        super().__init__(f"{message} (best residual {best_residual:.3e})")


class EmptyModuli(NoConvergence):
    """Raised when an emptiness certificate proves there is nothing to find."""

    def __init__(self, certificate):
        self.certificate = certificate
        SymptangleError.__init__(self, f"moduli space is empty: {certificate}")
        self.best_residual = float("inf")


class NotOnVariety(SymptangleError):
    pass


class Unsupported(SymptangleError):
    pass


class NotInClass(SymptangleError):
    pass


class BaseMismatch(SymptangleError):
    pass


class Reducible(SymptangleError):
    pass


class UnsupportedChamber(SymptangleError):
    pass


class BadMultiplicity(SymptangleError):
    pass


class NotEliminable(SymptangleError):
    pass


class NotALink(SymptangleError):
    pass
