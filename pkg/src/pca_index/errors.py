"""Exception hierarchy.

Every domain error derives from :class:`PcaIndexError`; the CLI maps these to
exit code 1 and prints ``str(exc)`` as a one-line diagnostic.
"""

from __future__ import annotations


class PcaIndexError(ValueError):
    """Base class for data and domain errors."""


# linalg
class FewerThanTwoEntities(PcaIndexError):
    pass


class NonFiniteInput(PcaIndexError):
    pass


class NoConvergence(PcaIndexError):
    pass


class IndefiniteMatrix(PcaIndexError):
    pass


class LengthMismatch(PcaIndexError):
    pass


class DimensionMismatch(PcaIndexError):
    pass


# index_core
class ConstantIndicator(PcaIndexError):
    def __init__(self, codes):
        self.codes = tuple(codes)
        super().__init__("constant indicator(s): " + ", ".join(self.codes))


class UnassignedIndicator(PcaIndexError):
    pass


class BadBounds(PcaIndexError):
    pass


# dataset
class DuplicateIndicatorCode(PcaIndexError):
    def __init__(self, code):
        self.code = code
        super().__init__(f"duplicate indicator code: {code}")


class BadDirection(PcaIndexError):
    pass


class MalformedLine(PcaIndexError):
    def __init__(self, lineno, reason):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {reason}")


class EmptyInput(PcaIndexError):
    pass


class MissingColumn(PcaIndexError):
    pass


class DuplicateEntityId(PcaIndexError):
    def __init__(self, entity_id):
        self.entity_id = entity_id
        super().__init__(f"duplicate entity id: {entity_id}")


class UnparsableNumber(PcaIndexError):
    def __init__(self, row, column, text):
        self.row, self.column, self.text = row, column, text
        super().__init__(f"row {row}, column {column}: cannot parse number {text!r}")


class NoEntitiesRemain(PcaIndexError):
    pass


# ranking
class NonFiniteScore(PcaIndexError):
    pass


class KTooLarge(PcaIndexError):
    pass


class UnknownPillar(PcaIndexError):
    pass


class UnknownEntity(PcaIndexError):
    pass
