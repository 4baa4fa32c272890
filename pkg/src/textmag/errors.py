"""Exception types shared across the package.

Every error raised on a contract violation derives from TextmagError so
callers can catch the whole family at once.
"""


class TextmagError(Exception):
    pass


# --- text construction ---

class EmptyText(TextmagError):
    pass


class MissingBOS(TextmagError):
    pass


class InteriorSpecial(TextmagError):
    """A reserved token appears somewhere it may not."""


class ReservedTokenInAlphabet(TextmagError):
    pass


# --- model sources ---

class FinishedText(TextmagError):
    """A next-token query was made for a text that already ended."""


class OverCutoff(TextmagError):
    pass


class MissingEntry(TextmagError):
    """Table/ngram model has no data for the queried node."""


class ParseError(TextmagError):
    pass


class BadDistribution(TextmagError):
    pass


# --- categories and matrices ---

class NotInCategory(TextmagError):
    pass


class TooLarge(TextmagError):
    """Object count of the requested category exceeds the configured cap."""


class TooLargeForDense(TextmagError):
    pass


# --- digraph enumeration ---

class TooManyVertices(TextmagError):
    pass


class SingularMatrix(TextmagError):
    pass


# --- homology ---

class TooManyGenerators(TextmagError):
    pass


class IncompleteTable(TextmagError):
    """Homology table truncated while higher chain groups are nonempty."""


# --- metrics ---

class ZeroProbabilityStep(TextmagError):
    pass


class TooShort(TextmagError):
    pass


class BadPMF(TextmagError):
    pass


class EmptySystem(TextmagError):
    pass
