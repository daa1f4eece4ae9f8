"""Exception hierarchy shared across the toolkit.

Every domain error derives from :class:`ConspecError` so callers (and the
CLI) can distinguish bad inputs (exit code 1) from usage mistakes (exit 2)
and genuine bugs.
"""


class ConspecError(Exception):
    """Base class for all domain errors raised by this package."""


# --- specification language ---------------------------------------------

class SpecSyntaxError(ConspecError):
    """Malformed specification text. Carries the 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnknownName(ConspecError):
    """A concept or class token is not in the task vocabulary."""


class EmptyContrastSet(ConspecError):
    """hasCon desugaring was handed an empty contrast set."""


class MissingRepValue(ConspecError):
    """Evaluation needs a concept strength that was not supplied."""


class ClauseExplosion(ConspecError):
    """DNF expansion exceeded the configured clause cap."""


# --- vectors and embedding sets -------------------------------------------

class ZeroVector(ConspecError):
    """An operation that needs a nonzero vector received a zero one."""


class DimMismatch(ConspecError):
    """Operands have incompatible dimensions."""


class EmptySelection(ConspecError):
    """A row selection matched nothing."""


# --- concept directions ----------------------------------------------------

class MissingCaptionEmbedding(ConspecError):
    """The caption table has no embedding for a generated caption."""


class ZeroMeanVector(ConspecError):
    """Caption embeddings averaged to the zero vector."""


# --- representation maps ---------------------------------------------------

class RowMismatch(ConspecError):
    """Two embedding sets are not row-aligned by id."""


class SingularSystem(ConspecError):
    """The alignment fit is rank-deficient beyond ridge rescue."""


class UnknownConcept(ConspecError):
    """A representation map has no direction for the requested concept."""


# --- regions ---------------------------------------------------------------

class EmptyClassSelection(ConspecError):
    """No rows match the requested class filter."""


class UncoveredRow(ConspecError):
    """A partition does not cover every row it must."""


# --- statistics ------------------------------------------------------------

class NoRowsForClass(ConspecError):
    """Ground-truth filter for a class selected no rows."""


# --- verifier ---------------------------------------------------------------

class UnsupportedLiteral(ConspecError):
    """A clause literal has no direct LP encoding."""


class NumericalBreakdown(ConspecError):
    """The simplex solver could not find a usable pivot."""


# --- oracles ----------------------------------------------------------------

class MissingPoint(ConspecError):
    """A lookup-table model is undefined on a scope point."""


class GridTooLarge(ConspecError):
    """Grid enumeration would exceed the point budget."""


# --- file formats ------------------------------------------------------------

class FormatError(ConspecError):
    """A data file does not match its documented schema."""
