"""Exception types raised by the tiling pipeline.

Every pipeline failure derives from :class:`TilingError`.  Errors raised by a
stage of the packing pipeline carry a ``stage`` attribute so that harness code
can report where an instance stopped.
"""

from __future__ import annotations


class TilingError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str = "", *, stage: str | None = None, witness=None):
        super().__init__(message)
        self.stage = stage
        self.witness = witness


class PreconditionError(TilingError, ValueError):
    """An input violates a documented precondition."""


class ParityError(PreconditionError):
    """n * d is odd, so no d-regular graph exists."""


class InfeasibleError(PreconditionError):
    """Requested parameters admit no object at all."""


class DegenerateCut(PreconditionError):
    """A cut side is empty or covers every vertex."""


class FormatError(PreconditionError):
    """Malformed edge-list or JSON input."""


class ValidationError(TilingError):
    """A computed object failed one of its checked properties."""


class InvariantError(ValidationError):
    """An internal invariant that must always hold was violated."""


class GapError(ValidationError):
    """A class is neither close to nor far from bipartite."""


class ConcentrationError(ValidationError):
    """A random split failed its concentration checks too many times."""


class NotRegular(PreconditionError):
    """The graph is not regular."""


class SearchExhausted(TilingError):
    """A constructive search ran out of candidates."""


class NotFound(SearchExhausted):
    """No object of the requested kind was found.

    ``exhausted`` is True when the search space was fully explored, and False
    when the search stopped on its budget.
    """

    def __init__(self, message: str = "", *, exhausted: bool = True, **kwargs):
        super().__init__(message, **kwargs)
        self.exhausted = exhausted


class Infeasible(NotFound):
    """An exact search proved that no solution exists."""


class CoverageError(SearchExhausted):
    """An exceptional vertex could not be covered."""


class NoEvenWalk(SearchExhausted):
    """No even walk joins two clusters of the reduced graph."""


class NoPerfectMatching(SearchExhausted):
    """A graph required to have a perfect matching has none."""


class TooIrregular(ValidationError):
    """Too many low-degree vertices to repair a pair."""


class BudgetError(ValidationError):
    """A construction exceeded its vertex budget."""


class Disconnected(NotFound):
    """The endpoints lie in different components."""


class TooLong(ValidationError):
    """A connecting path is longer than allowed."""
