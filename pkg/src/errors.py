# ============================================================================
# CHANGELOG (recent first, max 5 entries)
# 10/18/2026 - Exception hierarchy for graphs, dynamics, oracles and experiments
# 10/16/2026 - Reworked from the tool-handler error helpers
# ============================================================================
"""
Error types and CLI-facing error formatting.

Library code raises the exceptions below; the CLI turns them into a
message plus an exit code with describe_error(), which mirrors how the
old tool handlers turned database and AppleScript failures into
actionable text.
"""

import logging
from typing import Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BUDGET_OR_FAIL = 2


class MajdynError(Exception):
    """Base class for every error raised by majdyn."""


class ConfigError(MajdynError):
    """Configuration file missing or malformed."""


class GraphError(MajdynError, ValueError):
    """Invalid graph input (self-loop, duplicate edge, bad index or weight)."""

    def __init__(
        self,
        message: str,
        edge: Optional[Tuple[int, int]] = None,
        index: Optional[int] = None,
    ):
        super().__init__(message)
        self.edge = edge
        self.index = index


class EdgeListFormatError(GraphError):
    """Edge-list text could not be parsed."""

    def __init__(self, message: str, line_number: int, edge: Optional[Tuple[int, int]] = None):
        super().__init__(f"line {line_number}: {message}", edge=edge)
        self.line_number = line_number


class InvalidCycleError(GraphError):
    """A vertex list is not a simple cycle of the graph."""


class TieError(MajdynError):
    """A weighted vote summed to zero, so the majority is undefined."""

    def __init__(self, vertex: int, time: int, vote_sum: float):
        super().__init__(
            f"tie at vertex {vertex} (time {time}): weighted vote sum {vote_sum!r}"
        )
        self.vertex = vertex
        self.time = time
        self.vote_sum = vote_sum


class RegularityError(MajdynError, ValueError):
    """Weights admit a tie, so no epsilon > 0 exists."""

    def __init__(
        self,
        message: str,
        vertex: Optional[int] = None,
        pattern: Optional[Sequence[int]] = None,
    ):
        super().__init__(message)
        self.vertex = vertex
        self.pattern = list(pattern) if pattern is not None else None


class EnumerationCapError(RegularityError):
    """Vertex degree too large for exact sign-pattern enumeration."""


class RejectionBudgetError(MajdynError):
    """Configuration-model sampling ran out of attempts."""

    def __init__(self, budget: int, n: int, d: int):
        super().__init__(
            f"no simple {d}-regular pairing on {n} vertices within {budget} attempts"
        )
        self.budget = budget


class ConvergenceError(MajdynError):
    """Power iteration did not reach its tolerance."""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"power iteration did not converge in {iterations} iterations "
            f"(relative change {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


class ArityCapError(MajdynError, ValueError):
    """Exact enumeration requested above the arity cap."""


class InvariantViolation(MajdynError, AssertionError):
    """A runtime-checked identity (potential, flip bound, frozen cycle) failed."""


class UnknownExperimentError(MajdynError, KeyError):
    """Experiment id not in the registry."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown experiment"


def describe_error(e: Exception, operation: str = "") -> Tuple[str, int]:
    """
    Turn an exception into a user-facing message and exit code.

    Args:
        e: The exception that was raised
        operation: Description of what was being done (e.g. "simulate")

    Returns:
        Tuple of (message, exit_code)
    """
    where = f" during {operation}" if operation else ""

    if isinstance(e, EdgeListFormatError):
        return (
            f"Edge list error{where}: {e}\n\n"
            "Expected a header line 'n m' followed by m lines 'i j' or 'i j w' with i < j.",
            EXIT_ERROR,
        )
    if isinstance(e, TieError):
        return (
            f"Weighted tie{where}: {e}\n\n"
            "The weights admit a zero vote sum. Run 'analyze regularity' on the graph,\n"
            "or use odd integer weights with an odd self-weight so sums are never zero.",
            EXIT_ERROR,
        )
    if isinstance(e, EnumerationCapError):
        return (
            f"Regularity check refused{where}: {e}\n\n"
            "Raise --max-enum-degree or rely on runtime tie detection instead.",
            EXIT_ERROR,
        )
    if isinstance(e, RegularityError):
        return f"Regularity error{where}: {e}", EXIT_ERROR
    if isinstance(e, RejectionBudgetError):
        return (
            f"Random regular sampling failed{where}: {e}\n\n"
            "Acceptance decays like exp(-(d^2-1)/4); raise --max-attempts or lower d.",
            EXIT_ERROR,
        )
    if isinstance(e, ConvergenceError):
        return (
            f"Spectral estimate failed{where}: {e}\n\n"
            "Raise --max-iter or loosen --tol.",
            EXIT_ERROR,
        )
    if isinstance(e, (GraphError, ArityCapError, ConfigError, UnknownExperimentError)):
        return f"Error{where}: {e}", EXIT_ERROR
    if isinstance(e, InvariantViolation):
        logger.error(f"Invariant violated{where}: {e}", exc_info=True)
        return f"Invariant violated{where}: {e}", EXIT_ERROR
    if isinstance(e, (OSError, ValueError)):
        return f"Error{where}: {e}", EXIT_ERROR

    logger.error(f"Unexpected error{where}: {e}", exc_info=True)
    return f"Unexpected error{where}: {e}", EXIT_ERROR
