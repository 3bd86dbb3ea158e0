"""Exception types shared across the package.

Every error that callers are expected to catch lives here so that the CLI
and the HTTP service can map them to exit codes / status codes in one place.
"""

from __future__ import annotations


class PragrankError(Exception):
    """Base class for all package errors."""


class LexiconError(PragrankError):
    """Base class for malformed reference games."""


class EmptyRowError(LexiconError):
    """An utterance is true of no hypothesis."""

    def __init__(self, row: int, row_id: str | None = None):
        self.row = row
        self.row_id = row_id
        label = f"{row}" if row_id is None else f"{row} ({row_id!r})"
        super().__init__(f"utterance row {label} is true of no hypothesis")


class EmptyColumnError(LexiconError):
    """A hypothesis satisfies no utterance."""

    def __init__(self, col: int, col_id: str | None = None):
        self.col = col
        self.col_id = col_id
        label = f"{col}" if col_id is None else f"{col} ({col_id!r})"
        super().__init__(f"hypothesis column {label} satisfies no utterance")


class DimensionMismatchError(PragrankError):
    """Vector or matrix shapes do not agree with the lexicon."""


class SamplingExhaustedError(PragrankError):
    """Rejection sampling failed to produce a valid draw within the budget."""

    def __init__(self, rounds: int):
        self.rounds = rounds
        super().__init__(f"no valid lexicon found in {rounds} rejection rounds")


class NumericalUnderflowError(PragrankError):
    """A probability chain lost all mass even in log space."""


class NoConsistentProgramError(PragrankError):
    """No hypothesis is consistent with the given utterance sequence."""


class InconsistentTargetError(PragrankError):
    """An utterance is false of the target it is meant to describe."""


class DepthTooShallowError(PragrankError):
    """A ranking was requested for a depth the chain never reached."""


class SpeakerStuckError(PragrankError):
    """The greedy speaker has no consistent utterance left to emit."""


class NonConvergenceWarning(UserWarning):
    """Annealing hit its iteration cap before the swap counts settled.

    The run still returns the best ranking found so far; callers that need a
    hard guarantee should check the distiller's `converged_` flag.
    """


class DegenerateDataError(PragrankError):
    """A dataset has no usable comparisons (for training or annealing)."""


class MalformedProgramError(PragrankError):
    """A program does not belong to the grammar an encoder expects."""


class CoverageImpossibleError(PragrankError):
    """A string sample cannot cover every program within the budget."""


class ParseError(PragrankError):
    """A serialized artifact does not follow its declared format."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
