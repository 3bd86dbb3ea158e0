"""Reference-game lexicons: the boolean consistency matrix and its queries.

A lexicon pairs m utterances with n hypotheses through a boolean matrix M,
M[u, w] = 1 iff utterance u is consistent with hypothesis w.  Everything else
in the package (listeners, rankings, domains) is built on top of this type.

Rows are additionally kept as packed bitsets so that intersecting many rows
(the dominant cost of filtering-style listeners) touches n/8 bytes per row
instead of n entries.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    EmptyColumnError,
    EmptyRowError,
    ParseError,
    SamplingExhaustedError,
)
from .validation import check_utterance_indices

__all__ = [
    "Lexicon",
    "build_lexicon",
    "consistent_set",
    "sample_random_lexicon",
    "save_lexicon",
    "load_lexicon",
    "lexicon_to_text",
    "lexicon_from_text",
]

# Characters that would break the line- and field-oriented file formats.
_FORBIDDEN_ID_CHARS = ("\n", "\r", "\t")


class Lexicon:
    """Immutable boolean consistency matrix with id <-> index mappings.

    Use :func:`build_lexicon` or :func:`sample_random_lexicon` instead of
    constructing directly; the constructor assumes a pre-validated matrix.
    """

    __slots__ = (
        "utterances",
        "hypotheses",
        "matrix",
        "packed_rows",
        "_u_index",
        "_h_index",
        "_float_matrix",
    )

    def __init__(self, utterances: Sequence[str], hypotheses: Sequence[str], matrix: np.ndarray):
        self.utterances = list(utterances)
        self.hypotheses = list(hypotheses)
        mat = np.ascontiguousarray(matrix, dtype=bool)
        mat.setflags(write=False)
        self.matrix = mat
        packed = np.packbits(mat, axis=1)
        packed.setflags(write=False)
        self.packed_rows = packed
        self._u_index = {u: i for i, u in enumerate(self.utterances)}
        self._h_index = {h: i for i, h in enumerate(self.hypotheses)}
        self._float_matrix = None

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def utterance_index(self, utterance_id: str) -> int:
        try:
            return self._u_index[utterance_id]
        except KeyError:
            raise KeyError(f"unknown utterance id {utterance_id!r}") from None

    def hypothesis_index(self, hypothesis_id: str) -> int:
        try:
            return self._h_index[hypothesis_id]
        except KeyError:
            raise KeyError(f"unknown hypothesis id {hypothesis_id!r}") from None

    def has_utterance(self, utterance_id: str) -> bool:
        return utterance_id in self._u_index

    def float_matrix(self) -> np.ndarray:
        """M as float64, cached (the RSA chains are matrix arithmetic on it)."""
        if self._float_matrix is None:
            fm = self.matrix.astype(np.float64)
            fm.setflags(write=False)
            self._float_matrix = fm
        return self._float_matrix

    def consistent_bits(self, us: Sequence[int]) -> np.ndarray:
        """Packed bitset of hypotheses consistent with every utterance in us."""
        if len(us) == 0:
            bits = np.packbits(np.ones(self.n, dtype=bool))
        else:
            bits = self.packed_rows[us[0]].copy()
            for u in us[1:]:
                bits &= self.packed_rows[u]
        return bits

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Lexicon(m={self.m}, n={self.n})"


def _validate_ids(ids: Sequence[str], kind: str) -> None:
    if len(ids) == 0:
        raise ValueError(f"{kind} id list is empty")
    seen = set()
    for x in ids:
        if not isinstance(x, str):
            raise TypeError(f"{kind} ids must be strings, got {type(x).__name__}")
        if any(ch in x for ch in _FORBIDDEN_ID_CHARS):
            raise ValueError(f"{kind} id {x!r} contains a forbidden control character")
        if x in seen:
            raise ValueError(f"duplicate {kind} id {x!r}")
        seen.add(x)


def _validate_nonempty(matrix: np.ndarray, utterances: Sequence[str], hypotheses: Sequence[str]) -> None:
    row_support = matrix.any(axis=1)
    if not row_support.all():
        row = int(np.flatnonzero(~row_support)[0])
        raise EmptyRowError(row, utterances[row])
    col_support = matrix.any(axis=0)
    if not col_support.all():
        col = int(np.flatnonzero(~col_support)[0])
        raise EmptyColumnError(col, hypotheses[col])


def build_lexicon(
    utterance_ids: Sequence[str],
    hypothesis_ids: Sequence[str],
    consistency: Callable[[str, str], bool] | np.ndarray | Sequence[Sequence[bool]],
) -> Lexicon:
    """Materialize and validate a lexicon.

    `consistency` is either a predicate over (utterance_id, hypothesis_id) or
    an m*n boolean array.  Duplicate utterance *rows* are permitted (two
    strings may mean the same thing); duplicate *ids* are not.
    """
    _validate_ids(utterance_ids, "utterance")
    _validate_ids(hypothesis_ids, "hypothesis")
    m, n = len(utterance_ids), len(hypothesis_ids)
    if callable(consistency):
        matrix = np.empty((m, n), dtype=bool)
        for i, u in enumerate(utterance_ids):
            for j, h in enumerate(hypothesis_ids):
                matrix[i, j] = bool(consistency(u, h))
    else:
        matrix = np.asarray(consistency, dtype=bool)
        if matrix.shape != (m, n):
            raise ValueError(f"consistency matrix has shape {matrix.shape}, expected {(m, n)}")
    _validate_nonempty(matrix, utterance_ids, hypothesis_ids)
    return Lexicon(utterance_ids, hypothesis_ids, matrix)


def consistent_set(lex: Lexicon, us: Sequence[int]) -> np.ndarray:
    """Sorted hypothesis indices consistent with all utterances in `us`.

    The empty sequence yields every hypothesis.  An empty result is a legal
    value; callers decide whether it is an error.
    """
    us = check_utterance_indices(us, lex.m)
    if len(us) == 0:
        return np.arange(lex.n)
    mask = lex.matrix[us[0]]
    for u in us[1:]:
        mask = mask & lex.matrix[u]
    return np.flatnonzero(mask)


def sample_random_lexicon(
    m: int,
    n: int,
    p_true: float,
    rng_seed: int | np.random.Generator = 0,
    max_rounds: int = 10_000,
) -> Lexicon:
    """Bernoulli(p_true) lexicon, rejection-sampled until valid.

    Validity here is stricter than for built lexicons: no empty row/column,
    all rows pairwise distinct, all columns pairwise distinct.  Deterministic
    given the seed.  Raises SamplingExhausted after `max_rounds` rejections.
    """
    if m < 2 or n < 2:
        raise ValueError("random lexicons need m, n >= 2")
    if not 0.0 < p_true < 1.0:
        raise ValueError("p_true must lie strictly between 0 and 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    for _ in range(max_rounds):
        matrix = rng.random((m, n)) < p_true
        if not (matrix.any(axis=1).all() and matrix.any(axis=0).all()):
            continue
        rows = {r.tobytes() for r in matrix}
        if len(rows) < m:
            continue
        cols = {c.tobytes() for c in matrix.T.copy()}
        if len(cols) < n:
            continue
        utterances = [f"u{i}" for i in range(m)]
        hypotheses = [f"w{j}" for j in range(n)]
        return Lexicon(utterances, hypotheses, matrix)
    raise SamplingExhaustedError(max_rounds)


# ---------------------------------------------------------------------------
# PRAGLEX v1 serialization
#
#   PRAGLEX v1 <m> <n>
#   <m lines of n characters in {0,1}>
#   <m utterance ids, one per line>
#   <n hypothesis ids, one per line>
#
# Ids may be empty strings (an empty line); the parser reads exact line
# counts rather than skipping blanks, so round trips are bit-exact.
# ---------------------------------------------------------------------------

_PRAGLEX_MAGIC = "PRAGLEX v1"


def lexicon_to_text(lex: Lexicon) -> str:
    lines = [f"{_PRAGLEX_MAGIC} {lex.m} {lex.n}"]
    zeros_ones = np.where(lex.matrix, "1", "0")
    lines.extend("".join(row) for row in zeros_ones)
    lines.extend(lex.utterances)
    lines.extend(lex.hypotheses)
    return "\n".join(lines) + "\n"


def lexicon_from_text(text: str) -> Lexicon:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline
    if not lines:
        raise ParseError("empty lexicon file", line=1)
    header = lines[0].split(" ")
    if len(header) != 4 or " ".join(header[:2]) != _PRAGLEX_MAGIC:
        raise ParseError(f"bad header {lines[0]!r}, expected '{_PRAGLEX_MAGIC} m n'", line=1)
    try:
        m, n = int(header[2]), int(header[3])
    except ValueError:
        raise ParseError(f"non-integer dimensions in header {lines[0]!r}", line=1) from None
    expected = 1 + m + m + n
    if len(lines) != expected:
        raise ParseError(f"expected {expected} lines for a {m}x{n} lexicon, found {len(lines)}", line=len(lines))
    matrix = np.empty((m, n), dtype=bool)
    for i in range(m):
        row = lines[1 + i]
        if len(row) != n or set(row) - {"0", "1"}:
            raise ParseError(f"matrix row must be {n} characters of 0/1, got {row!r}", line=2 + i)
        matrix[i] = np.frombuffer(row.encode("ascii"), dtype=np.uint8) == ord("1")
    utterances = lines[1 + m : 1 + 2 * m]
    hypotheses = lines[1 + 2 * m :]
    try:
        return build_lexicon(utterances, hypotheses, matrix)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def save_lexicon(lex: Lexicon, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(lexicon_to_text(lex))


def load_lexicon(path) -> Lexicon:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return lexicon_from_text(fh.read())
