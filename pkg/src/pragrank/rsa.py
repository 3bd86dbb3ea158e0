"""Exact listener/speaker computations on a lexicon.

Two families live here:

* Alternating chains: L0 -> S1 -> L1 -> ... built by column/row normalization
  of the consistency matrix.  Each normalization step is captured, so any
  depth's listener factors as M * (row-product x column-product) and the
  column side doubles as a global preference order over hypotheses.

* Incremental multi-example inference: the speaker emits utterances
  auto-regressively against the shrinking consistent set, and the matching
  listener scores every consistent hypothesis by the product of per-step
  speaker probabilities.

Probabilities are kept in linear double precision; chains fall back to log
space when a step underflows (only plausible at large depth on lopsided
lexicons).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InconsistentTargetError,
    NoConsistentProgramError,
    NumericalUnderflowError,
    SpeakerStuckError,
)
from .lexicon import Lexicon
from .validation import check_prior, check_utterance_indices

__all__ = [
    "ListenerMatrix",
    "SpeakerMatrix",
    "NormalizationVectors",
    "literal_listener",
    "speaker_from_listener",
    "rsa_chain",
    "iter_chain_log",
    "factorized_listener",
    "IncrementalEngine",
    "incremental_speaker",
    "incremental_pragmatic_listener",
]


@dataclass(frozen=True)
class ListenerMatrix:
    """P(w | u) at a given chain depth.  Rows sum to 1 where defined."""

    depth: int
    values: np.ndarray
    defined_rows: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class SpeakerMatrix:
    """P(u | w) at a given chain depth.  Columns sum to 1 where defined."""

    depth: int
    values: np.ndarray
    defined_cols: np.ndarray


@dataclass
class NormalizationVectors:
    """Normalizers captured along a chain, stored in log space.

    `log_r[j]` is the log row normalizer applied when producing the listener
    at depth j (j = 0..depth); `log_c[j-1]` is the log column normalizer
    applied when producing the speaker at depth j (j = 1..depth).  The
    listener at depth d factors as

        L_d = M * exp(log_row_total(d) (+) log_col_total(d))

    where (+) is the outer sum and the column side absorbs the prior.  Within
    any row of L_d the ordering of consistent hypotheses is therefore the
    ordering of `log_col_total(d)` — the global preference order this package
    distills.
    """

    prior: np.ndarray
    log_r: list[np.ndarray] = field(default_factory=list)
    log_c: list[np.ndarray] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.log_c)

    def _check_depth(self, depth: int) -> int:
        if depth < 0 or depth > self.depth:
            raise ValueError(f"depth {depth} outside the recorded range 0..{self.depth}")
        return depth

    def log_row_total(self, depth: int | None = None) -> np.ndarray:
        depth = self._check_depth(self.depth if depth is None else depth)
        total = self.log_r[0].copy()
        for j in range(1, depth + 1):
            total += self.log_r[j]
        return total

    def log_col_total(self, depth: int | None = None) -> np.ndarray:
        """Prior plus cumulative column normalizers through `depth`."""
        depth = self._check_depth(self.depth if depth is None else depth)
        with np.errstate(divide="ignore"):
            total = np.log(self.prior)
        for j in range(depth):
            total = total + self.log_c[j]
        return total


def literal_listener(lex: Lexicon, prior=None) -> ListenerMatrix:
    """Depth-0 listener: prior-weighted row normalization of M.

    Rows of M with no support are flagged undefined rather than raising;
    validated lexicons never produce them, but raw sub-lexicons can.
    """
    prior = check_prior(prior, lex.n)
    unnorm = lex.float_matrix() * prior
    row_sums = unnorm.sum(axis=1)
    defined = row_sums > 0
    values = np.divide(unnorm, row_sums[:, None], out=np.zeros_like(unnorm), where=defined[:, None])
    return ListenerMatrix(depth=0, values=values, defined_rows=defined)


def speaker_from_listener(listener: ListenerMatrix) -> SpeakerMatrix:
    """Column-normalize a listener into the next speaker."""
    col_sums = listener.values.sum(axis=0)
    defined = col_sums > 0
    values = np.divide(listener.values, col_sums[None, :], out=np.zeros_like(listener.values), where=defined[None, :])
    return SpeakerMatrix(depth=listener.depth + 1, values=values, defined_cols=defined)


def _chain_linear(lex: Lexicon, prior: np.ndarray, depth: int) -> tuple[np.ndarray, NormalizationVectors]:
    mask = lex.matrix
    unnorm = lex.float_matrix() * prior
    row_sums = unnorm.sum(axis=1)
    if np.any(row_sums <= 0):
        raise NumericalUnderflowError("lexicon row with no prior mass")
    L = unnorm / row_sums[:, None]
    nv = NormalizationVectors(prior=prior, log_r=[-np.log(row_sums)])
    for _ in range(depth):
        col_sums = L.sum(axis=0)
        if np.any(col_sums <= 0) or not np.all(np.isfinite(col_sums)):
            raise NumericalUnderflowError("column normalizer left double range")
        S = L / col_sums[None, :]
        row_sums = S.sum(axis=1)
        if np.any(row_sums <= 0) or not np.all(np.isfinite(row_sums)):
            raise NumericalUnderflowError("row normalizer left double range")
        L = S / row_sums[:, None]
        if np.any(L[mask] == 0.0):
            # A supported entry flushed to zero: the linear chain can no
            # longer represent this depth.
            raise NumericalUnderflowError("supported listener entry underflowed to zero")
        nv.log_c.append(-np.log(col_sums))
        nv.log_r.append(-np.log(row_sums))
    return L, nv


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    hi = a.max(axis=axis, keepdims=True)
    out = hi + np.log(np.exp(a - hi).sum(axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def iter_chain_log(lex: Lexicon, prior=None, depth: int = 1) -> Iterator[tuple[int, np.ndarray, NormalizationVectors]]:
    """Yield (i, log L_i, normalizers-so-far) for i = 1..depth, in log space.

    The log chain cannot underflow at any depth reachable in practice, so it
    is the canonical route for deep sweeps (theorem checks, stability runs).
    The yielded matrices are the *iterative* listeners; the normalizers give
    an independent factorized reconstruction.
    """
    prior = check_prior(prior, lex.n)
    with np.errstate(divide="ignore"):
        logL = np.where(lex.matrix, np.log(lex.float_matrix() * prior, where=lex.matrix, out=np.full(lex.shape, -np.inf)), -np.inf)
    row_lse = _logsumexp(logL, axis=1)
    logL = logL - row_lse[:, None]
    nv = NormalizationVectors(prior=prior, log_r=[-row_lse])
    for i in range(1, depth + 1):
        col_lse = _logsumexp(logL, axis=0)
        logL = logL - col_lse[None, :]
        row_lse = _logsumexp(logL, axis=1)
        logL = logL - row_lse[:, None]
        nv.log_c.append(-col_lse)
        nv.log_r.append(-row_lse)
        yield i, logL, nv


def rsa_chain(lex: Lexicon, prior=None, depth: int = 1, space: str = "auto") -> tuple[ListenerMatrix, NormalizationVectors]:
    """Run the alternating chain to `depth`, capturing every normalizer.

    `space` picks the arithmetic: "linear" (raises NumericalUnderflow when a
    step cannot be represented), "log", or "auto" (linear with a log-space
    retry on underflow).
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    prior_vec = check_prior(prior, lex.n)
    if space not in ("auto", "linear", "log"):
        raise ValueError(f"unknown space {space!r}")
    if space in ("auto", "linear"):
        try:
            L, nv = _chain_linear(lex, prior_vec, depth)
            defined = np.ones(lex.m, dtype=bool)
            return ListenerMatrix(depth=depth, values=L, defined_rows=defined), nv
        except NumericalUnderflowError:
            if space == "linear":
                raise
    logL = None
    nv = NormalizationVectors(prior=prior_vec, log_r=[])
    for _, logL, nv in iter_chain_log(lex, prior_vec, depth):
        pass
    if logL is None:  # depth == 0
        lit = literal_listener(lex, prior_vec)
        row_sums = (lex.float_matrix() * prior_vec).sum(axis=1)
        nv = NormalizationVectors(prior=prior_vec, log_r=[-np.log(row_sums)])
        return lit, nv
    values = np.exp(logL, where=lex.matrix, out=np.zeros(lex.shape))
    return ListenerMatrix(depth=depth, values=values, defined_rows=np.ones(lex.m, dtype=bool)), nv


def factorized_listener(lex: Lexicon, nv: NormalizationVectors, depth: int | None = None) -> ListenerMatrix:
    """Reconstruct a chain listener from its normalizers alone.

    Computes M * exp(row-total (+) column-total); the exponent is summed
    before exponentiation so neither side can overflow on its own.
    """
    depth = nv.depth if depth is None else depth
    if len(nv.prior) != lex.n or (nv.log_r and len(nv.log_r[0]) != lex.m):
        raise DimensionMismatchError("normalization vectors do not match the lexicon's shape")
    log_rows = nv.log_row_total(depth)
    log_cols = nv.log_col_total(depth)
    exponent = log_rows[:, None] + log_cols[None, :]
    values = np.where(lex.matrix, np.exp(exponent, where=lex.matrix, out=np.zeros(lex.shape)), 0.0)
    return ListenerMatrix(depth=depth, values=values, defined_rows=np.ones(lex.m, dtype=bool))


# ---------------------------------------------------------------------------
# Incremental multi-example inference
# ---------------------------------------------------------------------------


class _PrefixState:
    """Everything the engine knows about one utterance prefix."""

    __slots__ = ("mask", "idx", "mass", "scores", "masses", "inv_mass")

    def __init__(self, mask, idx, mass, scores):
        self.mask = mask          # (n,) bool: consistent hypotheses
        self.idx = idx            # sorted indices of the above
        self.mass = mass          # prior mass of the consistent set
        self.scores = scores      # (n,) cumulative speaker products, 0 off-set
        self.masses = None        # (m,) prior mass of (set & row u'), lazy
        self.inv_mass = None      # (m,) reciprocal of the above (0 where empty)


class IncrementalEngine:
    """Exact incremental speaker/listener with a shared per-prefix memo.

    The speaker probability for the j-th utterance given target w is the
    depth-1 speaker of the sub-lexicon restricted to hypotheses consistent
    with the first j-1 utterances:

        S1(u_j | w, u_1..u_{j-1}) = L0'(w | u_j) / sum_{u'} L0'(w | u')

    where L0' is the literal listener of that sub-lexicon.  The listener
    scores every hypothesis in the final consistent set by the product of
    these per-step factors and normalizes.

    For a uniform-free prior the factor reduces to

        1 / ( mass(C & row_u) * sum_{u': M[u',w]=1} 1/mass(C & row_u') )

    which needs one masked matrix-vector product per new prefix.  States are
    memoized under a lock, so a shared engine is safe to query concurrently;
    `ops` counts elementary multiply-accumulates for complexity assertions.
    """

    def __init__(self, lex: Lexicon, prior=None):
        self._lex = lex
        self._prior = check_prior(prior, lex.n)
        self._Mf = lex.float_matrix()
        self._Mb = lex.matrix
        self._lock = threading.RLock()
        self._states: dict[tuple[int, ...], _PrefixState] = {}
        self.ops = 0
        self.last_ops = 0
        root_mask = np.ones(lex.n, dtype=bool)
        self._states[()] = _PrefixState(
            mask=root_mask,
            idx=np.arange(lex.n),
            mass=float(self._prior.sum()),
            scores=np.ones(lex.n),
        )

    @property
    def lexicon(self) -> Lexicon:
        return self._lex

    def clear_cache(self) -> None:
        with self._lock:
            root = self._states[()]
            self._states = {(): root}
            root.masses = None
            root.inv_mass = None

    def _row_masses(self, state: _PrefixState) -> np.ndarray:
        """Prior mass of (consistent set & row u') for every utterance u'."""
        if state.masses is None:
            weighted = self._prior[state.idx]
            state.masses = self._Mf[:, state.idx] @ weighted
            inv = np.zeros(self._lex.m)
            np.divide(1.0, state.masses, out=inv, where=state.masses > 0)
            state.inv_mass = inv
            self.ops += self._lex.m * state.idx.size
        return state.masses

    def _state(self, us: tuple[int, ...]) -> _PrefixState:
        cached = self._states.get(us)
        if cached is not None:
            return cached
        parent = self._state(us[:-1])
        u = us[-1]
        if parent.idx.size == 0:
            child = _PrefixState(parent.mask, parent.idx, 0.0, parent.scores)
            self._states[us] = child
            return child
        self._row_masses(parent)
        mask = parent.mask & self._Mb[u]
        idx = np.flatnonzero(mask)
        scores = np.zeros(self._lex.n)
        if idx.size:
            denom = self._Mf[:, idx].T @ parent.inv_mass
            factor = parent.inv_mass[u] / denom
            scores[idx] = parent.scores[idx] * factor
            self.ops += self._lex.m * idx.size
        child = _PrefixState(mask, idx, float(self._prior[idx].sum()), scores)
        self._states[us] = child
        return child

    def _enter(self, us: Sequence[int]) -> tuple[tuple[int, ...], _PrefixState]:
        us = check_utterance_indices(us, self._lex.m)
        with self._lock:
            before = self.ops
            state = self._state(us)
            self.last_ops = self.ops - before
            return us, state

    def speaker_score(self, w: int, us: Sequence[int]) -> float:
        """S1(us | w): product of per-step speaker probabilities."""
        if not 0 <= w < self._lex.n:
            raise IndexError(f"hypothesis index {w} out of range [0, {self._lex.n})")
        if len(us) == 0:
            raise ValueError("speaker score needs at least one utterance")
        us, state = self._enter(us)
        if not state.mask[w]:
            raise InconsistentTargetError(
                f"hypothesis {self._lex.hypotheses[w]!r} is inconsistent with the given utterances"
            )
        return float(state.scores[w])

    def listener_topk(self, us: Sequence[int], k: int | None = 1) -> list[tuple[int, float]]:
        """Top-k consistent hypotheses by normalized incremental score.

        Descending score, ties broken by ascending hypothesis index.
        k=None returns the full ranking of the consistent set.
        """
        if len(us) == 0:
            raise ValueError("listener needs at least one utterance")
        us, state = self._enter(us)
        if state.idx.size == 0:
            raise NoConsistentProgramError("no program matches all examples")
        vals = state.scores[state.idx] * self._prior[state.idx]
        vals = vals / vals.sum()
        order = np.lexsort((state.idx, -vals))
        if k is not None:
            order = order[:k]
        return [(int(state.idx[o]), float(vals[o])) for o in order]

    def next_utterance(self, w: int, prefix: Sequence[int]) -> int:
        """Greedy speaker move: argmax_u S1(u | w, prefix).

        Equivalent to minimizing the prior mass of the next consistent set
        over utterances true of w; ties resolve to the lowest utterance
        index.
        """
        if not 0 <= w < self._lex.n:
            raise IndexError(f"hypothesis index {w} out of range [0, {self._lex.n})")
        prefix, state = self._enter(prefix)
        if not state.mask[w]:
            raise InconsistentTargetError(
                f"hypothesis {self._lex.hypotheses[w]!r} already dropped from the consistent set"
            )
        with self._lock:
            self._row_masses(state)
            candidates = np.where((self._Mb[:, w]) & (state.masses > 0), state.masses, np.inf)
        u = int(np.argmin(candidates))
        if not np.isfinite(candidates[u]):
            raise SpeakerStuckError(f"no utterance keeps {self._lex.hypotheses[w]!r} consistent")
        return u


def incremental_speaker(lex: Lexicon, prior, w: int, us: Sequence[int]) -> float:
    """One-shot S1(us | w); see IncrementalEngine for the shared-memo form."""
    return IncrementalEngine(lex, prior).speaker_score(w, us)


def incremental_pragmatic_listener(lex: Lexicon, prior, us: Sequence[int], k: int | None = 1) -> list[tuple[int, float]]:
    """One-shot incremental L1 query: top-k of L1(w | us) over consistent w."""
    return IncrementalEngine(lex, prior).listener_topk(us, k)
