"""Global rankings over hypotheses and the listener they induce.

A GlobalRanking is a score vector: higher score = preferred.  Scores only
need to be comparable within one ranking, so chain-extracted rankings keep
log-scale scores (cumulative column normalizers), annealed rankings use
reverse ranks, and learned rankings use normalized network outputs — all
through the same type and the same on-disk format.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DepthTooShallowError, NoConsistentProgramError, ParseError
from .lexicon import Lexicon
from .rsa import ListenerMatrix, NormalizationVectors

__all__ = [
    "GlobalRanking",
    "extract_ranking_from_chain",
    "rank_listener",
    "check_global_ranking",
    "ranking_to_text",
    "ranking_from_text",
    "save_ranking",
    "load_ranking",
]


@dataclass
class GlobalRanking:
    """Example-agnostic preference order over all hypotheses.

    `scores[w]` is hypothesis w's score (higher = preferred).  Exact ties are
    legal — two hypotheses with identical utterance support are genuinely
    interchangeable — so the score vector is primary and the strict
    permutation (ties broken by ascending index) is derived.
    """

    scores: np.ndarray
    hypothesis_ids: list[str] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.ndim != 1:
            raise ValueError("ranking scores must be a vector")
        if self.hypothesis_ids is not None and len(self.hypothesis_ids) != len(self.scores):
            raise ValueError("hypothesis id list does not match score vector length")

    @property
    def n(self) -> int:
        return len(self.scores)

    def permutation(self) -> np.ndarray:
        """Hypothesis indices sorted by descending score, ties by index."""
        return np.lexsort((np.arange(self.n), -self.scores))

    def positions(self) -> np.ndarray:
        """positions()[w] = rank of hypothesis w (0 = most preferred)."""
        perm = self.permutation()
        pos = np.empty(self.n, dtype=np.int64)
        pos[perm] = np.arange(self.n)
        return pos

    def align_to(self, lex: Lexicon) -> "GlobalRanking":
        """Reorder scores to the lexicon's hypothesis order (id-matched)."""
        if self.hypothesis_ids is None:
            if self.n != lex.n:
                raise ValueError("unlabeled ranking length does not match lexicon")
            return self
        index = {h: i for i, h in enumerate(self.hypothesis_ids)}
        try:
            order = [index[h] for h in lex.hypotheses]
        except KeyError as exc:
            raise ValueError(f"ranking is missing hypothesis {exc.args[0]!r}") from None
        return GlobalRanking(self.scores[order], list(lex.hypotheses), dict(self.meta))


def extract_ranking_from_chain(
    nv: NormalizationVectors,
    depth: int,
    hypothesis_ids: Sequence[str] | None = None,
) -> GlobalRanking:
    """The chain's own ranking of hypotheses at a given listener depth.

    Within any row of the depth-d listener, consistent hypotheses are ordered
    by the cumulative column normalizers (times the prior), so that vector
    *is* the global ranking.  Scores are kept in log space.  The cumulative
    product here runs through the normalizer of depth `depth` itself: that is
    the convention under which the depth-1 ranking exists and the ranking
    reproduces the depth-d listener's row orders exactly (verified
    empirically by the acceptance suite).
    """
    if depth < 1:
        raise DepthTooShallowError(f"rankings start at depth 1, got {depth}")
    if depth > nv.depth:
        raise DepthTooShallowError(f"chain was run to depth {nv.depth}, cannot rank depth {depth}")
    scores = nv.log_col_total(depth)
    ids = list(hypothesis_ids) if hypothesis_ids is not None else None
    return GlobalRanking(scores, ids, meta={"kind": "chain", "depth": depth})


def rank_listener(
    sigma: GlobalRanking,
    lex: Lexicon,
    us: Sequence[int],
    k: int | None = 1,
) -> list[tuple[int, float]]:
    """The amortized listener: filter for consistency, sort by sigma.

    Returns up to k (hypothesis index, score) pairs, descending score with
    ascending-index tie-break — the same contract as the exact incremental
    listener, at O(|W|) filter cost plus a sort of the consistent subset.
    """
    if sigma.n != lex.n:
        raise ValueError(f"ranking covers {sigma.n} hypotheses, lexicon has {lex.n}")
    from .lexicon import consistent_set  # local import to avoid cycle at module load

    idx = consistent_set(lex, us)
    if idx.size == 0:
        raise NoConsistentProgramError("no program matches all examples")
    vals = sigma.scores[idx]
    order = np.lexsort((idx, -vals))
    if k is not None:
        order = order[:k]
    return [(int(idx[o]), float(vals[o])) for o in order]


def check_global_ranking(
    listener: ListenerMatrix | np.ndarray | Callable[[int], np.ndarray],
    sigma: GlobalRanking,
    lex: Lexicon,
    listener_gap: float = 1e-8,
    sigma_gap: float = 1e-11,
    log_space: bool = False,
) -> tuple[bool, tuple[int, int, int] | None]:
    """Verify that sigma reproduces a single-utterance listener's orderings.

    For every triple (u, w, w') with both probabilities positive: whenever the
    listener strictly prefers w over w', sigma must too.  "Strict" on the
    listener side means a relative gap above `listener_gap`; sigma agreement
    requires a score gap above `sigma_gap`.  The asymmetric thresholds keep
    float drift between independently computed routes from producing false
    violations, while any genuinely contradicted preference is caught.  Pairs
    the listener ties (or nearly ties) impose no constraint: interchangeable
    hypotheses may be ordered arbitrarily.

    With `log_space=True` the listener entries are log probabilities (-inf
    for zero); deep chains must be checked this way, since their linear
    values underflow float64.

    Returns (ok, first counterexample (u, w, w') or None).
    """
    if callable(listener):
        rows = np.stack([np.asarray(listener(u), dtype=np.float64) for u in range(lex.m)])
    elif isinstance(listener, ListenerMatrix):
        rows = listener.values
    else:
        rows = np.asarray(listener, dtype=np.float64)
    if rows.shape != lex.shape:
        raise ValueError(f"listener has shape {rows.shape}, lexicon is {lex.shape}")
    if sigma.n != lex.n:
        raise ValueError("ranking length does not match lexicon")

    if log_space:
        log_rows = rows
        support = np.isfinite(rows)
    else:
        with np.errstate(divide="ignore"):
            log_rows = np.where(rows > 0, np.log(rows, where=rows > 0, out=np.full(rows.shape, -np.inf)), -np.inf)
        support = rows > 0
    sig = sigma.scores
    for u in range(lex.m):
        cols = np.flatnonzero(support[u])
        if cols.size < 2:
            continue
        lr = log_rows[u, cols]
        listener_strict = (lr[:, None] - lr[None, :]) > listener_gap
        sigma_agrees = (sig[cols][:, None] - sig[cols][None, :]) > sigma_gap
        bad = listener_strict & ~sigma_agrees
        if bad.any():
            i, j = np.argwhere(bad)[0]
            return False, (u, int(cols[i]), int(cols[j]))
    return True, None


# ---------------------------------------------------------------------------
# PRAGRANK v1 serialization
#
#   PRAGRANK v1 <n>
#   <hypothesis id> TAB <score>     (n lines)
# ---------------------------------------------------------------------------

_PRAGRANK_MAGIC = "PRAGRANK v1"


def ranking_to_text(sigma: GlobalRanking) -> str:
    if sigma.hypothesis_ids is None:
        raise ValueError("cannot serialize a ranking without hypothesis ids")
    lines = [f"{_PRAGRANK_MAGIC} {sigma.n}"]
    lines.extend(f"{h}\t{float(score)!r}" for h, score in zip(sigma.hypothesis_ids, sigma.scores))
    return "\n".join(lines) + "\n"


def ranking_from_text(text: str) -> GlobalRanking:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty ranking file", line=1)
    header = lines[0].split(" ")
    if len(header) != 3 or " ".join(header[:2]) != _PRAGRANK_MAGIC:
        raise ParseError(f"bad header {lines[0]!r}, expected '{_PRAGRANK_MAGIC} n'", line=1)
    try:
        n = int(header[2])
    except ValueError:
        raise ParseError(f"non-integer count in header {lines[0]!r}", line=1) from None
    if len(lines) != n + 1:
        raise ParseError(f"expected {n} score lines, found {len(lines) - 1}", line=len(lines))
    ids: list[str] = []
    scores = np.empty(n)
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"expected 'id TAB score', got {line!r}", line=i)
        try:
            scores[i - 2] = float(parts[1])
        except ValueError:
            raise ParseError(f"bad score {parts[1]!r}", line=i) from None
        ids.append(parts[0])
    if len(set(ids)) != n:
        raise ParseError("duplicate hypothesis ids in ranking")
    return GlobalRanking(scores, ids)


def save_ranking(sigma: GlobalRanking, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ranking_to_text(sigma))


def load_ranking(path) -> GlobalRanking:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return ranking_from_text(fh.read())
