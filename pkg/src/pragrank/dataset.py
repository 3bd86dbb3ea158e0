"""Simulated-communication datasets: how global rankings see training data.

Each record is one turn of a simulated interaction: a target hypothesis, the
utterance prefix the greedy informative speaker has produced so far, and the
exact listener's full descending ranking of the hypotheses still consistent
with that prefix.  A dataset of partial rankings is what both distillers
(annealing, learned scorer) consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError
from .lexicon import Lexicon
from .rsa import IncrementalEngine
from .validation import check_positive_int

__all__ = [
    "RankingRecord",
    "CycleReport",
    "generate_dataset",
    "cycle_report",
    "dataset_to_text",
    "dataset_from_text",
    "save_dataset",
    "load_dataset",
]


@dataclass(frozen=True)
class RankingRecord:
    """(target, utterance prefix, partial ranking) — one simulated turn.

    `ranking` is the descending-preference order of every hypothesis
    consistent with `us`; the target is always a member.
    """

    target: int
    us: tuple[int, ...]
    ranking: tuple[int, ...]


@dataclass(frozen=True)
class CycleReport:
    """Pairwise-orientation conflicts across a dataset's partial rankings."""

    comparable_pairs: int
    conflicted_pairs: int

    @property
    def fraction(self) -> float:
        if self.comparable_pairs == 0:
            return 0.0
        return self.conflicted_pairs / self.comparable_pairs


def generate_dataset(
    lex: Lexicon,
    prior=None,
    targets: Sequence[int] | None = None,
    N: int = 1,
    engine: IncrementalEngine | None = None,
) -> list[RankingRecord]:
    """Simulate N speaker turns per target and record the listener rankings.

    The speaker greedily emits argmax_u S1(u | target, prefix), ties broken
    by ascending utterance index; after each turn the exact incremental
    listener's full ranking of the consistent set is recorded.  Produces
    len(targets) * N records.
    """
    N = check_positive_int(N, "N")
    if engine is None:
        engine = IncrementalEngine(lex, prior)
    if targets is None:
        targets = range(lex.n)
    records: list[RankingRecord] = []
    for w in targets:
        prefix: tuple[int, ...] = ()
        for _ in range(N):
            u = engine.next_utterance(w, prefix)
            prefix = prefix + (u,)
            ranked = engine.listener_topk(prefix, k=None)
            records.append(RankingRecord(target=int(w), us=prefix, ranking=tuple(i for i, _ in ranked)))
    return records


def _set_bit(row: np.ndarray, j: int) -> None:
    row[j >> 3] |= 128 >> (j & 7)


def cycle_report(records: Iterable[RankingRecord], n: int) -> CycleReport:
    """Count hypothesis pairs ranked in both orientations across records.

    A conflicted ("cyclic") pair is one where some record puts a above b and
    another puts b above a; such pairs are exactly what a single global
    ranking cannot satisfy.  Orientation sets are kept as packed bit matrices,
    so memory is n*n/4 bits; runtime is sum(len(ranking) * n/8) over records.
    """
    n_bytes = (n + 7) >> 3
    above = np.zeros((n, n_bytes), dtype=np.uint8)   # above[a] has bit b if a ranked over b
    below = np.zeros((n, n_bytes), dtype=np.uint8)   # transpose of the same relation
    suffix = np.zeros(n_bytes, dtype=np.uint8)
    col = np.zeros(n_bytes, dtype=np.uint8)
    for rec in records:
        r = rec.ranking
        if len(r) < 2:
            continue
        suffix[:] = 0
        for a in reversed(r):
            above[a] |= suffix
            _set_bit(suffix, a)
        col[:] = 0
        for a in r:
            below[a] |= col
            _set_bit(col, a)
    # Count over unordered pairs: restrict row a to columns strictly above a.
    comparable = 0
    conflicted = 0
    for a in range(n):
        either = above[a] | below[a]
        both = above[a] & below[a]
        # mask off columns <= a
        keep_from = a + 1
        byte0 = keep_from >> 3
        either[:byte0] = 0
        both[:byte0] = 0
        if byte0 < n_bytes and keep_from & 7:
            head = (1 << (8 - (keep_from & 7))) - 1
            either[byte0] &= head
            both[byte0] &= head
        comparable += int(np.bitwise_count(either).sum())
        conflicted += int(np.bitwise_count(both).sum())
    return CycleReport(comparable_pairs=comparable, conflicted_pairs=conflicted)


# ---------------------------------------------------------------------------
# Dataset file format: one record per line,
#   target_id TAB u_id,u_id,... TAB w_id,w_id,...
# with the partial ranking in descending preference order.
# ---------------------------------------------------------------------------


def dataset_to_text(records: Iterable[RankingRecord], lex: Lexicon) -> str:
    lines = []
    for rec in records:
        us = ",".join(lex.utterances[u] for u in rec.us)
        ranked = ",".join(lex.hypotheses[w] for w in rec.ranking)
        lines.append(f"{lex.hypotheses[rec.target]}\t{us}\t{ranked}")
    return "\n".join(lines) + ("\n" if lines else "")


def dataset_from_text(text: str, lex: Lexicon) -> list[RankingRecord]:
    records: list[RankingRecord] = []
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}", line=lineno)
        try:
            target = lex.hypothesis_index(parts[0])
            us = tuple(lex.utterance_index(u) for u in parts[1].split(","))
            ranking = tuple(lex.hypothesis_index(w) for w in parts[2].split(","))
        except KeyError as exc:
            raise ParseError(str(exc.args[0]), line=lineno) from None
        if not ranking:
            raise ParseError("empty partial ranking", line=lineno)
        records.append(RankingRecord(target=target, us=us, ranking=ranking))
    return records


def save_dataset(records: Iterable[RankingRecord], lex: Lexicon, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dataset_to_text(records, lex))


def load_dataset(path, lex: Lexicon) -> list[RankingRecord]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return dataset_from_text(fh.read(), lex)
