"""Replay evaluation, timing benchmarks, and the two theory experiments.

The listeners compared here share one adapter interface: `topk(us, k)` over
utterance indices, a `last_ops` count of array cells touched by that query,
and `fresh()` returning a cold copy.  Replay feeds a trace's prefixes of
increasing length and stops at the first success; the benchmark times those
same queries per turn.  Exact pragmatic listeners are rebuilt per trace:
their at-interaction-time cost is what the ranked listeners amortize away.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NoConsistentProgramError, ParseError
from .lexicon import Lexicon, sample_random_lexicon
from .ranking import GlobalRanking, check_global_ranking, extract_ranking_from_chain
from .rsa import IncrementalEngine, iter_chain_log
from .validation import check_prior

__all__ = [
    "ReplayTrace",
    "TurnResult",
    "LiteralListener",
    "RankedListener",
    "ExactPragmaticListener",
    "replay",
    "simulate_traces",
    "cumulative_success",
    "success_table",
    "bench",
    "RankingExistenceReport",
    "exp_ranking_exists",
    "StabilityCell",
    "StabilityStats",
    "frac_stable",
    "exp_stability",
    "ingest_replays",
    "write_traces",
    "write_success_csv",
    "write_bench_csv",
]

_TRACE_TAGS = ("H0", "H1", "simulated")


@dataclass(frozen=True)
class ReplayTrace:
    """One communication attempt: target id, utterance ids in order, source."""

    tag: str
    target: str
    utterances: tuple[str, ...]

    def __post_init__(self):
        if self.tag not in _TRACE_TAGS:
            raise ValueError(f"trace tag must be one of {_TRACE_TAGS}, got {self.tag!r}")
        if len(self.utterances) == 0:
            raise ValueError("a trace needs at least one utterance")


@dataclass(frozen=True)
class TurnResult:
    """Per-turn outcome of replaying one trace against one listener."""

    listener: str
    trace: ReplayTrace
    successes: tuple[bool, ...]  # one entry per turn actually played
    first_success: int | None  # 1-based; None if never successful
    turn_ms: tuple[float, ...]
    turn_ops: tuple[int, ...]


# ---------------------------------------------------------------------------
# Listener adapters
# ---------------------------------------------------------------------------


class LiteralListener:
    """Filter by consistency, order by prior (ties to the lowest index)."""

    def __init__(self, lex: Lexicon, prior: np.ndarray | None = None, name: str = "L0"):
        self.name = name
        self.lex = lex
        self.prior = check_prior(prior, lex.n)
        self.last_ops = 0

    def fresh(self) -> "LiteralListener":
        return LiteralListener(self.lex, self.prior, self.name)

    def topk(self, us: Sequence[int], k: int | None = 1) -> np.ndarray:
        mask = np.ones(self.lex.n, dtype=bool)
        for u in us:
            mask &= self.lex.matrix[u]
        cand = np.flatnonzero(mask)
        self.last_ops = len(us) * self.lex.n + cand.size
        if cand.size == 0:
            raise NoConsistentProgramError("no hypothesis is consistent with the examples")
        order = cand[np.lexsort((cand, -self.prior[cand]))]
        return order if k is None else order[:k]


class RankedListener:
    """Filter by consistency, order by a precomputed global ranking.

    Matches rank_listener's contract query for query; implemented inline so
    the op count reflects exactly the work done.
    """

    def __init__(self, sigma: GlobalRanking, lex: Lexicon, name: str = "L_sigma"):
        if sigma.n != lex.n:
            raise ValueError("ranking length does not match lexicon")
        self.name = name
        self.lex = lex
        self.sigma = sigma
        self.last_ops = 0

    def fresh(self) -> "RankedListener":
        return RankedListener(self.sigma, self.lex, self.name)

    def topk(self, us: Sequence[int], k: int | None = 1) -> np.ndarray:
        mask = np.ones(self.lex.n, dtype=bool)
        for u in us:
            mask &= self.lex.matrix[u]
        cand = np.flatnonzero(mask)
        self.last_ops = len(us) * self.lex.n + cand.size
        if cand.size == 0:
            raise NoConsistentProgramError("no hypothesis is consistent with the examples")
        order = cand[np.lexsort((cand, -self.sigma.scores[cand]))]
        return order if k is None else order[:k]


class ExactPragmaticListener:
    """Incremental exact L1; engine state persists across a trace's turns."""

    def __init__(self, lex: Lexicon, prior: np.ndarray | None = None, name: str = "L1"):
        self.name = name
        self.lex = lex
        self.prior = prior
        self.engine = IncrementalEngine(lex, prior)
        self.last_ops = 0

    def fresh(self) -> "ExactPragmaticListener":
        return ExactPragmaticListener(self.lex, self.prior, self.name)

    def topk(self, us: Sequence[int], k: int | None = 1) -> np.ndarray:
        ranked = self.engine.listener_topk(us, k)
        self.last_ops = self.engine.last_ops
        return np.fromiter((idx for idx, _ in ranked), dtype=np.int64, count=len(ranked))


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


def replay(trace: ReplayTrace, listener, lex: Lexicon | None = None, k: int = 1) -> TurnResult:
    """Feed growing prefixes of the trace; success is absorbing.

    A NoConsistentProgram on some prefix (impossible for traces consistent
    with their target) is recorded as a failed turn.
    """
    lex = lex if lex is not None else listener.lex
    target = lex.hypothesis_index(trace.target)
    us = [lex.utterance_index(u) for u in trace.utterances]
    successes: list[bool] = []
    turn_ms: list[float] = []
    turn_ops: list[int] = []
    first_success = None
    for turn in range(1, len(us) + 1):
        t0 = time.perf_counter()
        try:
            top = listener.topk(us[:turn], k)
            hit = bool(np.isin(target, top).any())
        except NoConsistentProgramError:
            hit = False
        turn_ms.append((time.perf_counter() - t0) * 1e3)
        turn_ops.append(listener.last_ops)
        successes.append(hit)
        if hit:
            first_success = turn
            break
    return TurnResult(
        listener=listener.name,
        trace=trace,
        successes=tuple(successes),
        first_success=first_success,
        turn_ms=tuple(turn_ms),
        turn_ops=tuple(turn_ops),
    )


def simulate_traces(
    lex: Lexicon,
    prior: np.ndarray | None = None,
    targets: Sequence[int] | None = None,
    N: int = 3,
) -> list[ReplayTrace]:
    """Greedy informative-speaker traces of length N, one per target."""
    if N < 1:
        raise ValueError("N must be >= 1")
    engine = IncrementalEngine(lex, prior)
    targets = range(lex.n) if targets is None else targets
    traces = []
    for w in targets:
        us: list[int] = []
        for _ in range(N):
            us.append(engine.next_utterance(w, us))
        traces.append(
            ReplayTrace(tag="simulated", target=lex.hypotheses[w], utterances=tuple(lex.utterances[u] for u in us))
        )
    return traces


def cumulative_success(results: Sequence[TurnResult], turn: int) -> float:
    """Fraction of traces solved by the end of the given 1-based turn."""
    if len(results) == 0:
        return 0.0
    hits = sum(1 for r in results if r.first_success is not None and r.first_success <= turn)
    return hits / len(results)


def _wilson(successes: int, total: int, z: float = 1.96) -> tuple[float, float]:
    if total == 0:
        return 0.0, 1.0
    p = successes / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def success_table(results_by_listener: dict[str, Sequence[TurnResult]]) -> list[tuple[str, int, float, float, float]]:
    """Rows (listener, turn, success_rate, ci_lo, ci_hi); cumulative, Wilson 95%."""
    rows = []
    for name, results in results_by_listener.items():
        if len(results) == 0:
            continue
        max_turn = max(len(r.trace.utterances) for r in results)
        for turn in range(1, max_turn + 1):
            hits = sum(1 for r in results if r.first_success is not None and r.first_success <= turn)
            lo, hi = _wilson(hits, len(results))
            rows.append((name, turn, hits / len(results), lo, hi))
    return rows


# ---------------------------------------------------------------------------
# Timing benchmark
# ---------------------------------------------------------------------------


def bench(
    listeners: Sequence,
    traces: Sequence[ReplayTrace],
    repetitions: int = 5,
    k: int = 1,
    warmup: int = 2,
) -> list[tuple[str, int, float, int]]:
    """Median per-turn wall time (ms) and op count per listener.

    Every repetition replays every trace against a fresh listener instance,
    so stateful listeners pay their per-interaction cost each time.  Replay
    runs to the full trace length here (success does not stop the clock);
    medians are over traces x repetitions.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rows = []
    for proto in listeners:
        times: dict[int, list[float]] = {}
        ops: dict[int, list[int]] = {}
        for rep in range(-warmup, repetitions):
            for trace in traces:
                listener = proto.fresh()
                lex = listener.lex
                us = [lex.utterance_index(u) for u in trace.utterances]
                for turn in range(1, len(us) + 1):
                    t0 = time.perf_counter()
                    try:
                        listener.topk(us[:turn], k)
                    except NoConsistentProgramError:
                        pass
                    dt = (time.perf_counter() - t0) * 1e3
                    if rep >= 0:
                        times.setdefault(turn, []).append(dt)
                        ops.setdefault(turn, []).append(listener.last_ops)
        for turn in sorted(times):
            rows.append((proto.name, turn, float(np.median(times[turn])), int(np.median(ops[turn]))))
    return rows


# ---------------------------------------------------------------------------
# Theory experiment 1: a global ranking exists at every depth
# ---------------------------------------------------------------------------


@dataclass
class RankingExistenceReport:
    lexicons: int
    depth: int
    checks: int
    violations: list[tuple[int, int, tuple[int, int, int]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0


def exp_ranking_exists(
    num_lexicons: int = 1000,
    size_range: tuple[int, int] = (10, 20),
    depth: int = 100,
    seed: int = 0,
    p_true: float = 0.5,
) -> RankingExistenceReport:
    """Check the listener/ranking agreement on random lexicons, all depths.

    The listener at each depth comes from the iterative log-space chain; the
    ranking comes from the accumulated column normalizers.  The two routes
    share no arithmetic beyond the chain itself, so agreement is evidence,
    not tautology.
    """
    rng = np.random.default_rng(seed)
    lo, hi = size_range
    report = RankingExistenceReport(lexicons=num_lexicons, depth=depth, checks=0)
    for li in range(num_lexicons):
        m = int(rng.integers(lo, hi + 1))
        n = int(rng.integers(lo, hi + 1))
        lex = sample_random_lexicon(m, n, p_true, rng)
        for i, log_listener, nv in iter_chain_log(lex, None, depth):
            sigma = extract_ranking_from_chain(nv, i, lex.hypotheses)
            ok, witness = check_global_ranking(log_listener, sigma, lex, log_space=True)
            report.checks += 1
            if not ok:
                report.violations.append((li, i, witness))
    return report


# ---------------------------------------------------------------------------
# Theory experiment 2: how early do pairwise orders stabilize
# ---------------------------------------------------------------------------


def frac_stable(lex: Lexicon, iters: int = 100, eps: float = 1e-12) -> float:
    """Fraction of eventually-ordered pairs already ordered that way at depth 1.

    A pair counts for the numerator when the sign of its score gap is the
    same nonzero value at every depth 1..iters; for the denominator when the
    gap is nonzero at depth `iters` (ties stay unordered and are excluded).
    """
    if iters < 2:
        raise ValueError("iters must be >= 2")
    for _, _, nv in iter_chain_log(lex, None, iters):
        pass
    log_c = np.stack(nv.log_c)  # (iters, n)
    sigmas = np.cumsum(log_c, axis=0)  # prior is uniform: constant shift only
    gaps = sigmas[:, :, None] - sigmas[:, None, :]
    signs = np.where(gaps > eps, 1, np.where(gaps < -eps, -1, 0))
    final = signs[-1]
    iu = np.triu_indices(lex.n, k=1)
    decided = final[iu] != 0
    stable_from_1 = ((signs == final[None, :, :]).all(axis=0) & (final != 0))[iu]
    denom = int(decided.sum())
    if denom == 0:
        return 1.0
    return float(stable_from_1.sum() / denom)


@dataclass(frozen=True)
class StabilityCell:
    p_true: float
    size: int
    samples: tuple[float, ...]
    mean: float
    ci_lo: float
    ci_hi: float


@dataclass(frozen=True)
class StabilityStats:
    iters: int
    cells: tuple[StabilityCell, ...]

    def cell(self, p_true: float, size: int) -> StabilityCell:
        for c in self.cells:
            if c.p_true == p_true and c.size == size:
                return c
        raise KeyError(f"no cell for p_true={p_true}, size={size}")


def exp_stability(
    p_trues: Sequence[float] = (0.2, 0.5, 0.8),
    sizes: Sequence[int] = (10, 20, 50),
    n_per_cell: int = 20,
    iters: int = 100,
    seed: int = 0,
    bootstrap: int = 1000,
) -> StabilityStats:
    """frac-stable over square random lexicons, with bootstrap CIs on the mean."""
    rng = np.random.default_rng(seed)
    cells = []
    for p_true in p_trues:
        for size in sizes:
            samples = []
            for _ in range(n_per_cell):
                lex = sample_random_lexicon(size, size, p_true, rng)
                samples.append(frac_stable(lex, iters))
            arr = np.asarray(samples)
            means = rng.choice(arr, size=(bootstrap, arr.size), replace=True).mean(axis=1)
            cells.append(
                StabilityCell(
                    p_true=p_true,
                    size=size,
                    samples=tuple(samples),
                    mean=float(arr.mean()),
                    ci_lo=float(np.percentile(means, 2.5)),
                    ci_hi=float(np.percentile(means, 97.5)),
                )
            )
    return StabilityStats(iters=iters, cells=tuple(cells))


# ---------------------------------------------------------------------------
# Trace files:  tag TAB target_id TAB u1;u2;...
# ---------------------------------------------------------------------------


def write_traces(traces: Sequence[ReplayTrace], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in traces:
            fh.write(f"{t.tag}\t{t.target}\t{';'.join(t.utterances)}\n")


def ingest_replays(path, lex: Lexicon) -> list[ReplayTrace]:
    """Parse and validate traces; records with inconsistent examples are
    dropped with a warning, malformed lines raise."""
    traces = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line == "":
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"expected 'tag<TAB>target<TAB>utterances', got {line!r}", line=lineno)
            tag, target, joined = parts
            if tag not in _TRACE_TAGS:
                raise ParseError(f"unknown tag {tag!r}", line=lineno)
            utterances = tuple(joined.split(";")) if joined else ()
            if len(utterances) == 0:
                raise ParseError("trace has no utterances", line=lineno)
            try:
                w = lex.hypothesis_index(target)
                us = [lex.utterance_index(u) for u in utterances]
            except KeyError as exc:
                warnings.warn(f"line {lineno}: {exc.args[0]}; record dropped")
                continue
            if not all(lex.matrix[u, w] for u in us):
                warnings.warn(f"line {lineno}: example inconsistent with target {target!r}; record dropped")
                continue
            traces.append(ReplayTrace(tag=tag, target=target, utterances=utterances))
    return traces


def write_success_csv(rows: Sequence[tuple[str, int, float, float, float]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("listener,turn,success_rate,ci_lo,ci_hi\n")
        for name, turn, rate, lo, hi in rows:
            fh.write(f"{name},{turn},{rate:.6f},{lo:.6f},{hi:.6f}\n")


def write_bench_csv(rows: Sequence[tuple[str, int, float, int]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("listener,turn,median_ms,ops\n")
        for name, turn, ms, ops in rows:
            fh.write(f"{name},{turn},{ms:.6f},{ops}\n")
