"""Binary-alphabet regex domain: enumeration, matching, and string sampling.

Programs are concatenations of up to `max_factors` factors, each a single
atom in {0,1} under a quantifier.  Semantics is anchored full-string match.
Two grammar scales are provided; programs are deduplicated by their behavior
over every string up to length L_max, so emitted program lists have pairwise
distinct match columns.

Matching compiles each program to a DFA once (the grammar is a chain of
counted repetitions, so the automata stay tiny) and evaluates all strings up
to length L in one dynamic program over the binary trie: the states of all
length-l prefixes are a contiguous slice, and both children of every node
are one table lookup away.  This is what makes behavior vectors over the
full 8191-string universe cheap enough to compute per program.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from ..errors import CoverageImpossibleError, MalformedProgramError
from ..lexicon import Lexicon, build_lexicon

__all__ = [
    "RegexProgram",
    "GrammarConfig",
    "SMALL_GRAMMAR",
    "LARGE_GRAMMAR",
    "parse_regex",
    "regex_match",
    "enumerate_syntactic",
    "enumerate_regexes",
    "sample_strings",
    "behavior_matrix",
    "all_strings",
    "build_regex_lexicon",
    "production_sequences",
]

# quantifier -> (min, max) repetition count; None = unbounded
_QUANT_BOUNDS = {
    "": (1, 1),
    "?": (0, 1),
    "*": (0, None),
    "+": (1, None),
    "{1}": (1, 1),
    "{2}": (2, 2),
    "{3}": (3, 3),
}


@dataclass(frozen=True)
class GrammarConfig:
    """Scale knob: factor count and quantifier set define the program space."""

    max_factors: int
    quantifiers: tuple[str, ...]
    L_max: int = 12

    def __post_init__(self):
        for q in self.quantifiers:
            if q not in _QUANT_BOUNDS:
                raise ValueError(f"unknown quantifier {q!r}")
        if self.max_factors < 1:
            raise ValueError("max_factors must be >= 1")


# Calibrated so the deduplicated program counts land near the two target
# scales (336 and 3564 classes over strings up to length 12); SMALL's grammar
# is a subset of LARGE's, so every small behavior class also appears in the
# large enumeration.
SMALL_GRAMMAR = GrammarConfig(max_factors=3, quantifiers=("", "*", "?", "{3}"))
LARGE_GRAMMAR = GrammarConfig(max_factors=4, quantifiers=("", "*", "+", "?", "{3}"))


@dataclass(frozen=True)
class RegexProgram:
    """Concatenation of (atom, quantifier) factors; `src` is canonical."""

    src: str
    factors: tuple[tuple[str, str], ...]

    def __str__(self) -> str:
        return self.src


def parse_regex(src: str) -> RegexProgram:
    """Parse a factor-chain source string; round-trips with printing."""
    factors: list[tuple[str, str]] = []
    i = 0
    while i < len(src):
        atom = src[i]
        if atom not in ("0", "1"):
            raise MalformedProgramError(f"expected atom 0/1 at position {i} in {src!r}")
        i += 1
        quant = ""
        if i < len(src) and src[i] in ("*", "+", "?"):
            quant = src[i]
            i += 1
        elif i < len(src) and src[i] == "{":
            end = src.find("}", i)
            if end == -1:
                raise MalformedProgramError(f"unterminated quantifier in {src!r}")
            quant = src[i : end + 1]
            if quant not in _QUANT_BOUNDS:
                raise MalformedProgramError(f"unsupported quantifier {quant!r} in {src!r}")
            i = end + 1
        factors.append((atom, quant))
    if not factors:
        raise MalformedProgramError("empty regex source")
    return RegexProgram(src=src, factors=tuple(factors))


def _program(factors: Sequence[tuple[str, str]]) -> RegexProgram:
    return RegexProgram(src="".join(a + q for a, q in factors), factors=tuple(factors))


# ---------------------------------------------------------------------------
# Compilation: factor chain -> NFA -> dense DFA table
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _compile(factors: tuple[tuple[str, str], ...]) -> tuple[np.ndarray, np.ndarray]:
    """Returns (trans, accept): trans[state, bit] -> state, state 0 = start.

    The NFA is a chain of counted repetitions: each factor contributes
    `min` mandatory unit steps plus either optional unit steps (bounded) or a
    self-loop (unbounded), with epsilon skips forward.  Subset construction
    is cheap because reachable state sets stay small on a chain.
    """
    eps: list[list[int]] = [[]]
    by_bit: list[list[tuple[int, int]]] = [[]]  # state -> [(bit, next_state)]

    def new_state() -> int:
        eps.append([])
        by_bit.append([])
        return len(eps) - 1

    cur = 0
    for atom, quant in factors:
        bit = int(atom)
        lo, hi = _QUANT_BOUNDS[quant]
        if hi is None:
            for _ in range(lo):
                nxt = new_state()
                by_bit[cur].append((bit, nxt))
                cur = nxt
            if lo == 0:
                # the loop needs its own state: self-looping on the previous
                # factor's exit would conflate the two factors' repetitions
                nxt = new_state()
                eps[cur].append(nxt)
                cur = nxt
            by_bit[cur].append((bit, cur))
        else:
            entry = cur
            chain = [entry]
            for _ in range(hi):
                nxt = new_state()
                by_bit[cur].append((bit, nxt))
                cur = nxt
                chain.append(nxt)
            for r in range(lo, hi):
                eps[chain[r]].append(cur)
    accept_nfa = cur

    def closure(states: frozenset[int]) -> frozenset[int]:
        stack = list(states)
        seen = set(states)
        while stack:
            s = stack.pop()
            for t in eps[s]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    start = closure(frozenset([0]))
    index: dict[frozenset[int], int] = {start: 0}
    order = [start]
    trans_rows: list[list[int]] = []
    i = 0
    while i < len(order):
        states = order[i]
        row = []
        for bit in (0, 1):
            nxt = frozenset(t for s in states for b, t in by_bit[s] if b == bit)
            nxt = closure(nxt)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        trans_rows.append(row)
        i += 1
    trans = np.asarray(trans_rows, dtype=np.int32)
    accept = np.fromiter((accept_nfa in states for states in order), dtype=bool, count=len(order))
    return trans, accept


def regex_match(program: RegexProgram | str, s: str) -> bool:
    """Anchored full-string match; linear in len(s)."""
    if isinstance(program, str):
        program = parse_regex(program)
    trans, accept = _compile(program.factors)
    state = 0
    for ch in s:
        if ch not in ("0", "1"):
            raise ValueError(f"string {s!r} leaves the 0/1 alphabet")
        state = int(trans[state, int(ch)])
    return bool(accept[state])


# ---------------------------------------------------------------------------
# Behavior vectors over the binary trie
# ---------------------------------------------------------------------------
#
# Strings up to length L are laid out in (length, value) order: the empty
# string is node 0 and string s of length l >= 1 sits at 2^l - 1 + int(s, 2).
# Children of the length-l block are then the interleaved lookups
# child[0::2] = trans[parent, 0], child[1::2] = trans[parent, 1].


def _trie_index(s: str) -> int:
    if len(s) == 0:
        return 0
    return (1 << len(s)) - 1 + int(s, 2)


def all_strings(L_max: int) -> list[str]:
    """Every binary string of length <= L_max, in trie (length, value) order."""
    out = [""]
    for length in range(1, L_max + 1):
        out.extend(format(v, f"0{length}b") for v in range(1 << length))
    return out


def _trie_behavior(factors: tuple[tuple[str, str], ...], L_max: int) -> np.ndarray:
    trans, accept = _compile(factors)
    n_nodes = (1 << (L_max + 1)) - 1
    states = np.empty(n_nodes, dtype=np.int32)
    states[0] = 0
    for length in range(L_max):
        lo = (1 << length) - 1
        hi = (1 << (length + 1)) - 1
        parents = states[lo:hi]
        block = states[hi : hi + 2 * (hi - lo)]
        block[0::2] = trans[parents, 0]
        block[1::2] = trans[parents, 1]
    return accept[states]


def behavior_matrix(programs: Sequence[RegexProgram], strings: Sequence[str]) -> np.ndarray:
    """Boolean (len(programs), len(strings)) full-match table."""
    L = max((len(s) for s in strings), default=0)
    idx = np.fromiter((_trie_index(s) for s in strings), dtype=np.int64, count=len(strings))
    out = np.empty((len(programs), len(strings)), dtype=bool)
    for i, p in enumerate(programs):
        out[i] = _trie_behavior(p.factors, L)[idx]
    return out


# ---------------------------------------------------------------------------
# Enumeration and semantic dedupe
# ---------------------------------------------------------------------------


def enumerate_syntactic(config: GrammarConfig) -> list[RegexProgram]:
    """All factor chains of arity 1..max_factors, in deterministic order."""
    alternatives = [(a, q) for a in ("0", "1") for q in config.quantifiers]
    out: list[RegexProgram] = []
    for arity in range(1, config.max_factors + 1):
        for combo in itertools.product(alternatives, repeat=arity):
            out.append(_program(combo))
    return out


def _dedupe(programs: Sequence[RegexProgram], behaviors: np.ndarray) -> list[RegexProgram]:
    """One representative per distinct behavior row: shortest source wins."""
    packed = np.packbits(behaviors, axis=1)
    best: dict[bytes, RegexProgram] = {}
    order: list[bytes] = []
    for prog, row in zip(programs, packed):
        key = row.tobytes()
        prev = best.get(key)
        if prev is None:
            best[key] = prog
            order.append(key)
        elif (len(prog.src), prog.src) < (len(prev.src), prev.src):
            best[key] = prog
    return [best[key] for key in order]


def enumerate_regexes(config: GrammarConfig, strings: Sequence[str]) -> list[RegexProgram]:
    """Enumerate the grammar and deduplicate by behavior over `strings`.

    Representatives are the shortest source per class, in first-appearance
    order; no two emitted programs share a behavior vector over the sample.
    """
    syntactic = enumerate_syntactic(config)
    return _dedupe(syntactic, behavior_matrix(syntactic, strings))


# ---------------------------------------------------------------------------
# String sampling
# ---------------------------------------------------------------------------


def sample_strings(
    programs: Sequence[RegexProgram],
    count: int = 2000,
    L_max: int = 12,
    rng_seed: int = 0,
) -> list[str]:
    """Deterministic utterance sample that supports the whole program set.

    The sample always contains the empty string and every string of length
    <= 3 (the coverage floor), a shortest witness for every behavior class,
    and enough separating strings that distinct classes stay distinct when
    restricted to the sample.  Remaining slots are filled from the pool of
    strings that match at least one program.  Returned in trie order.
    """
    if count > (1 << (L_max + 1)) - 1:
        raise ValueError(f"count={count} exceeds the {(1 << (L_max + 1)) - 1} strings up to length {L_max}")
    universe = all_strings(L_max)
    full = behavior_matrix(programs, universe)

    uncovered = np.flatnonzero(~full.any(axis=1))
    if uncovered.size:
        raise CoverageImpossibleError(
            f"program {programs[int(uncovered[0])].src!r} matches no string up to length {L_max}"
        )

    # collapse to behavior classes; requirements are per class
    packed = np.packbits(full, axis=1)
    class_rows: list[int] = []
    seen: set[bytes] = set()
    for i in range(full.shape[0]):
        key = packed[i].tobytes()
        if key not in seen:
            seen.add(key)
            class_rows.append(i)
    classes = full[class_rows]

    floor_end = (1 << 4) - 1  # "" plus all strings of length <= 3
    required: list[int] = list(range(floor_end))
    chosen = set(required)

    covered = classes[:, required].any(axis=1)
    for c in np.flatnonzero(~covered):
        witness = int(np.flatnonzero(classes[c]).min())  # trie order = shortest first
        if witness not in chosen:
            required.append(witness)
            chosen.add(witness)

    while True:
        sub = np.packbits(classes[:, sorted(chosen)], axis=1)
        groups: dict[bytes, int] = {}
        added = False
        for c in range(classes.shape[0]):
            key = sub[c].tobytes()
            other = groups.setdefault(key, c)
            if other != c:
                diff = classes[other] != classes[c]
                sep = int(np.flatnonzero(diff)[0])
                if sep not in chosen:
                    required.append(sep)
                    chosen.add(sep)
                    added = True
        if not added:
            break

    rng = np.random.default_rng(rng_seed)
    if count > len(chosen):
        pool = np.flatnonzero(full.any(axis=0))
        pool = pool[~np.isin(pool, sorted(chosen))]
        fill = rng.choice(pool, size=min(count - len(chosen), pool.size), replace=False)
        chosen.update(int(i) for i in fill)
    return [universe[i] for i in sorted(chosen)]


# ---------------------------------------------------------------------------
# Lexicon and encodings
# ---------------------------------------------------------------------------


def build_regex_lexicon(programs: Sequence[RegexProgram], strings: Sequence[str]) -> Lexicon:
    """Rows = strings, columns = programs, entries = full-string match."""
    matrix = behavior_matrix(programs, strings).T
    return build_lexicon(list(strings), [p.src for p in programs], matrix)


def production_sequences(programs: Sequence[RegexProgram], config: GrammarConfig) -> list[tuple[int, ...]]:
    """Production-choice sequences for the scorer's one-hot encoding.

    Layout: [arity - 1] then (atom, quantifier) per factor slot; slots past a
    program's arity are encoded at index 0.
    """
    quant_index = {q: i for i, q in enumerate(config.quantifiers)}
    out = []
    for p in programs:
        if len(p.factors) > config.max_factors:
            raise MalformedProgramError(f"{p.src!r} has more than {config.max_factors} factors")
        seq: list[int] = [len(p.factors) - 1]
        for k in range(config.max_factors):
            if k < len(p.factors):
                atom, quant = p.factors[k]
                if quant not in quant_index:
                    raise MalformedProgramError(f"{p.src!r} uses quantifier {quant!r} outside the grammar")
                seq.append(int(atom))
                seq.append(quant_index[quant])
            else:
                seq.append(0)
                seq.append(0)
        out.append(tuple(seq))
    return out
