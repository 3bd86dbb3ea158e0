"""Grid-pattern domain: 7x7 boxes of colored animals on a pebble field.

A program draws one axis-aligned box: cells within `thickness` of the box
border get the outer object, strictly interior cells get the inner object,
everything else is a colorless pebble.  Non-pebble cells are colored
red/green/blue by a small integer map of the cell coordinates.  An utterance
reveals a single square.

`render_grid` is the direct, per-cell reference semantics.  Enumeration
renders all 254,016 well-formed programs through a broadcast pipeline
instead (patterns for a whole geometry at once) and deduplicates identical
grids, keeping the first program in production-sequence order as the
canonical representative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import MalformedProgramError, ParseError
from ..lexicon import Lexicon, build_lexicon
from ..scorer import ANIMALS_GRAMMAR

__all__ = [
    "AnimalsProgram",
    "AnimalsEnumeration",
    "CELL_TOKENS",
    "GRID_SIZE",
    "OUTER_CHOICES",
    "INNER_CHOICES",
    "A1_CHOICES",
    "A2_CHOICES",
    "render_grid",
    "enumerate_animals",
    "reveal_consistency",
    "production_sequence",
    "encode_program",
    "program_to_id",
    "program_from_id",
    "utterance_ids",
    "build_animals_lexicon",
    "pattern_to_text",
    "pattern_from_text",
]

GRID_SIZE = 7

# cell codes: 0 = pebble; chickens 1..3 and pigs 4..6 in red/green/blue order
CELL_TOKENS = ("P", "Cr", "Cg", "Cb", "Pr", "Pg", "Pb")

OUTER_CHOICES = ("chicken", "pig")
INNER_CHOICES = ("chicken", "pig", "pebble")
A1_CHOICES = ("x", "y", "x+y")
A2_CHOICES = ("0", "1", "2", "z%2", "z%2+1", "2*(z%2)")

_OBJECT_BASE = {"chicken": 1, "pig": 4}

_A2_FUNCS = (
    lambda z: np.zeros_like(z),
    lambda z: np.ones_like(z),
    lambda z: np.full_like(z, 2),
    lambda z: z % 2,
    lambda z: z % 2 + 1,
    lambda z: 2 * (z % 2),
)


@dataclass(frozen=True)
class AnimalsProgram:
    """One box: geometry, border/interior objects, and the coloring map."""

    left: int
    right: int
    top: int
    bottom: int
    thickness: int
    outer: str
    inner: str
    a1: str
    a2: str

    def __post_init__(self):
        for name in ("left", "right", "top", "bottom"):
            v = getattr(self, name)
            if not 0 <= v < GRID_SIZE:
                raise MalformedProgramError(f"{name}={v} outside 0..{GRID_SIZE - 1}")
        if self.left > self.right or self.top > self.bottom:
            raise MalformedProgramError("box needs left <= right and top <= bottom")
        if not 1 <= self.thickness <= 3:
            raise MalformedProgramError(f"thickness={self.thickness} outside 1..3")
        if self.outer not in OUTER_CHOICES:
            raise MalformedProgramError(f"unknown outer object {self.outer!r}")
        if self.inner not in INNER_CHOICES:
            raise MalformedProgramError(f"unknown inner object {self.inner!r}")
        if self.a1 not in A1_CHOICES:
            raise MalformedProgramError(f"unknown coordinate map {self.a1!r}")
        if self.a2 not in A2_CHOICES:
            raise MalformedProgramError(f"unknown color map {self.a2!r}")


def _colour_index(p: AnimalsProgram, x: int, y: int) -> int:
    z = {"x": x, "y": y, "x+y": x + y}[p.a1]
    return int(_A2_FUNCS[A2_CHOICES.index(p.a2)](np.asarray(z))) % 3


def render_grid(p: AnimalsProgram) -> np.ndarray:
    """Reference semantics, cell by cell; grid[y, x] is a CELL_TOKENS code."""
    grid = np.zeros((GRID_SIZE, GRID_SIZE), dtype=np.int8)
    for y in range(GRID_SIZE):
        for x in range(GRID_SIZE):
            if not (p.left <= x <= p.right and p.top <= y <= p.bottom):
                continue  # pebble
            border_distance = min(x - p.left, p.right - x, y - p.top, p.bottom - y)
            obj = p.outer if border_distance < p.thickness else p.inner
            if obj == "pebble":
                continue
            grid[y, x] = _OBJECT_BASE[obj] + _colour_index(p, x, y)
    return grid


def reveal_consistency(p: AnimalsProgram, utterance: tuple[int, int, int | str]) -> bool:
    """True iff revealing square (x, y) would show the given cell value."""
    x, y, value = utterance
    if not (0 <= x < GRID_SIZE and 0 <= y < GRID_SIZE):
        raise ValueError(f"coordinates ({x}, {y}) off the grid")
    code = CELL_TOKENS.index(value) if isinstance(value, str) else int(value)
    return int(render_grid(p)[y, x]) == code


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnimalsEnumeration:
    """Semantic classes: one canonical program per distinct grid."""

    programs: list[AnimalsProgram]
    patterns: np.ndarray  # (n_classes, 7, 7) int8 cell codes
    syntactic_count: int

    @property
    def semantic_count(self) -> int:
        return len(self.programs)


def _colour_fields() -> np.ndarray:
    """(a1, a2, y, x) color indices shared by every geometry."""
    coord = np.arange(GRID_SIZE)
    X, Y = np.meshgrid(coord, coord)
    a1_fields = np.stack([X, Y, X + Y])
    colour = np.empty((3, 6, GRID_SIZE, GRID_SIZE), dtype=np.int8)
    for j, fn in enumerate(_A2_FUNCS):
        colour[:, j] = fn(a1_fields) % 3
    return colour


def enumerate_animals() -> AnimalsEnumeration:
    """Render every well-formed program; deduplicate identical patterns.

    Enumeration order is lexicographic over the production sequence
    (left, right, top, bottom, thickness, outer, inner, a1, a2), so np.unique's
    first-occurrence indices are exactly the canonical representatives.
    """
    colour = _colour_fields().reshape(18, GRID_SIZE, GRID_SIZE)
    border_tok = np.stack([base + colour for base in (1, 4)])  # (outer, combo, y, x)
    inner_tok = np.stack([1 + colour, 4 + colour, np.zeros_like(colour)])

    coord = np.arange(GRID_SIZE)
    X, Y = np.meshgrid(coord, coord)
    geometries = [
        (left, right, top, bottom, th)
        for left in range(GRID_SIZE)
        for right in range(left, GRID_SIZE)
        for top in range(GRID_SIZE)
        for bottom in range(top, GRID_SIZE)
        for th in (1, 2, 3)
    ]
    per_geometry = 2 * 3 * 18
    patterns = np.empty((len(geometries) * per_geometry, GRID_SIZE * GRID_SIZE), dtype=np.int8)
    for g, (left, right, top, bottom, th) in enumerate(geometries):
        in_box = (X >= left) & (X <= right) & (Y >= top) & (Y <= bottom)
        border_distance = np.minimum.reduce([X - left, right - X, Y - top, bottom - Y])
        border = in_box & (border_distance < th)
        interior = in_box & ~border
        block = border * border_tok[:, None] + interior * inner_tok[None, :]
        patterns[g * per_geometry : (g + 1) * per_geometry] = block.reshape(per_geometry, -1)

    _, first = np.unique(patterns, axis=0, return_index=True)
    first.sort()
    programs = []
    for flat in first:
        g, inner = divmod(int(flat), per_geometry)
        left, right, top, bottom, th = geometries[g]
        o, rest = divmod(inner, 3 * 18)
        i, combo = divmod(rest, 18)
        a1, a2 = divmod(combo, 6)
        programs.append(
            AnimalsProgram(
                left=left,
                right=right,
                top=top,
                bottom=bottom,
                thickness=th,
                outer=OUTER_CHOICES[o],
                inner=INNER_CHOICES[i],
                a1=A1_CHOICES[a1],
                a2=A2_CHOICES[a2],
            )
        )
    kept = patterns[first].reshape(-1, GRID_SIZE, GRID_SIZE)
    kept.setflags(write=False)
    return AnimalsEnumeration(programs=programs, patterns=kept, syntactic_count=patterns.shape[0])


# ---------------------------------------------------------------------------
# Encodings and identifiers
# ---------------------------------------------------------------------------


def production_sequence(p: AnimalsProgram) -> tuple[int, ...]:
    """Expansion indices in rule order; single-expansion rules are 0."""
    return (
        0,
        0,
        p.left,
        p.right,
        p.top,
        p.bottom,
        p.thickness - 1,
        OUTER_CHOICES.index(p.outer),
        INNER_CHOICES.index(p.inner),
        0,
        A1_CHOICES.index(p.a1),
        A2_CHOICES.index(p.a2),
    )


def encode_program(p: AnimalsProgram) -> np.ndarray:
    """One-hot production-rule encoding (84 dims)."""
    return ANIMALS_GRAMMAR.encode(production_sequence(p))


def program_to_id(p: AnimalsProgram) -> str:
    return (
        f"box {p.left} {p.right} {p.top} {p.bottom} {p.thickness} "
        f"{p.outer} {p.inner} {p.a1} {p.a2}"
    )


def program_from_id(program_id: str) -> AnimalsProgram:
    parts = program_id.split(" ")
    if len(parts) != 10 or parts[0] != "box":
        raise MalformedProgramError(f"bad program id {program_id!r}")
    try:
        left, right, top, bottom, th = (int(v) for v in parts[1:6])
    except ValueError:
        raise MalformedProgramError(f"non-integer geometry in {program_id!r}") from None
    return AnimalsProgram(
        left=left,
        right=right,
        top=top,
        bottom=bottom,
        thickness=th,
        outer=parts[6],
        inner=parts[7],
        a1=parts[8],
        a2=parts[9],
    )


def utterance_ids() -> list[str]:
    """All 343 single-square reveals as "x:y:token"."""
    return [
        f"{x}:{y}:{tok}"
        for x in range(GRID_SIZE)
        for y in range(GRID_SIZE)
        for tok in CELL_TOKENS
    ]


def build_animals_lexicon(enumeration: AnimalsEnumeration) -> Lexicon:
    """343 reveals x semantic classes; entry = the reveal shows that cell."""
    flat = enumeration.patterns.reshape(len(enumeration.programs), -1)
    rows = []
    for x in range(GRID_SIZE):
        for y in range(GRID_SIZE):
            cell = flat[:, y * GRID_SIZE + x]
            for code in range(len(CELL_TOKENS)):
                rows.append(cell == code)
    matrix = np.asarray(rows)
    ids = [program_to_id(p) for p in enumeration.programs]
    return build_lexicon(utterance_ids(), ids, matrix)


# ---------------------------------------------------------------------------
# Pattern text form (7 lines of 7 tokens)
# ---------------------------------------------------------------------------


def pattern_to_text(grid: np.ndarray) -> str:
    lines = [" ".join(CELL_TOKENS[code] for code in row) for row in grid]
    return "\n".join(lines) + "\n"


def pattern_from_text(text: str) -> np.ndarray:
    lines = [line for line in text.split("\n") if line]
    if len(lines) != GRID_SIZE:
        raise ParseError(f"expected {GRID_SIZE} pattern rows, found {len(lines)}")
    grid = np.zeros((GRID_SIZE, GRID_SIZE), dtype=np.int8)
    for y, line in enumerate(lines):
        tokens = line.split(" ")
        if len(tokens) != GRID_SIZE:
            raise ParseError(f"expected {GRID_SIZE} tokens, found {len(tokens)}", line=y + 1)
        for x, tok in enumerate(tokens):
            if tok not in CELL_TOKENS:
                raise ParseError(f"unknown cell token {tok!r}", line=y + 1)
            grid[y, x] = CELL_TOKENS.index(tok)
    return grid
