"""Small input-validation helpers shared by the public entry points."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError


def check_prior(prior, n: int) -> np.ndarray:
    """Return a validated length-n probability vector (uniform if None)."""
    if prior is None:
        return np.full(n, 1.0 / n)
    p = np.asarray(prior, dtype=np.float64)
    if p.shape != (n,):
        raise DimensionMismatchError(f"prior has shape {p.shape}, expected ({n},)")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("prior entries must be finite and nonnegative")
    total = p.sum()
    if not np.isclose(total, 1.0, atol=1e-12, rtol=0):
        raise ValueError(f"prior sums to {total!r}, expected 1 within 1e-12")
    return p


def check_utterance_indices(us: Sequence[int], m: int) -> tuple[int, ...]:
    """Validate a (possibly empty) sequence of utterance indices."""
    out = []
    for u in us:
        iu = int(u)
        if not 0 <= iu < m:
            raise IndexError(f"utterance index {u} out of range [0, {m})")
        out.append(iu)
    return tuple(out)


def check_positive_int(value: int, name: str, minimum: int = 1) -> int:
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value
