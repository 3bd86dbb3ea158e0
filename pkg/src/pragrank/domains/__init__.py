"""Concrete reference-game domains: binary regexes and grid patterns."""

from . import animals, regex

__all__ = ["animals", "regex"]
