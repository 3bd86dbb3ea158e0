"""Ready-to-serve domain bundles: lexicon, prior, and a distilled ranking.

A bundle is everything a ranked listener (or the HTTP service) needs for one
domain.  The toy and regex-small bundles distill their ranking by annealing
a simulated dataset; the two large domains extract it directly from the
depth-1 chain normalizers, which is exact for the single-utterance listener
and costs one matrix pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .annealing import anneal_ranking
from .dataset import generate_dataset
from .domains import animals, regex
from .lexicon import Lexicon, build_lexicon
from .ranking import GlobalRanking, extract_ranking_from_chain
from .rsa import iter_chain_log
from .scorer import ANIMALS_GRAMMAR, ProductionGrammar, regex_grammar

__all__ = ["DomainBundle", "get_bundle", "build_bundle", "BUNDLE_NAMES", "clear_bundle_cache"]

BUNDLE_NAMES = ("toy", "regex-small", "regex-large", "animals")

TOY_UTTERANCES = ("0", "00", "01", "001")
TOY_HYPOTHESES = ("0{1}", "0+1{1}", "0{2}1+", "0+1*")


@dataclass
class DomainBundle:
    name: str
    kind: str  # "regex" | "grid"
    lex: Lexicon
    prior: np.ndarray
    sigma: GlobalRanking
    grammar: ProductionGrammar | None = None
    encodings: np.ndarray | None = None
    patterns: np.ndarray | None = None  # grid domains only
    meta: dict = field(default_factory=dict)

    def render(self, program_id: str) -> dict:
        """Client-facing rendering of one program."""
        if self.kind == "regex":
            return {"kind": "regex", "source": program_id}
        w = self.lex.hypothesis_index(program_id)
        rows = [
            [animals.CELL_TOKENS[code] for code in row]
            for row in self.patterns[w]
        ]
        return {"kind": "grid", "rows": rows}


def _chain_sigma(lex: Lexicon) -> GlobalRanking:
    for _, _, nv in iter_chain_log(lex, None, 1):
        return extract_ranking_from_chain(nv, 1, lex.hypotheses)


def _annealed_sigma(lex: Lexicon, N: int = 3, seed: int = 0) -> GlobalRanking:
    records = generate_dataset(lex, N=N)
    return anneal_ranking(records, lex.n, rng_seed=seed, hypothesis_ids=lex.hypotheses)


def _toy_bundle() -> DomainBundle:
    programs = [regex.parse_regex(src) for src in TOY_HYPOTHESES]
    matrix = regex.behavior_matrix(programs, TOY_UTTERANCES).T
    lex = build_lexicon(list(TOY_UTTERANCES), list(TOY_HYPOTHESES), matrix)
    prior = np.full(lex.n, 1.0 / lex.n)
    return DomainBundle(
        name="toy",
        kind="regex",
        lex=lex,
        prior=prior,
        sigma=_annealed_sigma(lex),
        meta={"sigma_source": "anneal"},
    )


def _regex_bundle(name: str, config: regex.GrammarConfig, annealed: bool) -> DomainBundle:
    syntactic = regex.enumerate_syntactic(config)
    strings = regex.sample_strings(syntactic, count=2000, L_max=config.L_max)
    programs = regex.enumerate_regexes(config, strings)
    lex = regex.build_regex_lexicon(programs, strings)
    prior = np.full(lex.n, 1.0 / lex.n)
    sigma = _annealed_sigma(lex) if annealed else _chain_sigma(lex)
    grammar = regex_grammar(config.max_factors, len(config.quantifiers))
    encodings = grammar.encode_many(regex.production_sequences(programs, config))
    return DomainBundle(
        name=name,
        kind="regex",
        lex=lex,
        prior=prior,
        sigma=sigma,
        grammar=grammar,
        encodings=encodings,
        meta={
            "sigma_source": "anneal" if annealed else "chain",
            "syntactic_count": len(syntactic),
            "semantic_count": len(programs),
        },
    )


def _animals_bundle() -> DomainBundle:
    enum = animals.enumerate_animals()
    lex = animals.build_animals_lexicon(enum)
    prior = np.full(lex.n, 1.0 / lex.n)
    encodings = ANIMALS_GRAMMAR.encode_many(
        [animals.production_sequence(p) for p in enum.programs]
    )
    return DomainBundle(
        name="animals",
        kind="grid",
        lex=lex,
        prior=prior,
        sigma=_chain_sigma(lex),
        grammar=ANIMALS_GRAMMAR,
        encodings=encodings,
        patterns=enum.patterns,
        meta={
            "sigma_source": "chain",
            "syntactic_count": enum.syntactic_count,
            "semantic_count": enum.semantic_count,
        },
    )


def build_bundle(name: str) -> DomainBundle:
    if name == "toy":
        return _toy_bundle()
    if name == "regex-small":
        return _regex_bundle(name, regex.SMALL_GRAMMAR, annealed=True)
    if name == "regex-large":
        return _regex_bundle(name, regex.LARGE_GRAMMAR, annealed=False)
    if name == "animals":
        return _animals_bundle()
    raise ValueError(f"unknown domain {name!r}; available: {', '.join(BUNDLE_NAMES)}")


_CACHE: dict[str, DomainBundle] = {}


def get_bundle(name: str) -> DomainBundle:
    """Build once per process; bundles are immutable and safely shared."""
    if name not in _CACHE:
        _CACHE[name] = build_bundle(name)
    return _CACHE[name]


def clear_bundle_cache() -> None:
    _CACHE.clear()
