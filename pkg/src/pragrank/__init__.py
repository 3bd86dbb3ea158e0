"""Pragmatic program ranking: RSA listeners and their global-ranking distillations.

The package follows one pipeline: a boolean lexicon relates utterances to
hypotheses; listener chains refine a literal listener into pragmatic ones;
the chain's normalizers (or an annealed / learned stand-in) collapse into a
single global ranking that answers queries at filter-and-sort speed.
"""

from . import bundles, domains, harness
from .annealing import AnnealedRankingDistiller, anneal_ranking
from .dataset import (
    CycleReport,
    RankingRecord,
    cycle_report,
    generate_dataset,
    load_dataset,
    save_dataset,
)
from .errors import (
    CoverageImpossibleError,
    DegenerateDataError,
    DepthTooShallowError,
    DimensionMismatchError,
    EmptyColumnError,
    EmptyRowError,
    InconsistentTargetError,
    LexiconError,
    MalformedProgramError,
    NoConsistentProgramError,
    NonConvergenceWarning,
    NumericalUnderflowError,
    ParseError,
    PragrankError,
    SamplingExhaustedError,
    SpeakerStuckError,
)
from .lexicon import (
    Lexicon,
    build_lexicon,
    consistent_set,
    load_lexicon,
    sample_random_lexicon,
    save_lexicon,
)
from .ranking import (
    GlobalRanking,
    check_global_ranking,
    extract_ranking_from_chain,
    load_ranking,
    rank_listener,
    save_ranking,
)
from .rsa import (
    IncrementalEngine,
    ListenerMatrix,
    NormalizationVectors,
    SpeakerMatrix,
    factorized_listener,
    incremental_pragmatic_listener,
    incremental_speaker,
    iter_chain_log,
    literal_listener,
    rsa_chain,
    speaker_from_listener,
)
from .scorer import (
    ANIMALS_GRAMMAR,
    Ensemble,
    NeuralRankingDistiller,
    ProductionGrammar,
    ScorerConfig,
    ensemble_rank_listener,
    load_ensemble,
    pairwise_loss,
    pairwise_loss_grad,
    regex_grammar,
    save_ensemble,
    train_scorer,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealedRankingDistiller",
    "ANIMALS_GRAMMAR",
    "CoverageImpossibleError",
    "CycleReport",
    "DegenerateDataError",
    "DepthTooShallowError",
    "DimensionMismatchError",
    "EmptyColumnError",
    "EmptyRowError",
    "Ensemble",
    "GlobalRanking",
    "IncrementalEngine",
    "InconsistentTargetError",
    "Lexicon",
    "LexiconError",
    "ListenerMatrix",
    "MalformedProgramError",
    "NeuralRankingDistiller",
    "NoConsistentProgramError",
    "NonConvergenceWarning",
    "NormalizationVectors",
    "NumericalUnderflowError",
    "ParseError",
    "PragrankError",
    "ProductionGrammar",
    "RankingRecord",
    "SamplingExhaustedError",
    "ScorerConfig",
    "SpeakerMatrix",
    "SpeakerStuckError",
    "anneal_ranking",
    "build_lexicon",
    "bundles",
    "check_global_ranking",
    "consistent_set",
    "cycle_report",
    "domains",
    "ensemble_rank_listener",
    "extract_ranking_from_chain",
    "factorized_listener",
    "generate_dataset",
    "harness",
    "incremental_pragmatic_listener",
    "incremental_speaker",
    "iter_chain_log",
    "literal_listener",
    "load_dataset",
    "load_ensemble",
    "load_lexicon",
    "load_ranking",
    "pairwise_loss",
    "pairwise_loss_grad",
    "rank_listener",
    "regex_grammar",
    "rsa_chain",
    "sample_random_lexicon",
    "save_dataset",
    "save_ensemble",
    "save_lexicon",
    "save_ranking",
    "speaker_from_listener",
    "train_scorer",
]
