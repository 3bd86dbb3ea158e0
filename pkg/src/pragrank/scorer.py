"""Learned example-agnostic program scorer distilled from ranking datasets.

Programs are encoded as one-hot production-rule choices, scored by a small
MLP trained on pairwise preferences sampled from partial rankings, and
ensembled.  The net is tiny (~38k parameters), so the forward pass, the
backward pass, and the Adam update are written out here over numpy arrays
rather than pulling in an ML framework.
"""

from __future__ import annotations

import copy
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import RankingRecord
from .errors import DegenerateDataError, MalformedProgramError, ParseError
from .lexicon import Lexicon
from .ranking import GlobalRanking, rank_listener

__all__ = [
    "ProductionGrammar",
    "ANIMALS_GRAMMAR",
    "regex_grammar",
    "pairwise_loss",
    "pairwise_loss_grad",
    "ScoreNet",
    "ScorerConfig",
    "TrainedNet",
    "Ensemble",
    "train_scorer",
    "ensemble_rank_listener",
    "NeuralRankingDistiller",
    "save_ensemble",
    "load_ensemble",
]

_PROB_FLOOR = 1e-12  # clamp inside the log; keeps reported losses finite


# ---------------------------------------------------------------------------
# Program encodings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductionGrammar:
    """Fixed-width one-hot encoding of production-rule choices.

    Every rule occupies one row of `width = max(expansions)` slots; a program
    is a sequence of expansion indices, one per rule.  Rules with a single
    expansion always use index 0, so each row carries exactly one 1 and the
    encoding is injective over distinct sequences.
    """

    rules: tuple[tuple[str, int], ...]

    @property
    def width(self) -> int:
        return max(count for _, count in self.rules)

    @property
    def dim(self) -> int:
        return len(self.rules) * self.width

    def encode(self, sequence: Sequence[int]) -> np.ndarray:
        if len(sequence) != len(self.rules):
            raise MalformedProgramError(
                f"expected {len(self.rules)} production choices, got {len(sequence)}"
            )
        vec = np.zeros(self.dim)
        width = self.width
        for row, ((name, count), choice) in enumerate(zip(self.rules, sequence)):
            c = int(choice)
            if not 0 <= c < count:
                raise MalformedProgramError(f"rule {name}: choice {choice} outside 0..{count - 1}")
            vec[row * width + c] = 1.0
        return vec

    def encode_many(self, sequences: Sequence[Sequence[int]]) -> np.ndarray:
        return np.stack([self.encode(seq) for seq in sequences])


# The grid-pattern DSL: 12 rules, widest rule has 7 expansions -> 84 dims.
ANIMALS_GRAMMAR = ProductionGrammar(
    (
        ("Program", 1),
        ("Shape", 1),
        ("Left", 7),
        ("Right", 7),
        ("Top", 7),
        ("Bottom", 7),
        ("Thickness", 3),
        ("Outside", 2),
        ("Inside", 3),
        ("Colour", 1),
        ("A1", 3),
        ("A2", 6),
    )
)


def regex_grammar(max_factors: int, n_quantifiers: int) -> ProductionGrammar:
    """Same encoding scheme for the regex grammar, different dimensions.

    One arity rule plus (atom, quantifier) rules per factor slot; slots
    beyond a program's arity are encoded at index 0.
    """
    rules: list[tuple[str, int]] = [("Factors", max_factors)]
    for k in range(1, max_factors + 1):
        rules.append((f"Atom{k}", 2))
        rules.append((f"Quant{k}", n_quantifiers))
    return ProductionGrammar(tuple(rules))


# ---------------------------------------------------------------------------
# Pairwise preference loss
# ---------------------------------------------------------------------------


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def pairwise_loss(s_preferred: float, s_other: float) -> float:
    """-log sigmoid(score gap): strictly decreasing in the gap.

    The probability inside the log is clamped at 1e-12 so the reported loss
    stays finite for arbitrarily wrong score gaps.
    """
    p = _sigmoid(np.asarray([s_preferred - s_other], dtype=np.float64))[0]
    return float(-np.log(max(p, _PROB_FLOOR)))


def pairwise_loss_grad(s_preferred: float, s_other: float) -> tuple[float, float]:
    """d loss / d (s_preferred, s_other); the exact (unclamped) gradient."""
    p = _sigmoid(np.asarray([s_preferred - s_other], dtype=np.float64))[0]
    return float(-(1.0 - p)), float(1.0 - p)


# ---------------------------------------------------------------------------
# The score network
# ---------------------------------------------------------------------------


class ScoreNet:
    """input -> 3 rectified hidden layers of `hidden` units -> scalar score."""

    def __init__(self, dim: int, hidden: int = 128, rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        sizes = [dim, hidden, hidden, hidden, 1]
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            self.weights.append(rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in))
            self.biases.append(np.zeros(fan_out))

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def parameters(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def scores(self, X: np.ndarray) -> np.ndarray:
        h = X
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
        return (h @ self.weights[-1] + self.biases[-1]).ravel()

    def _forward(self, X: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        acts = [X]
        h = X
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
            acts.append(h)
        return (h @ self.weights[-1] + self.biases[-1]).ravel(), acts

    def _backward(self, acts: list[np.ndarray], d_scores: np.ndarray) -> list[np.ndarray]:
        """Gradients in the same flat order as parameters()."""
        grads: list[np.ndarray] = [None] * (2 * len(self.weights))
        delta = d_scores[:, None]
        for layer in range(len(self.weights) - 1, -1, -1):
            grads[2 * layer] = acts[layer].T @ delta
            grads[2 * layer + 1] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.weights[layer].T) * (acts[layer] > 0)
        return grads


class _Adam:
    def __init__(self, params: list[np.ndarray], lr: float, beta1: float, beta2: float, eps: float):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        correct1 = 1.0 - self.beta1**self.t
        correct2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / correct1) / (np.sqrt(v / correct2) + self.eps)


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass
class ScorerConfig:
    hidden: int = 128
    epochs: int = 20
    batch_size: int = 32
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    n_nets: int = 10
    seed: int = 0


@dataclass
class TrainedNet:
    net: ScoreNet
    mean: float
    std: float
    val_accuracy: float
    best_epoch: int

    def normalized_scores(self, X: np.ndarray) -> np.ndarray:
        return (self.net.scores(X) - self.mean) / self.std


@dataclass
class Ensemble:
    nets: list[TrainedNet]
    meta: dict = field(default_factory=dict)

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Mean of per-net normalized scores."""
        return np.mean([tn.normalized_scores(X) for tn in self.nets], axis=0)

    def to_ranking(self, X_all: np.ndarray, hypothesis_ids: Sequence[str] | None = None) -> GlobalRanking:
        ids = list(hypothesis_ids) if hypothesis_ids is not None else None
        return GlobalRanking(self.scores(X_all), ids, meta={"kind": "neural", **self.meta})


def _synthesis_accuracy(scores_all: np.ndarray, records: Sequence[RankingRecord]) -> float:
    """Fraction of records whose score-ranked top-1 equals the target.

    Candidates are the record's consistent set (its partial ranking); ties
    resolve to the lowest hypothesis index, matching the rank listener.
    """
    if len(records) == 0:
        return 0.0
    hits = 0
    for rec in records:
        cand = np.fromiter(rec.ranking, dtype=np.int64, count=len(rec.ranking))
        s = scores_all[cand]
        pred = int(cand[s >= s.max()].min())
        hits += pred == rec.target
    return hits / len(records)


def _sample_pair(rng: np.random.Generator, size: int) -> tuple[int, int]:
    i = int(rng.integers(size))
    j = int(rng.integers(size - 1))
    if j >= i:
        j += 1
    return (i, j) if i < j else (j, i)


def _train_single_net(
    encodings: np.ndarray,
    train_records: Sequence[RankingRecord],
    val_records: Sequence[RankingRecord],
    val_targets: np.ndarray,
    config: ScorerConfig,
    seed_seq: np.random.SeedSequence,
) -> TrainedNet:
    rng = np.random.default_rng(seed_seq)
    net = ScoreNet(encodings.shape[1], hidden=config.hidden, rng=rng)
    params = net.parameters()
    adam = _Adam(params, config.lr, config.beta1, config.beta2, config.eps)
    usable = [rec for rec in train_records if len(rec.ranking) >= 2]

    best_acc = -1.0
    best_epoch = -1
    best_params: list[np.ndarray] | None = None
    for epoch in range(config.epochs):
        order = rng.permutation(len(usable))
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            top_idx = np.empty(len(batch), dtype=np.int64)
            bot_idx = np.empty(len(batch), dtype=np.int64)
            for row, rec_i in enumerate(batch):
                ranking = usable[rec_i].ranking
                i, j = _sample_pair(rng, len(ranking))
                top_idx[row] = ranking[i]
                bot_idx[row] = ranking[j]
            X1 = encodings[top_idx]
            X2 = encodings[bot_idx]
            s1, acts1 = net._forward(X1)
            s2, acts2 = net._forward(X2)
            p = _sigmoid(s1 - s2)
            d_gap = -(1.0 - p) / len(batch)
            grads1 = net._backward(acts1, d_gap)
            grads2 = net._backward(acts2, -d_gap)
            grads = [g1 + g2 for g1, g2 in zip(grads1, grads2)]
            adam.step(params, grads)
        acc = _synthesis_accuracy(net.scores(encodings), val_records)
        if acc > best_acc:
            best_acc = acc
            best_epoch = epoch
            best_params = [p.copy() for p in params]
    if best_params is not None:
        for p, bp in zip(params, best_params):
            p[...] = bp
    val_scores = net.scores(encodings[val_targets])
    mean = float(val_scores.mean())
    std = float(val_scores.std())
    if std < 1e-12:
        std = 1.0
    return TrainedNet(net=net, mean=mean, std=std, val_accuracy=best_acc, best_epoch=best_epoch)


def train_scorer(
    D_train: Sequence[RankingRecord],
    D_val: Sequence[RankingRecord],
    encodings: np.ndarray,
    config: ScorerConfig | None = None,
) -> Ensemble:
    """Train the ensemble on pairwise preferences from D_train.

    One pair is sampled per record visit; an epoch presents every usable
    record once.  Model selection per net is by synthesis accuracy on D_val
    (whose target programs should be disjoint from D_train's); per-net score
    normalization is fit on the validation targets.  Deterministic given
    `config.seed`.
    """
    config = config or ScorerConfig()
    if not any(len(rec.ranking) >= 2 for rec in D_train):
        raise DegenerateDataError("no training record ranks two or more programs")
    val_targets = np.unique(np.fromiter((rec.target for rec in D_val), dtype=np.int64, count=len(D_val)))
    if val_targets.size == 0:
        raise DegenerateDataError("empty validation dataset")
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_nets)
    nets = [
        _train_single_net(encodings, D_train, D_val, val_targets, config, seed)
        for seed in seeds
    ]
    return Ensemble(nets=nets, meta={"n_nets": config.n_nets, "seed": config.seed})


def ensemble_rank_listener(
    ensemble: Ensemble,
    lex: Lexicon,
    X_all: np.ndarray,
    us: Sequence[int],
    k: int | None = 1,
) -> list[tuple[int, float]]:
    """Rank-listener contract with sigma = ensemble scores.

    The score vector is computed once per (ensemble, lexicon) and cached as a
    GlobalRanking, so queries cost the same as any rank listener.
    """
    cached = getattr(ensemble, "_sigma_cache", None)
    if cached is None or cached[0] is not lex:
        sigma = ensemble.to_ranking(X_all, lex.hypotheses)
        ensemble._sigma_cache = (lex, sigma)
    else:
        sigma = cached[1]
    return rank_listener(sigma, lex, us, k)


class NeuralRankingDistiller:
    """Estimator-style wrapper: fit(D_train, D_val, encodings, ids)."""

    def __init__(self, **config_kwargs):
        self.config = ScorerConfig(**config_kwargs)

    def get_params(self) -> dict:
        return dict(self.config.__dict__)

    def fit(
        self,
        D_train: Sequence[RankingRecord],
        D_val: Sequence[RankingRecord],
        encodings: np.ndarray,
        hypothesis_ids: Sequence[str] | None = None,
    ) -> "NeuralRankingDistiller":
        self.ensemble_ = train_scorer(D_train, D_val, encodings, self.config)
        self.ranking_ = self.ensemble_.to_ranking(encodings, hypothesis_ids)
        return self


# ---------------------------------------------------------------------------
# Model file: versioned binary of layer shapes + parameters + normalization
# ---------------------------------------------------------------------------

_MODEL_MAGIC = b"PRAGNET v1\n"


def save_ensemble(ensemble: Ensemble, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MODEL_MAGIC)
        sizes = ensemble.nets[0].net.layer_sizes
        fh.write(struct.pack("<II", len(ensemble.nets), len(sizes)))
        fh.write(struct.pack(f"<{len(sizes)}I", *sizes))
        for tn in ensemble.nets:
            if tn.net.layer_sizes != sizes:
                raise ValueError("ensemble members disagree on layer sizes")
            for w, b in zip(tn.net.weights, tn.net.biases):
                fh.write(np.ascontiguousarray(w).tobytes())
                fh.write(np.ascontiguousarray(b).tobytes())
            fh.write(struct.pack("<dd", tn.mean, tn.std))


def load_ensemble(path) -> Ensemble:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MODEL_MAGIC))
        if magic != _MODEL_MAGIC:
            raise ParseError(f"not a model file (magic {magic!r})")

        def take(n: int) -> bytes:
            data = fh.read(n)
            if len(data) != n:
                raise ParseError("model file truncated")
            return data

        n_nets, n_sizes = struct.unpack("<II", take(8))
        sizes = list(struct.unpack(f"<{n_sizes}I", take(4 * n_sizes)))
        nets: list[TrainedNet] = []
        for _ in range(n_nets):
            net = ScoreNet.__new__(ScoreNet)
            net.weights = []
            net.biases = []
            for fan_in, fan_out in zip(sizes, sizes[1:]):
                w = np.frombuffer(take(8 * fan_in * fan_out)).reshape(fan_in, fan_out).copy()
                b = np.frombuffer(take(8 * fan_out)).copy()
                net.weights.append(w)
                net.biases.append(b)
            mean, std = struct.unpack("<dd", take(16))
            nets.append(TrainedNet(net=net, mean=mean, std=std, val_accuracy=float("nan"), best_epoch=-1))
        return Ensemble(nets=nets, meta={"loaded": True})
