"""Target-word injection: input transforms and distribution fusion.

Two families of target injection are implemented.  Input-side transforms
rewrite the token sequence before a model scores it (the ``and``-pattern and
the duplicated sentence).  Distribution-side fusion combines a context-based
distribution P(s|C) with a target-similarity distribution P(s|T), divided by
a word-prior penalty::

    fused(s)  proportional to  P(s|C) * P(s|T) / P(s)^beta

with ``P(s|T) proportional to exp(sim(emb_s, emb_T) / temperature)``.  With
beta = 1 and a true unigram prior this is the exact posterior under
conditional independence of context and target given the substitute.  The
left/right combination used for bidirectional LMs follows the same shape
with exponent gamma::

    combined(s)  proportional to  P(s|L) * P(s|R) / P(s)^gamma

Everything runs in the natural-log domain with log-sum-exp normalization;
low temperatures produce logits far outside float range in linear space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
import numpy as np

from lexsubkit.errors import FileFormatError, OutOfVocabularyError
from lexsubkit.interchange import (
    EmbeddingTable,
    SubstituteDistribution,
    TargetedExample,
    Vocabulary,
    WordPrior,
    _same_vocab,
    log_sum_exp,
)

#: Token marking the position an external model must predict at.
PREDICTION_SLOT = "____"

PATTERNS = ("none", "and", "duplicate")


def apply_pattern(
    example: TargetedExample, pattern: str, separator: str | None = None
) -> tuple[list[str], int]:
    """Rewrite the example for one injection pattern.

    Returns the new token list and the position to predict at.

    * ``none`` -- the original tokens; predict at the target itself.
    * ``and`` -- the target is replaced by ``T and ____``.
    * ``duplicate`` -- the sentence is repeated with the target hidden in
      the copy; ``separator`` (e.g. a model's separator token) is inserted
      between the copies when given.
    """
    left, right = list(example.left), list(example.right)
    if pattern == "none":
        return list(example.tokens), example.target_index
    if pattern == "and":
        tokens = left + [example.target_surface, "and", PREDICTION_SLOT] + right
        return tokens, len(left) + 2
    if pattern == "duplicate":
        first = list(example.tokens)
        if separator is not None:
            first.append(separator)
        tokens = first + left + [PREDICTION_SLOT] + right
        return tokens, len(first) + len(left)
    raise ValueError(f"unknown pattern {pattern!r}")


@dataclass(frozen=True)
class FusionConfig:
    """Hyperparameters of the target-similarity fusion."""

    temperature: float = 1.0
    beta: float = 0.0
    similarity: str = "dot"  # dot | cosine
    target_visibility: str = "original"  # original | masked

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.similarity not in ("dot", "cosine"):
            raise ValueError(f"unknown similarity {self.similarity!r}")
        if self.target_visibility not in ("original", "masked"):
            raise ValueError(f"unknown visibility {self.target_visibility!r}")


@dataclass(frozen=True)
class BCombConfig:
    gamma: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError("gamma must be finite and non-negative")


@dataclass(frozen=True)
class ZipfPriorConfig:
    """Rank-based prior P(rank r) proportional to 1 / (r + offset)^exponent."""

    exponent: float = 1.0
    offset: float = 2.7

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("exponent must be positive")
        if self.offset < 0:
            raise ValueError("offset must be non-negative")


def target_similarity(
    emb: EmbeddingTable, target_word: str, cfg: FusionConfig
) -> SubstituteDistribution:
    """P(s|T) from embedding similarity under a temperature softmax."""
    if target_word not in emb.vocab:
        raise OutOfVocabularyError(f"target {target_word!r} not in embedding table")
    t = emb.row(target_word)
    if cfg.similarity == "dot":
        sims = emb.rows @ t
    else:
        norms = np.linalg.norm(emb.rows, axis=1)
        t_norm = np.linalg.norm(t)
        denom = norms * t_norm
        sims = np.divide(
            emb.rows @ t, denom, out=np.zeros(len(emb.vocab)), where=denom > 0
        )
    scores = sims / cfg.temperature
    return SubstituteDistribution(emb.vocab, scores - log_sum_exp(scores))


def fuse_embs(
    p_context: SubstituteDistribution,
    p_target: SubstituteDistribution,
    prior: WordPrior,
    beta: float,
) -> SubstituteDistribution:
    """Combine P(s|C) and P(s|T) with a prior penalty, in the log domain."""
    _same_vocab(p_context.vocab, p_target.vocab, "fuse_embs")
    scores = p_context.scores + p_target.scores
    if beta != 0.0:
        scores = scores - beta * prior.log_scores(p_context.vocab)
    return SubstituteDistribution(
        p_context.vocab, scores - log_sum_exp(scores), p_context.example_id
    )


def bcomb(
    p_left: SubstituteDistribution,
    p_right: SubstituteDistribution,
    prior: WordPrior,
    gamma: float,
) -> SubstituteDistribution:
    """Combine left-context and right-context distributions."""
    _same_vocab(p_left.vocab, p_right.vocab, "bcomb")
    scores = p_left.scores + p_right.scores
    if gamma != 0.0:
        scores = scores - gamma * prior.log_scores(p_left.vocab)
    return SubstituteDistribution(
        p_left.vocab, scores - log_sum_exp(scores), p_left.example_id
    )


def zipf_rank_prior(vocab: Vocabulary, cfg: ZipfPriorConfig) -> WordPrior:
    """Prior from vocabulary rank, for frequency-ordered vocabularies."""
    ranks = np.arange(1, len(vocab) + 1, dtype=np.float64)
    weights = (ranks + cfg.offset) ** -cfg.exponent
    probs = weights / weights.sum()
    return WordPrior(dict(zip(vocab.entries, probs)), floor=float(probs.min()))


# ---------------------------------------------------------------------------
# Model profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelProfile:
    """Per-backend defaults for fusion and left/right combination."""

    name: str
    fusion: FusionConfig
    gamma: float = 0.0  # left/right combination exponent (bidirectional LMs)


# Temperatures and penalties that work well per backend.  The ranking task
# and the sense-induction task want different operating points, hence two
# tables.  "stub", "ooc" and "npic" are the deterministic/baseline
# estimators and take neutral defaults.
LEXSUB_PROFILES: dict[str, ModelProfile] = {
    "bert": ModelProfile("bert", FusionConfig(temperature=0.1)),
    "xlnet": ModelProfile("xlnet", FusionConfig(temperature=0.1)),
    "elmo": ModelProfile("elmo", FusionConfig(temperature=0.1, beta=1.5), gamma=0.5),
    "roberta": ModelProfile(
        "roberta",
        FusionConfig(temperature=0.25, similarity="cosine", target_visibility="masked"),
    ),
    "c2v": ModelProfile("c2v", FusionConfig(temperature=1.0)),
    "stub": ModelProfile("stub", FusionConfig(temperature=1.0)),
    "ooc": ModelProfile("ooc", FusionConfig(temperature=1.0)),
    "npic": ModelProfile("npic", FusionConfig(temperature=1.0)),
}

WSI_PROFILES: dict[str, ModelProfile] = {
    "bert": ModelProfile("bert", FusionConfig(temperature=2.5, beta=2.0)),
    "xlnet": ModelProfile("xlnet", FusionConfig(temperature=1.0, beta=2.0)),
    "elmo": ModelProfile(
        "elmo", FusionConfig(temperature=0.385, beta=2.0), gamma=0.5
    ),
    "roberta": ModelProfile(
        "roberta",
        FusionConfig(
            temperature=10.0, beta=2.0, similarity="cosine", target_visibility="masked"
        ),
    ),
    "c2v": ModelProfile("c2v", FusionConfig(temperature=1.0)),
    "stub": ModelProfile("stub", FusionConfig(temperature=1.0)),
}


def load_profile(name: str, task: str = "lexsub") -> ModelProfile:
    table = LEXSUB_PROFILES if task == "lexsub" else WSI_PROFILES
    try:
        return table[name]
    except KeyError:
        raise KeyError(
            f"unknown profile {name!r} for task {task!r}; "
            f"choose from {sorted(table)}"
        ) from None


_CONFIG_KEYS = {
    "profile": str,
    "task": str,
    "temperature": float,
    "beta": float,
    "gamma": float,
    "similarity": str,
    "target_visibility": str,
    "prior": str,
}


def load_config_file(path) -> dict:
    """Read fusion settings from a JSON object or key=value lines."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
        if not isinstance(raw, dict):
            raise FileFormatError(f"{path}: expected a JSON object")
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FileFormatError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            raw[key.strip()] = value.strip()
    config = {}
    for key, value in raw.items():
        if key not in _CONFIG_KEYS:
            raise FileFormatError(f"{path}: unknown config key {key!r}")
        config[key] = _CONFIG_KEYS[key](value)
    return config


def resolve_fusion(
    profile: ModelProfile,
    temperature: float | None = None,
    beta: float | None = None,
    similarity: str | None = None,
    target_visibility: str | None = None,
) -> FusionConfig:
    """Profile defaults with explicit overrides applied on top."""
    cfg = profile.fusion
    if temperature is not None:
        cfg = replace(cfg, temperature=temperature)
    if beta is not None:
        cfg = replace(cfg, beta=beta)
    if similarity is not None:
        cfg = replace(cfg, similarity=similarity)
    if target_visibility is not None:
        cfg = replace(cfg, target_visibility=target_visibility)
    return cfg
