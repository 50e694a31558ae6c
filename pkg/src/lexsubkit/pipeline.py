"""Composition of estimator, distribution fusion and post-processing.

A :class:`RankerPipeline` is the single object the evaluation, sense
induction and report commands consume: it turns a
:class:`~lexsubkit.interchange.TargetedExample` into a post-processed
substitute ranking, optionally fusing the context distribution with the
target-similarity distribution first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

from lexsubkit.errors import LexsubError
from lexsubkit.estimators import FileEstimator, _target_row
from lexsubkit.injection import FusionConfig, bcomb, fuse_embs, target_similarity
from lexsubkit.interchange import (
    EmbeddingTable,
    RankedSubstitutes,
    SubstituteDistribution,
    TargetedExample,
    WordPrior,
)
from lexsubkit.postproc import Lemmatizer, postprocess

ContextSource = Callable[
    [TargetedExample], Union[SubstituteDistribution, RankedSubstitutes]
]


@dataclass
class RankerPipeline:
    """Ranks substitutes for examples; deterministic given its inputs."""

    context: ContextSource
    lemmatizer: Lemmatizer
    injection: str = "none"  # none | embs
    embeddings: EmbeddingTable | None = None
    prior: WordPrior = field(default_factory=WordPrior.neutral)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    exclude_target: bool = True  # ablation switch; keep on for evaluation

    def __post_init__(self):
        if self.injection not in ("none", "embs"):
            raise ValueError(f"unknown injection {self.injection!r}")
        if self.injection == "embs" and self.embeddings is None:
            raise ValueError("embs injection needs an embedding table")

    def fused(self, example: TargetedExample) -> SubstituteDistribution:
        """The (possibly fused) distribution before post-processing."""
        estimate = self.context(example)
        if isinstance(estimate, RankedSubstitutes):
            raise LexsubError(
                f"instance {example.id}: context source yields rankings only; "
                "distribution fusion needs full distributions"
            )
        if self.injection == "none":
            return estimate.normalize()
        p_target = target_similarity(
            self.embeddings, _target_word(example, self.embeddings), self.fusion
        )
        return fuse_embs(estimate, p_target, self.prior, self.fusion.beta)

    def rank(self, example: TargetedExample) -> RankedSubstitutes:
        """Post-processed ranking: lemmas, duplicates collapsed, target out."""
        estimate = self.context(example)
        if isinstance(estimate, RankedSubstitutes):
            if self.injection != "none":
                raise LexsubError(
                    f"instance {example.id}: context source yields rankings "
                    "only; distribution fusion needs full distributions"
                )
            raw = estimate
        else:
            raw = self.fused(example).ranked()
        target = example.target_lemma if self.exclude_target else None
        return postprocess(raw, target, example.pos, self.lemmatizer)


def _target_word(example: TargetedExample, emb: EmbeddingTable) -> str:
    _target_row(example, emb)  # raises OutOfVocabularyError when absent
    if example.target_surface in emb.vocab:
        return example.target_surface
    return example.target_lemma


def bcomb_source(
    left: FileEstimator,
    right: FileEstimator,
    prior: WordPrior,
    gamma: float,
    variant: str | None = None,
) -> ContextSource:
    """Combine per-example left/right context distributions."""

    def source(example: TargetedExample) -> SubstituteDistribution:
        return bcomb(
            left.estimate(example, variant),
            right.estimate(example, variant),
            prior,
            gamma,
        )

    return source
