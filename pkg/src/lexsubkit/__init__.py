"""Toolkit for lexical substitution pipelines.

Generates and re-ranks substitutes for a target word in context by fusing
context-based substitute distributions with target-similarity distributions,
evaluates rankings (GAP, P@k, R@k), clusters substitute documents for word
sense induction, and profiles target/substitute semantic relations against
a WordNet-style lexicon.

Neural models are external: they communicate with the toolkit through the
binary interchange formats in :mod:`lexsubkit.interchange`.
"""

from lexsubkit.interchange import (
    EmbeddingTable,
    RankedSubstitutes,
    SubstituteDistribution,
    TargetedExample,
    Vocabulary,
    WordPrior,
)

__version__ = "0.1.0"

__all__ = [
    "EmbeddingTable",
    "RankedSubstitutes",
    "SubstituteDistribution",
    "TargetedExample",
    "Vocabulary",
    "WordPrior",
    "__version__",
]
