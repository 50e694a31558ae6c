"""Ranking metrics: generalized average precision and precision/recall at k.

Two evaluation regimes share these metrics.  In candidate ranking the system
orders a supplied per-lemma candidate list and is scored with GAP, which
credits rankings that place heavily-annotated substitutes first.  In
all-vocabulary ranking the system orders its entire vocabulary and is scored
with P@1, P@3 and R@10 against the gold substitutes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from lexsubkit.interchange import RankedSubstitutes, TargetedExample


def gap(ranking: Sequence[str], gold: Mapping[str, float]) -> float:
    """Generalized average precision of ``ranking`` against weighted gold.

    GAP = sum over gold positions i of (mean gold weight within the top i)
    normalized by the same sum for the ideal ranking (gold sorted by
    descending weight).  Items missing from gold contribute weight 0.
    """
    if not gold:
        raise ValueError("gold must be non-empty")
    if len(set(ranking)) != len(ranking):
        raise ValueError("ranking contains duplicates")

    def cumulative_precision_sum(weights: Sequence[float]) -> float:
        total = 0.0
        cumulative = 0.0
        for i, w in enumerate(weights, 1):
            cumulative += w
            if w > 0:
                total += cumulative / i
        return total

    numerator = cumulative_precision_sum([gold.get(x, 0.0) for x in ranking])
    ideal = sorted(gold.values(), reverse=True)
    denominator = cumulative_precision_sum(ideal)
    return numerator / denominator


def precision_at(
    ranked: Sequence[str], gold: Mapping[str, float] | set[str], k: int
) -> float:
    """Fraction of the top-k predictions that are gold substitutes."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not gold:
        raise ValueError("gold must be non-empty")
    hits = sum(1 for w in ranked[:k] if w in gold)
    return hits / k


def recall_at(
    ranked: Sequence[str], gold: Mapping[str, float] | set[str], k: int
) -> float:
    """Fraction of gold substitutes found in the top-k predictions."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not gold:
        raise ValueError("gold must be non-empty")
    top = set(ranked[:k])
    hits = sum(1 for w in gold if w in top)
    return hits / len(gold)


@dataclass(frozen=True)
class InstanceScore:
    gap: float | None = None
    p1: float | None = None
    p3: float | None = None
    r10: float | None = None


@dataclass
class EvaluationResult:
    """Instance scores plus their means, one row of an evaluation report."""

    mode: str
    per_instance: dict[str, InstanceScore] = field(default_factory=dict)

    def _mean(self, attr: str) -> float | None:
        values = [
            getattr(s, attr)
            for s in self.per_instance.values()
            if getattr(s, attr) is not None
        ]
        return sum(values) / len(values) if values else None

    @property
    def n(self) -> int:
        return len(self.per_instance)

    @property
    def gap(self) -> float | None:
        return self._mean("gap")

    @property
    def p1(self) -> float | None:
        return self._mean("p1")

    @property
    def p3(self) -> float | None:
        return self._mean("p3")

    @property
    def r10(self) -> float | None:
        return self._mean("r10")

    def as_row(self) -> dict[str, float | int | None]:
        return {
            "n": self.n,
            "gap": self.gap,
            "p@1": self.p1,
            "p@3": self.p3,
            "r@10": self.r10,
        }


def rank_candidates(
    candidates: Sequence[str], scores: Mapping[str, float]
) -> list[str]:
    """Order a candidate list by looked-up scores.

    Candidates absent from ``scores`` sort last, alphabetically; present
    candidates tie-break alphabetically as well.
    """
    return sorted(candidates, key=lambda w: (-scores.get(w, -math.inf), w))


def evaluate(
    examples: Sequence[TargetedExample],
    ranker: Callable[[TargetedExample], RankedSubstitutes],
    mode: str,
    candidates: Mapping[tuple[str, str], Sequence[str]] | None = None,
) -> EvaluationResult:
    """Score a ranker over a dataset.

    ``ranker`` must return a post-processed ranking (lemmas, target
    excluded).  ``candidates`` mode ranks only the per-(lemma, pos)
    candidate list with scores looked up from the ranker output;
    ``all_vocab`` mode scores the ranking itself with P@1, P@3 and R@10.
    Gold matching is by exact lowercase string.
    """
    if mode not in ("candidates", "all_vocab"):
        raise ValueError(f"unknown evaluation mode {mode!r}")
    if mode == "candidates" and candidates is None:
        raise ValueError("candidates mode needs per-lemma candidate lists")
    result = EvaluationResult(mode=mode)
    for example in examples:
        if not example.gold:
            raise ValueError(f"{example.id}: empty gold")
        try:
            ranked = ranker(example)
            if mode == "candidates":
                pool = candidates[(example.target_lemma, example.pos)]
                ordering = rank_candidates(pool, dict(ranked.items))
                score = InstanceScore(gap=gap(ordering, example.gold))
            else:
                words = ranked.words()
                score = InstanceScore(
                    p1=precision_at(words, example.gold, 1),
                    p3=precision_at(words, example.gold, 3),
                    r10=recall_at(words, example.gold, 10),
                )
        except Exception as exc:
            raise type(exc)(f"instance {example.id}: {exc}") from exc
        result.per_instance[example.id] = score
    return result
