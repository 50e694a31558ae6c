"""Context-based substitute estimators P(s|C).

Neural distributions arrive through interchange files and are served by
:class:`FileEstimator`.  The remaining estimators are self-contained:
``stub_estimate`` is a deterministic embedding-window backend used for
testing and wiring checks, and ``ooc_rank`` / ``npic_score`` are the
classic embedding baselines (context-free cosine ranking, and the product
of target-fit and context-fit distributions over dependency neighbors).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from lexsubkit.errors import (
    FileFormatError,
    OutOfVocabularyError,
    UnknownExampleError,
)
from lexsubkit.interchange import (
    EmbeddingTable,
    RankedSubstitutes,
    SubstituteDistribution,
    TargetedExample,
    Vocabulary,
    read_distributions,
)

#: Context window, in tokens per side, used when no dependency links exist.
DEFAULT_WINDOW = 3


@dataclass(frozen=True)
class EstimatorConfig:
    kind: str  # file | stub | ooc | npic
    window: int = DEFAULT_WINDOW
    distributions: str | None = None
    embeddings: str | None = None
    context_embeddings: str | None = None

    def __post_init__(self):
        if self.kind not in ("file", "stub", "ooc", "npic"):
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.kind == "file" and not self.distributions:
            raise ValueError("file estimator needs a distributions path")
        if self.kind in ("stub", "ooc", "npic") and not self.embeddings:
            raise ValueError(f"{self.kind} estimator needs an embeddings path")


class FileEstimator:
    """Serves pre-computed distributions keyed by example id.

    Ids may carry an input-variant suffix (``id#variant``) when the same
    example was scored under several injection inputs.
    """

    def __init__(self, distributions: Iterable[SubstituteDistribution]):
        self._index: dict[str, SubstituteDistribution] = {}
        for d in distributions:
            self._index[d.example_id] = d

    @classmethod
    def from_file(cls, path, vocab: Vocabulary) -> "FileEstimator":
        return cls(read_distributions(path, vocab))

    def estimate(
        self, example: TargetedExample, variant: str | None = None
    ) -> SubstituteDistribution:
        key = example.id if variant is None else f"{example.id}#{variant}"
        try:
            return self._index[key]
        except KeyError:
            raise UnknownExampleError(f"no stored distribution for {key!r}") from None

    def __len__(self) -> int:
        return len(self._index)


def _window_positions(example: TargetedExample, window: int) -> list[int]:
    t = example.target_index
    lo = max(0, t - window)
    hi = min(len(example.tokens), t + window + 1)
    return [i for i in range(lo, hi) if i != t]


def stub_estimate(
    example: TargetedExample, emb: EmbeddingTable, window: int = DEFAULT_WINDOW
) -> SubstituteDistribution:
    """Deterministic test backend.

    Scores each vocabulary entry by the mean inner product with the
    in-vocabulary context tokens inside ``window``; uniform when no context
    token is known.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    context = [
        emb.row(example.tokens[i])
        for i in _window_positions(example, window)
        if example.tokens[i] in emb.vocab
    ]
    if not context:
        scores = np.zeros(len(emb.vocab))
    else:
        scores = emb.rows @ (np.mean(context, axis=0))
    return SubstituteDistribution(emb.vocab, scores, example.id)


def _target_row(example: TargetedExample, emb: EmbeddingTable) -> np.ndarray:
    for word in (example.target_surface, example.target_lemma):
        if word in emb.vocab:
            return emb.row(word)
    raise OutOfVocabularyError(
        f"{example.id}: target {example.target_surface!r}/"
        f"{example.target_lemma!r} not in embedding table"
    )


def ooc_rank(example: TargetedExample, emb: EmbeddingTable) -> RankedSubstitutes:
    """Rank the whole vocabulary by cosine similarity to the target.

    Ignores the context entirely.  Rows (or a target) with zero norm get
    cosine 0, so ties fall back to the lexicographic tie-break.
    """
    t = _target_row(example, emb)
    norms = np.linalg.norm(emb.rows, axis=1)
    denom = norms * np.linalg.norm(t)
    sims = np.divide(emb.rows @ t, denom, out=np.zeros(len(emb.vocab)), where=denom > 0)
    return RankedSubstitutes(zip(emb.vocab.entries, sims))


def npic_score(
    example: TargetedExample,
    word_emb: EmbeddingTable,
    ctx_emb: EmbeddingTable,
    window: int = DEFAULT_WINDOW,
) -> SubstituteDistribution:
    """Product of target-fit and context-fit distributions, in log space.

    log score(s) = <emb_s, emb_T> + sum over context words c of
    <emb_s, emb'_c>, where emb' is the context-embedding table and the
    context is the dependency neighbors when the example carries them,
    otherwise the tokens within ``window``.  Per-term softmax normalizers
    are constants and do not affect the ranking.
    """
    if word_emb.dim != ctx_emb.dim:
        raise ValueError("word and context embedding dimensions differ")
    t = _target_row(example, word_emb)
    if example.dep_neighbors is not None:
        positions = [
            i
            for i in example.dep_neighbors
            if 0 <= i < len(example.tokens) and i != example.target_index
        ]
    else:
        positions = _window_positions(example, window)
    ctx_sum = np.zeros(word_emb.dim)
    for i in positions:
        token = example.tokens[i]
        if token in ctx_emb.vocab:
            ctx_sum += ctx_emb.row(token)
    scores = word_emb.rows @ (t + ctx_sum)
    return SubstituteDistribution(word_emb.vocab, scores, example.id)


def load_text_embeddings(path) -> EmbeddingTable:
    """Read a plain-text table: ``word float ... float`` per line.

    An optional ``count dim`` header line is accepted.  Duplicate words keep
    the first occurrence.
    """
    words: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header
                except ValueError:
                    pass
            word, values = parts[0], parts[1:]
            try:
                vector = [float(v) for v in values]
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: bad float") from exc
            if dim is None:
                dim = len(vector)
                if dim == 0:
                    raise FileFormatError(f"{path}:{lineno}: no vector values")
            elif len(vector) != dim:
                raise FileFormatError(
                    f"{path}:{lineno}: expected {dim} values, got {len(vector)}"
                )
            if word in seen:
                continue
            seen.add(word)
            words.append(word)
            rows.append(vector)
    if not words:
        raise FileFormatError(f"{path}: empty embedding table")
    return EmbeddingTable(Vocabulary(words), np.asarray(rows))
