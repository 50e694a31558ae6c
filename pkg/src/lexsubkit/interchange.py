"""Core data types and the interchange file formats.

External producers (neural LMs/MLMs, embedding extractors) hand results to
the toolkit through three file kinds:

* ``LSD1`` -- per-example log-score distributions over a shared vocabulary::

      b"LSD1" | u32 vocab_size | u64 example_count |
      per example: u16 id_len | id (UTF-8) | vocab_size * float32 log-scores

* ``LSE1`` -- a dense embedding table::

      b"LSE1" | u32 vocab_size | u32 dim | row-major float32

* word-prior TSV -- ``word<TAB>probability`` per line.

All integers and floats are little-endian.  A JSONL debug form carrying only
top-k ``(word, score)`` pairs is also supported for inspection and
ranking-only workflows; it cannot feed distribution fusion because it does
not carry the full score vector.

Everything here is immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping, Sequence

import numpy as np

from lexsubkit.errors import (
    AlignmentError,
    CorruptFileError,
    FileFormatError,
)

DISTRIBUTION_MAGIC = b"LSD1"
EMBEDDING_MAGIC = b"LSE1"

#: Default probability assigned to words absent from a prior table.  Keeps
#: P(s)^beta denominators from handing unbounded boosts to unknown words.
DEFAULT_PRIOR_FLOOR = 1e-8


class Vocabulary:
    """Ordered set of unique substitute strings with O(1) lookup.

    Positions are stable for the lifetime of the object; ``index`` is the
    exact inverse of the entry list.
    """

    __slots__ = ("entries", "index")

    def __init__(self, entries: Iterable[str]):
        self.entries: tuple[str, ...] = tuple(entries)
        self.index: dict[str, int] = {w: i for i, w in enumerate(self.entries)}
        if len(self.index) != len(self.entries):
            raise ValueError("vocabulary entries must be unique")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def __getitem__(self, position: int) -> str:
        return self.entries[position]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        return f"Vocabulary({len(self.entries)} entries)"


def _same_vocab(a: Vocabulary, b: Vocabulary, what: str) -> None:
    if a is not b and a != b:
        raise AlignmentError(f"{what}: vocabularies differ")


@dataclass(frozen=True)
class TargetedExample:
    """A tokenized sentence with one marked target occurrence.

    ``gold`` maps substitute strings to annotator counts.  ``gold_all``
    optionally retains the unfiltered annotations (including multi-word
    entries) for relation profiling; evaluation always uses ``gold``.
    """

    id: str
    tokens: tuple[str, ...]
    target_index: int
    target_surface: str
    target_lemma: str
    pos: str
    gold: Mapping[str, int] = field(default_factory=dict)
    candidates: tuple[str, ...] | None = None
    dep_neighbors: tuple[int, ...] | None = None
    gold_all: Mapping[str, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not 0 <= self.target_index < len(self.tokens):
            raise ValueError(f"{self.id}: target index out of range")
        if self.tokens[self.target_index] != self.target_surface:
            raise ValueError(f"{self.id}: target surface does not match tokens")
        if self.pos not in ("n", "v", "a", "r"):
            raise ValueError(f"{self.id}: unsupported PoS {self.pos!r}")
        if any(w < 1 for w in self.gold.values()):
            raise ValueError(f"{self.id}: gold weights must be >= 1")
        if self.candidates is not None:
            object.__setattr__(self, "candidates", tuple(self.candidates))
        if self.dep_neighbors is not None:
            object.__setattr__(self, "dep_neighbors", tuple(self.dep_neighbors))

    @property
    def left(self) -> tuple[str, ...]:
        return self.tokens[: self.target_index]

    @property
    def right(self) -> tuple[str, ...]:
        return self.tokens[self.target_index + 1 :]


class SubstituteDistribution:
    """Unnormalized natural-log scores over a vocabulary for one example."""

    __slots__ = ("vocab", "scores", "example_id")

    def __init__(self, vocab: Vocabulary, scores, example_id: str = ""):
        arr = np.asarray(scores, dtype=np.float64)
        if arr.shape != (len(vocab),):
            raise AlignmentError(
                f"score vector length {arr.shape} does not match vocabulary "
                f"size {len(vocab)}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("scores must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        self.vocab = vocab
        self.scores = arr
        self.example_id = example_id

    def normalize(self) -> "SubstituteDistribution":
        """Shift scores so that exp(scores) sums to one (log-sum-exp)."""
        return SubstituteDistribution(
            self.vocab, self.scores - log_sum_exp(self.scores), self.example_id
        )

    def probabilities(self) -> np.ndarray:
        return np.exp(self.scores - log_sum_exp(self.scores))

    def score_of(self, word: str) -> float:
        return float(self.scores[self.vocab.index[word]])

    def ranked(self) -> "RankedSubstitutes":
        return RankedSubstitutes(zip(self.vocab.entries, self.scores))

    def __repr__(self) -> str:
        return (
            f"SubstituteDistribution(id={self.example_id!r}, "
            f"|vocab|={len(self.vocab)})"
        )


def log_sum_exp(scores: np.ndarray) -> float:
    m = float(np.max(scores))
    return m + float(np.log(np.sum(np.exp(scores - m))))


def normalize(distribution: SubstituteDistribution) -> SubstituteDistribution:
    return distribution.normalize()


class EmbeddingTable:
    """One dense vector per vocabulary entry."""

    __slots__ = ("vocab", "rows")

    def __init__(self, vocab: Vocabulary, rows):
        arr = np.asarray(rows, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != len(vocab):
            raise AlignmentError(
                f"embedding shape {arr.shape} does not match vocabulary size "
                f"{len(vocab)}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("embeddings must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        self.vocab = vocab
        self.rows = arr

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def row(self, word: str) -> np.ndarray:
        return self.rows[self.vocab.index[word]]

    def __contains__(self, word: str) -> bool:
        return word in self.vocab


class WordPrior:
    """Unigram probability table with a floor for unknown words."""

    def __init__(self, table: Mapping[str, float], floor: float | None = None):
        for word, p in table.items():
            if not 0.0 < p <= 1.0:
                raise ValueError(f"prior for {word!r} outside (0, 1]: {p}")
        if floor is None:
            floor = min(table.values()) if table else DEFAULT_PRIOR_FLOOR
        if floor <= 0:
            raise ValueError("floor must be positive")
        if table and floor > min(table.values()):
            raise ValueError("floor may not exceed the smallest stored probability")
        self.table = dict(table)
        self.floor = float(floor)
        self._log_cache: dict[int, np.ndarray] = {}

    @classmethod
    def neutral(cls) -> "WordPrior":
        """A prior that contributes nothing: every lookup returns 1."""
        return cls({}, floor=1.0)

    def lookup(self, word: str) -> float:
        return self.table.get(word, self.floor)

    def log_scores(self, vocab: Vocabulary) -> np.ndarray:
        """log P(s) aligned with ``vocab``; cached per vocabulary object."""
        cached = self._log_cache.get(id(vocab))
        if cached is None:
            cached = np.log([self.lookup(w) for w in vocab.entries])
            cached.flags.writeable = False
            self._log_cache[id(vocab)] = cached
        return cached

    def __len__(self) -> int:
        return len(self.table)


class RankedSubstitutes:
    """Ordered (word, score) pairs, descending score, word as tie-break."""

    __slots__ = ("items",)

    def __init__(self, items: Iterable[tuple[str, float]]):
        pairs = [(w, float(s)) for w, s in items]
        if len({w for w, _ in pairs}) != len(pairs):
            raise ValueError("ranked substitutes must be unique words")
        pairs.sort(key=lambda ws: (-ws[1], ws[0]))
        self.items: tuple[tuple[str, float], ...] = tuple(pairs)

    @classmethod
    def from_scores(cls, scores: Mapping[str, float]) -> "RankedSubstitutes":
        return cls(scores.items())

    def words(self) -> list[str]:
        return [w for w, _ in self.items]

    def top(self, k: int) -> list[str]:
        return [w for w, _ in self.items[:k]]

    def score_of(self, word: str) -> float | None:
        for w, s in self.items:
            if w == word:
                return s
        return None

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[tuple[str, float]]:
        return iter(self.items)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RankedSubstitutes) and self.items == other.items


# ---------------------------------------------------------------------------
# Binary readers / writers
# ---------------------------------------------------------------------------


def _read_exact(fh: IO[bytes], n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CorruptFileError(f"truncated file while reading {what}")
    return data


def write_distributions(
    path, distributions: Sequence[SubstituteDistribution]
) -> None:
    distributions = list(distributions)
    if not distributions:
        raise ValueError("nothing to write")
    vocab = distributions[0].vocab
    for d in distributions:
        _same_vocab(vocab, d.vocab, "write_distributions")
    with open(path, "wb") as fh:
        fh.write(DISTRIBUTION_MAGIC)
        fh.write(struct.pack("<IQ", len(vocab), len(distributions)))
        for d in distributions:
            ident = d.example_id.encode("utf-8")
            if len(ident) > 0xFFFF:
                raise ValueError(f"example id too long: {d.example_id!r}")
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(np.asarray(d.scores, dtype="<f4").tobytes())


def read_distributions(
    path, vocab: Vocabulary
) -> Iterator[SubstituteDistribution]:
    """Stream distributions from an LSD1 file, in file order."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != DISTRIBUTION_MAGIC:
            raise FileFormatError(
                f"{path}: expected magic {DISTRIBUTION_MAGIC!r}, got {magic!r}"
            )
        vocab_size, count = struct.unpack("<IQ", _read_exact(fh, 12, "header"))
        if vocab_size != len(vocab):
            raise AlignmentError(
                f"{path}: file vocab size {vocab_size} != supplied {len(vocab)}"
            )
        row_bytes = 4 * vocab_size
        for _ in range(count):
            (id_len,) = struct.unpack("<H", _read_exact(fh, 2, "example id"))
            ident = _read_exact(fh, id_len, "example id").decode("utf-8")
            payload = _read_exact(fh, row_bytes, f"scores of {ident!r}")
            scores = np.frombuffer(payload, dtype="<f4").astype(np.float64)
            yield SubstituteDistribution(vocab, scores, ident)


def write_embeddings(path, table: EmbeddingTable) -> None:
    with open(path, "wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<II", len(table.vocab), table.dim))
        fh.write(np.asarray(table.rows, dtype="<f4").tobytes())


def read_embeddings(path, vocab: Vocabulary) -> EmbeddingTable:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != EMBEDDING_MAGIC:
            raise FileFormatError(
                f"{path}: expected magic {EMBEDDING_MAGIC!r}, got {magic!r}"
            )
        vocab_size, dim = struct.unpack("<II", _read_exact(fh, 8, "header"))
        if vocab_size != len(vocab):
            raise AlignmentError(
                f"{path}: file vocab size {vocab_size} != supplied {len(vocab)}"
            )
        payload = _read_exact(fh, 4 * vocab_size * dim, "embedding rows")
        rows = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        return EmbeddingTable(vocab, rows.reshape(vocab_size, dim))


def write_vocab(path, vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word in vocab:
            fh.write(word + "\n")


def read_vocab(path) -> Vocabulary:
    with open(path, encoding="utf-8") as fh:
        return Vocabulary(line.rstrip("\n") for line in fh if line.rstrip("\n"))


def write_prior(path, prior: WordPrior) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word, p in prior.table.items():
            fh.write(f"{word}\t{float(p)!r}\n")


def read_prior(path, floor: float | None = None) -> WordPrior:
    """Parse a ``word<TAB>probability`` table.

    The floor defaults to the smallest stored probability.
    """
    table: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                word, raw = line.split("\t")
                p = float(raw)
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: bad prior line") from exc
            if not 0.0 < p <= 1.0:
                raise FileFormatError(
                    f"{path}:{lineno}: probability {p} outside (0, 1]"
                )
            table[word] = p
    return WordPrior(table, floor=floor)


# ---------------------------------------------------------------------------
# JSONL debug form (top-k only; cannot feed fusion)
# ---------------------------------------------------------------------------


def write_topk_jsonl(
    path, entries: Iterable[tuple[str, RankedSubstitutes]], top_k: int | None = None
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for example_id, ranked in entries:
            items = ranked.items if top_k is None else ranked.items[:top_k]
            fh.write(
                json.dumps(
                    {"id": example_id, "substitutes": [[w, s] for w, s in items]},
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_topk_jsonl(path) -> Iterator[tuple[str, RankedSubstitutes]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                yield record["id"], RankedSubstitutes(
                    (w, s) for w, s in record["substitutes"]
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise FileFormatError(f"{path}:{lineno}: bad top-k record") from exc
