"""Semantic relation typing between targets and substitutes via WordNet.

The lexicon is read from the standard WordNet 3.0 database layout
(``index.{noun,verb,adj,adv}`` and ``data.*``).  For a (target, substitute,
PoS) pair the synset pair with the shortest path in the undirected
hypernym graph is selected, then classified: same synset (synonym), direct
hypernym/hyponym, shared direct hypernym (co-hyponym), pure ancestor chain
(transitive hyper/hyponym), common hypernym within 3 hops of each synset
(co-hyponym-3), any common ancestor (unknown-relation), none (no-path).
Words absent from the lexicon for the required PoS are unknown-word.

The package bundles a compact lexicon in this format under
``lexsubkit/data/wordnet`` so the classifier works out of the box; point
:func:`WordnetGraph.from_wordnet_dir` at a full WordNet 3.0 ``dict``
directory for real corpora.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from lexsubkit.postproc import bundled_wordnet_dir

RELATION_LABELS = (
    "target",
    "synonym",
    "direct-hypernym",
    "direct-hyponym",
    "co-hyponym",
    "transitive-hypernym",
    "transitive-hyponym",
    "co-hyponym-3",
    "unknown-relation",
    "no-path",
    "unknown-word",
)

#: Report-only category for substitutes that are not single words.
MULTIWORD = "multiword"

_DATA_FILES = {"n": "data.noun", "v": "data.verb", "a": "data.adj", "r": "data.adv"}
_INDEX_FILES = {"n": "index.noun", "v": "index.verb", "a": "index.adj", "r": "index.adv"}

# Pointer symbols marking hypernymy (including instance-level).
_HYPERNYM_POINTERS = ("@", "@i")

_COHYPONYM_HOPS = 3


@dataclass(frozen=True)
class Synset:
    pos: str
    offset: int
    lemmas: tuple[str, ...]
    hypernyms: tuple[int, ...]


class WordnetGraph:
    """Synsets, hypernym edges and a (lemma, pos) sense-ordered index."""

    def __init__(
        self,
        synsets: Iterable[Synset],
        lemma_index: Mapping[tuple[str, str], Sequence[int]],
    ):
        self.synsets: dict[tuple[str, int], Synset] = {
            (s.pos, s.offset): s for s in synsets
        }
        self.lemma_index: dict[tuple[str, str], tuple[int, ...]] = {
            key: tuple(offsets) for key, offsets in lemma_index.items()
        }
        for (_, pos), offsets in self.lemma_index.items():
            for offset in offsets:
                if (pos, offset) not in self.synsets:
                    raise ValueError(
                        f"index references missing synset {pos}/{offset}"
                    )
        self._hyponyms: dict[tuple[str, int], list[int]] = {}
        for (pos, offset), synset in self.synsets.items():
            for parent in synset.hypernyms:
                self._hyponyms.setdefault((pos, parent), []).append(offset)

    @classmethod
    def from_wordnet_dir(cls, path) -> "WordnetGraph":
        path = Path(path)
        synsets: list[Synset] = []
        lemma_index: dict[tuple[str, str], list[int]] = {}
        for pos, name in _DATA_FILES.items():
            data_path = path / name
            if not data_path.exists():
                continue
            for line in data_path.read_text(encoding="utf-8").splitlines():
                if line.startswith("  ") or not line.strip():
                    continue
                synsets.append(_parse_data_line(line, pos))
        for pos, name in _INDEX_FILES.items():
            index_path = path / name
            if not index_path.exists():
                continue
            for line in index_path.read_text(encoding="utf-8").splitlines():
                if line.startswith("  ") or not line.strip():
                    continue
                lemma, offsets = _parse_index_line(line)
                lemma_index[(lemma, pos)] = offsets
        return cls(synsets, lemma_index)

    def lemma_synsets(self, lemma: str, pos: str) -> tuple[int, ...]:
        return self.lemma_index.get((lemma, pos), ())

    def hypernyms(self, pos: str, offset: int) -> tuple[int, ...]:
        return self.synsets[(pos, offset)].hypernyms

    def hyponyms(self, pos: str, offset: int) -> tuple[int, ...]:
        return tuple(self._hyponyms.get((pos, offset), ()))

    def lemmas(self, pos: str | None = None) -> list[str]:
        return sorted(
            {l for (l, p) in self.lemma_index if pos is None or p == pos}
        )

    # -- graph walks --------------------------------------------------------

    def undirected_distance(self, pos: str, a: int, b: int) -> int | None:
        """Shortest path length over hypernym edges taken in both directions."""
        if a == b:
            return 0
        seen = {a}
        frontier = deque([(a, 0)])
        while frontier:
            node, depth = frontier.popleft()
            for nxt in self.hypernyms(pos, node) + self.hyponyms(pos, node):
                if nxt == b:
                    return depth + 1
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append((nxt, depth + 1))
        return None

    def ancestor_depths(self, pos: str, offset: int) -> dict[int, int]:
        """Every ancestor reachable over hypernym edges, with hop count."""
        depths: dict[int, int] = {}
        frontier = deque([(offset, 0)])
        while frontier:
            node, depth = frontier.popleft()
            for parent in self.hypernyms(pos, node):
                if parent not in depths or depth + 1 < depths[parent]:
                    depths[parent] = depth + 1
                    frontier.append((parent, depth + 1))
        return depths


def _parse_data_line(line: str, pos: str) -> Synset:
    body = line.split(" | ", 1)[0]
    fields = body.split()
    offset = int(fields[0])
    w_cnt = int(fields[3], 16)
    lemmas = tuple(fields[4 + 2 * i].lower() for i in range(w_cnt))
    cursor = 4 + 2 * w_cnt
    p_cnt = int(fields[cursor])
    cursor += 1
    hypernyms = []
    for _ in range(p_cnt):
        symbol, target_offset, target_pos, _src = fields[cursor : cursor + 4]
        cursor += 4
        if symbol in _HYPERNYM_POINTERS and _normalize_pos(target_pos) == pos:
            hypernyms.append(int(target_offset))
    return Synset(pos, offset, lemmas, tuple(hypernyms))


def _parse_index_line(line: str) -> tuple[str, list[int]]:
    fields = line.split()
    lemma = fields[0].lower()
    synset_cnt = int(fields[2])
    p_cnt = int(fields[3])
    offsets = [int(x) for x in fields[4 + p_cnt + 2 :]]
    if len(offsets) != synset_cnt:
        raise ValueError(f"index line for {lemma!r}: synset count mismatch")
    return lemma, offsets


def _normalize_pos(pos: str) -> str:
    return "a" if pos == "s" else pos


@lru_cache(maxsize=1)
def builtin_graph() -> WordnetGraph:
    return WordnetGraph.from_wordnet_dir(bundled_wordnet_dir())


def classify(
    graph: WordnetGraph, target_lemma: str, substitute_lemma: str, pos: str
) -> str:
    """Relation label for one (target, substitute, PoS) triple.  Total."""
    target = target_lemma.lower()
    substitute = substitute_lemma.lower()
    if substitute == target:
        return "target"
    target_synsets = graph.lemma_synsets(target, pos)
    substitute_synsets = graph.lemma_synsets(substitute, pos)
    if not target_synsets or not substitute_synsets:
        return "unknown-word"

    # Pick the synset pair with the shortest undirected path; ties break on
    # the smallest combined sense numbers, then on the sense/offset pair
    # itself (orientation-free so that classify(a, b) mirrors classify(b, a)).
    best_key = None
    best_pair = None
    for sense_t, off_t in enumerate(target_synsets, 1):
        for sense_s, off_s in enumerate(substitute_synsets, 1):
            d = graph.undirected_distance(pos, off_t, off_s)
            key = (
                d if d is not None else float("inf"),
                sense_t + sense_s,
                min((sense_t, off_t), (sense_s, off_s)),
                max((sense_t, off_t), (sense_s, off_s)),
            )
            if best_key is None or key < best_key:
                best_key = key
                best_pair = (off_t, off_s)
    off_t, off_s = best_pair

    if off_t == off_s:
        return "synonym"
    target_parents = set(graph.hypernyms(pos, off_t))
    substitute_parents = set(graph.hypernyms(pos, off_s))
    if off_s in target_parents:
        return "direct-hypernym"
    if off_t in substitute_parents:
        return "direct-hyponym"
    if target_parents & substitute_parents:
        return "co-hyponym"
    target_ancestors = graph.ancestor_depths(pos, off_t)
    substitute_ancestors = graph.ancestor_depths(pos, off_s)
    if off_s in target_ancestors:
        return "transitive-hypernym"
    if off_t in substitute_ancestors:
        return "transitive-hyponym"
    common = set(target_ancestors) & set(substitute_ancestors)
    if any(
        target_ancestors[h] <= _COHYPONYM_HOPS
        and substitute_ancestors[h] <= _COHYPONYM_HOPS
        for h in common
    ):
        return "co-hyponym-3"
    if common:
        return "unknown-relation"
    return "no-path"


def relation_profile(
    pairs: Iterable[tuple[str, str, str]], graph: WordnetGraph
) -> dict[str, dict[str, float]]:
    """Label proportions per PoS over (target, substitute, pos) triples.

    Substitutes containing whitespace are counted under the report-only
    ``multiword`` category.  Proportions sum to 1 within each PoS.
    """
    counts: dict[str, Counter] = {}
    for target, substitute, pos in pairs:
        if any(ch.isspace() for ch in substitute.strip()):
            label = MULTIWORD
        else:
            label = classify(graph, target, substitute.strip(), pos)
        counts.setdefault(pos, Counter())[label] += 1
    profile: dict[str, dict[str, float]] = {}
    for pos, counter in sorted(counts.items()):
        total = sum(counter.values())
        profile[pos] = {
            label: counter[label] / total
            for label in (*RELATION_LABELS, MULTIWORD)
            if counter[label]
        }
    return profile
