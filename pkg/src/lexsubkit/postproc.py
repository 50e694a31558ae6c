"""Substitute post-processing: lemmatization and target exclusion.

Generated substitutes are inflected word forms and frequently include the
target word itself, so before any scoring they are lemmatized, collapsed
per lemma (keeping the best score) and stripped of the target lemma.  The
same post-processing is applied to the output of every estimator so that
model comparisons stay fair.

The lemmatizer follows the WordNet morphology convention: per-PoS exception
tables win outright, otherwise suffix-detachment rules are applied and the
first candidate found in the base dictionary is returned, otherwise the
word is left unchanged.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

from lexsubkit.interchange import RankedSubstitutes

POS_TAGS = ("n", "v", "a", "r")

_EXCEPTION_FILES = {"n": "noun.exc", "v": "verb.exc", "a": "adj.exc", "r": "adv.exc"}
_INDEX_FILES = {"n": "index.noun", "v": "index.verb", "a": "index.adj", "r": "index.adv"}

# Suffix detachment rules, per PoS, in application order.
_SUFFIX_RULES: dict[str, tuple[tuple[str, str], ...]] = {
    "n": (
        ("s", ""),
        ("ses", "s"),
        ("ves", "f"),
        ("xes", "x"),
        ("zes", "z"),
        ("ches", "ch"),
        ("shes", "sh"),
        ("men", "man"),
        ("ies", "y"),
    ),
    "v": (
        ("s", ""),
        ("ies", "y"),
        ("es", "e"),
        ("es", ""),
        ("ed", "e"),
        ("ed", ""),
        ("ing", "e"),
        ("ing", ""),
    ),
    "a": (("er", ""), ("est", ""), ("er", "e"), ("est", "e")),
    "r": (),
}


class Lemmatizer:
    """Dictionary-based lemmatizer over WordNet-format morphology files."""

    def __init__(
        self,
        exceptions: Mapping[str, Mapping[str, str]],
        dictionary: Mapping[str, set[str]],
    ):
        # exceptions[pos][inflected] -> first listed lemma
        self._exceptions = {pos: dict(exceptions.get(pos, {})) for pos in POS_TAGS}
        self._dictionary = {pos: set(dictionary.get(pos, ())) for pos in POS_TAGS}

    @classmethod
    def from_wordnet_dir(cls, path) -> "Lemmatizer":
        """Load ``*.exc`` exception lists and ``index.*`` word lists."""
        path = Path(path)
        exceptions: dict[str, dict[str, str]] = {}
        dictionary: dict[str, set[str]] = {}
        for pos in POS_TAGS:
            exc: dict[str, str] = {}
            exc_path = path / _EXCEPTION_FILES[pos]
            if exc_path.exists():
                for line in exc_path.read_text(encoding="utf-8").splitlines():
                    parts = line.split()
                    if len(parts) >= 2:
                        exc.setdefault(parts[0], parts[1])
            exceptions[pos] = exc
            words: set[str] = set()
            index_path = path / _INDEX_FILES[pos]
            if index_path.exists():
                for line in index_path.read_text(encoding="utf-8").splitlines():
                    if line.startswith("  ") or not line.strip():
                        continue  # license header
                    words.add(line.split(" ", 1)[0])
            dictionary[pos] = words
        return cls(exceptions, dictionary)

    def lemmatize(self, word: str, pos: str) -> str:
        """Map a word form to its lemma; total, lowercases its input."""
        if pos not in POS_TAGS:
            raise ValueError(f"unsupported PoS {pos!r}")
        word = word.lower()
        hit = self._exceptions[pos].get(word)
        if hit is not None:
            return hit
        dictionary = self._dictionary[pos]
        for suffix, replacement in _SUFFIX_RULES[pos]:
            if word.endswith(suffix):
                candidate = word[: len(word) - len(suffix)] + replacement
                if candidate and candidate in dictionary:
                    return candidate
        return word

    def known(self, word: str, pos: str) -> bool:
        return word in self._dictionary[pos]


@lru_cache(maxsize=1)
def builtin_lemmatizer() -> Lemmatizer:
    """Lemmatizer over the lexicon files bundled with the package."""
    return Lemmatizer.from_wordnet_dir(bundled_wordnet_dir())


def bundled_wordnet_dir() -> Path:
    return Path(resources.files("lexsubkit") / "data" / "wordnet")


def postprocess(
    ranked: RankedSubstitutes,
    target_lemma: str | None,
    pos: str,
    lemmatizer: Lemmatizer,
) -> RankedSubstitutes:
    """Lemmatize a ranking, collapse duplicate lemmas, drop the target.

    Duplicates keep their maximum score; the result is re-sorted under the
    standard (score desc, word asc) order.  Idempotent.  Passing ``None``
    as the target lemma skips the exclusion step (ablation only).
    """
    target = target_lemma.lower() if target_lemma is not None else None
    best: dict[str, float] = {}
    for word, score in ranked:
        lemma = lemmatizer.lemmatize(word, pos)
        if lemma == target:
            continue
        if lemma not in best or score > best[lemma]:
            best[lemma] = score
    return RankedSubstitutes(best.items())
