"""Corpus parsers and the normalized JSONL dataset form.

Source corpora (the SemEval-2007 substitution task files, CoInCo, and the
sense-induction sets) are converted once into tokenized
:class:`~lexsubkit.interchange.TargetedExample` records; everything
downstream reads only the normalized JSONL form, one example per line.

Gold filtering follows the evaluation convention: multi-word gold entries
are discarded (hyphenated single tokens are kept) and instances left
without gold are dropped.  The unfiltered annotations are retained in
``gold_all`` for relation profiling, which wants them verbatim.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping
from xml.etree import ElementTree

from lexsubkit.errors import DatasetError
from lexsubkit.interchange import TargetedExample
from lexsubkit.wsi import WsiInstance


@dataclass
class DatasetManifest:
    name: str
    examples: list[TargetedExample] = field(default_factory=list)
    per_lemma_candidates: dict[tuple[str, str], tuple[str, ...]] = field(
        default_factory=dict
    )


def is_multiword(substitute: str) -> bool:
    """True for entries with internal whitespace; hyphenated words pass."""
    return any(ch.isspace() for ch in substitute.strip())


def filter_gold(gold: Mapping[str, int]) -> dict[str, int]:
    return {w: c for w, c in gold.items() if not is_multiword(w) and c >= 1}


def build_candidates(
    manifest: DatasetManifest,
) -> dict[tuple[str, str], tuple[str, ...]]:
    """Merge the gold substitutes of each (lemma, pos) into candidate lists."""
    pools: dict[tuple[str, str], set[str]] = {}
    for example in manifest.examples:
        pool = pools.setdefault((example.target_lemma, example.pos), set())
        for word in example.gold:
            word = word.lower()
            if not is_multiword(word):
                pool.add(word)
    candidates = {key: tuple(sorted(pool)) for key, pool in sorted(pools.items())}
    manifest.per_lemma_candidates = candidates
    return candidates


# ---------------------------------------------------------------------------
# SemEval-2007 substitution task
# ---------------------------------------------------------------------------

_LEXELT_RE = re.compile(r'<lexelt\s+item="([^"]+)">(.*?)</lexelt>', re.S)
_INSTANCE_RE = re.compile(r'<instance\s+id="([^"]+)">(.*?)</instance>', re.S)
_CONTEXT_RE = re.compile(r"<context>(.*?)</context>", re.S)
_HEAD_RE = re.compile(r"<head>(.*?)</head>", re.S)


def parse_semeval2007(xml_path, gold_path, name: str = "semeval2007") -> DatasetManifest:
    """Parse the task's sentence file plus its weighted-gold file.

    The sentence file is handled with tolerant pattern matching because the
    original distribution contains unescaped entities.  Gold lines look like
    ``bright.a 1 :: brilliant 3; luminous 2;``.
    """
    gold = _parse_semeval_gold(gold_path)
    text = Path(xml_path).read_text(encoding="utf-8", errors="replace")
    manifest = DatasetManifest(name=name)
    seen: set[tuple[str, str]] = set()
    for item, block in _LEXELT_RE.findall(text):
        lemma, _, pos = item.rpartition(".")
        if pos not in ("n", "v", "a", "r"):
            raise DatasetError(f"{xml_path}: bad lexelt PoS in {item!r}")
        for instance_id, body in _INSTANCE_RE.findall(block):
            context = _CONTEXT_RE.search(body)
            if context is None:
                raise DatasetError(
                    f"{xml_path}: instance {item} {instance_id} has no context"
                )
            head = _HEAD_RE.search(context.group(1))
            if head is None:
                raise DatasetError(
                    f"{xml_path}: instance {item} {instance_id} has no target"
                )
            before = context.group(1)[: head.start()].split()
            target = head.group(1).strip()
            after = context.group(1)[head.end() :].split()
            seen.add((item, instance_id))
            gold_all = gold.get((item, instance_id))
            if gold_all is None:
                continue  # unannotated instance
            kept = filter_gold(gold_all)
            if not kept:
                continue  # nothing left after the multi-word filter
            manifest.examples.append(
                TargetedExample(
                    id=f"{item} {instance_id}",
                    tokens=(*before, target, *after),
                    target_index=len(before),
                    target_surface=target,
                    target_lemma=lemma.lower(),
                    pos=pos,
                    gold=kept,
                    gold_all=gold_all,
                )
            )
    for key in gold:
        if key not in seen:
            raise DatasetError(f"{gold_path}: gold id {key} has no sentence")
    build_candidates(manifest)
    return manifest


def _parse_semeval_gold(path) -> dict[tuple[str, str], dict[str, int]]:
    gold: dict[tuple[str, str], dict[str, int]] = {}
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8", errors="replace").splitlines(), 1
    ):
        line = line.strip()
        if not line:
            continue
        left, sep, right = line.partition("::")
        if not sep:
            raise DatasetError(f"{path}:{lineno}: missing '::'")
        try:
            item, instance_id = left.split()
        except ValueError as exc:
            raise DatasetError(f"{path}:{lineno}: bad instance header") from exc
        entries: dict[str, int] = {}
        for chunk in right.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            phrase, _, count = chunk.rpartition(" ")
            if not phrase:
                raise DatasetError(f"{path}:{lineno}: bad gold entry {chunk!r}")
            try:
                weight = int(count)
            except ValueError as exc:
                raise DatasetError(f"{path}:{lineno}: bad weight {count!r}") from exc
            if weight >= 1:
                entries[phrase.strip().lower()] = weight
        gold[(item, instance_id)] = entries
    return gold


# ---------------------------------------------------------------------------
# CoInCo
# ---------------------------------------------------------------------------

_MASC_POS = {"N": "n", "V": "v", "J": "a", "R": "r"}


def parse_coinco(xml_path, name: str = "coinco") -> DatasetManifest:
    """Parse the CoInCo XML: every annotated token becomes one example.

    Sentences are ``<sent>`` elements with a ``<tokens>`` list; annotated
    tokens carry a ``<substitutions>`` child of ``<subst lemma=.. freq=..>``
    entries.  The corpus tokenization is preserved as-is.
    """
    try:
        root = ElementTree.parse(xml_path).getroot()
    except ElementTree.ParseError as exc:
        raise DatasetError(f"{xml_path}: malformed XML: {exc}") from exc
    manifest = DatasetManifest(name=name)
    for sent_index, sent in enumerate(root.iter("sent")):
        token_elements = list(sent.iter("token"))
        tokens = tuple(t.get("wordform", "") for t in token_elements)
        for token_index, token in enumerate(token_elements):
            substitutions = token.find("substitutions")
            if substitutions is None:
                continue
            pos = _MASC_POS.get((token.get("posMASC") or "?")[0].upper())
            if pos is None:
                continue
            gold_all: dict[str, int] = {}
            for subst in substitutions.iter("subst"):
                lemma = (subst.get("lemma") or "").strip().lower()
                if not lemma:
                    continue
                try:
                    freq = int(subst.get("freq", "1"))
                except ValueError as exc:
                    raise DatasetError(
                        f"{xml_path}: bad freq on substitution of "
                        f"{token.get('wordform')!r}"
                    ) from exc
                if freq >= 1:
                    gold_all[lemma] = gold_all.get(lemma, 0) + freq
            kept = filter_gold(gold_all)
            if not kept:
                continue
            identifier = token.get("id") or f"{sent_index}_{token_index}"
            manifest.examples.append(
                TargetedExample(
                    id=identifier,
                    tokens=tokens,
                    target_index=token_index,
                    target_surface=tokens[token_index],
                    target_lemma=(token.get("lemma") or tokens[token_index]).lower(),
                    pos=pos,
                    gold=kept,
                    gold_all=gold_all,
                )
            )
    build_candidates(manifest)
    return manifest


# ---------------------------------------------------------------------------
# Sense-induction corpora
# ---------------------------------------------------------------------------


def parse_wsi_dataset(path, flavor: str, key_path=None) -> list[WsiInstance]:
    """Parse a sense-induction corpus into :class:`WsiInstance` records.

    ``path`` is an XML file (or directory of per-lemma XML files) whose
    ``<instance id=.. lemma=.. pos=..>`` elements contain the tokenized
    sentence with the target wrapped in ``<head>``.  ``key_path`` points at
    the gold key: ``lemma.pos instance_id sense`` lines for the 2010 flavor,
    ``lemma.pos instance_id sense/weight ...`` (graded) for the 2013 flavor.
    Graded labels are kept and projected onto their highest-weight sense.
    """
    if flavor not in ("semeval2010", "semeval2013"):
        raise DatasetError(f"unknown WSI flavor {flavor!r}")
    path = Path(path)
    files = sorted(path.glob("*.xml")) if path.is_dir() else [path]
    if not files:
        raise DatasetError(f"{path}: no XML files")
    hard, graded = ({}, {})
    if key_path is not None:
        hard, graded = _parse_wsi_key(key_path, flavor)
    instances: list[WsiInstance] = []
    counts_per_lemma: dict[str, int] = {}
    for file in files:
        try:
            root = ElementTree.parse(file).getroot()
        except ElementTree.ParseError as exc:
            raise DatasetError(f"{file}: malformed XML: {exc}") from exc
        for element in root.iter("instance"):
            instance_id = element.get("id")
            lemma = (element.get("lemma") or "").lower()
            pos = element.get("pos") or ""
            if not instance_id or not lemma or pos not in ("n", "v", "a", "r"):
                raise DatasetError(f"{file}: instance missing id/lemma/pos")
            head = element.find("head")
            if head is None or head.text is None:
                raise DatasetError(f"{file}: instance {instance_id} has no target")
            before = (element.text or "").split()
            target = head.text.strip()
            after = (head.tail or "").split()
            example = TargetedExample(
                id=instance_id,
                tokens=(*before, target, *after),
                target_index=len(before),
                target_surface=target,
                target_lemma=lemma,
                pos=pos,
            )
            instances.append(
                WsiInstance(
                    id=instance_id,
                    lemma=lemma,
                    pos=pos,
                    example=example,
                    gold_sense=hard.get(instance_id),
                    gold_graded=graded.get(instance_id),
                )
            )
            counts_per_lemma[lemma] = counts_per_lemma.get(lemma, 0) + 1
    lonely = [lemma for lemma, n in counts_per_lemma.items() if n < 2]
    if lonely:
        raise DatasetError(f"lemmas with a single instance: {sorted(lonely)}")
    return instances


def _parse_wsi_key(path, flavor):
    hard: dict[str, str] = {}
    graded: dict[str, dict[str, float]] = {}
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), 1
    ):
        parts = line.split()
        if not parts:
            continue
        if len(parts) < 3:
            raise DatasetError(f"{path}:{lineno}: bad key line")
        instance_id = parts[1]
        if flavor == "semeval2010":
            hard[instance_id] = parts[2]
        else:
            weights: dict[str, float] = {}
            for chunk in parts[2:]:
                sense, _, weight = chunk.rpartition("/")
                if not sense:
                    raise DatasetError(f"{path}:{lineno}: bad graded label {chunk!r}")
                weights[sense] = float(weight)
            graded[instance_id] = weights
            hard[instance_id] = min(weights, key=lambda s: (-weights[s], s))
    return hard, graded


# ---------------------------------------------------------------------------
# Normalized JSONL
# ---------------------------------------------------------------------------


def write_manifest_jsonl(path, manifest: DatasetManifest) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for example in manifest.examples:
            fh.write(json.dumps(_example_to_record(example), ensure_ascii=False))
            fh.write("\n")


def read_manifest_jsonl(path, name: str | None = None) -> DatasetManifest:
    manifest = DatasetManifest(name=name or Path(path).stem)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                manifest.examples.append(_example_from_record(json.loads(line)))
            except (KeyError, ValueError, TypeError) as exc:
                raise DatasetError(f"{path}:{lineno}: bad example: {exc}") from exc
    build_candidates(manifest)
    return manifest


def _example_to_record(example: TargetedExample) -> dict:
    record = {
        "id": example.id,
        "tokens": list(example.tokens),
        "target_index": example.target_index,
        "target_surface": example.target_surface,
        "target_lemma": example.target_lemma,
        "pos": example.pos,
        "gold": dict(example.gold),
    }
    if example.candidates is not None:
        record["candidates"] = list(example.candidates)
    if example.dep_neighbors is not None:
        record["dep_neighbors"] = list(example.dep_neighbors)
    if example.gold_all is not None:
        record["gold_all"] = dict(example.gold_all)
    return record


def _example_from_record(record: Mapping) -> TargetedExample:
    return TargetedExample(
        id=record["id"],
        tokens=tuple(record["tokens"]),
        target_index=record["target_index"],
        target_surface=record["target_surface"],
        target_lemma=record["target_lemma"],
        pos=record["pos"],
        gold=dict(record.get("gold", {})),
        candidates=tuple(record["candidates"]) if "candidates" in record else None,
        dep_neighbors=(
            tuple(record["dep_neighbors"]) if "dep_neighbors" in record else None
        ),
        gold_all=dict(record["gold_all"]) if "gold_all" in record else None,
    )


def write_wsi_jsonl(path, instances: Iterable[WsiInstance]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for instance in instances:
            record = _example_to_record(instance.example)
            record["lemma"] = instance.lemma
            if instance.gold_sense is not None:
                record["gold_sense"] = instance.gold_sense
            if instance.gold_graded is not None:
                record["gold_graded"] = dict(instance.gold_graded)
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_wsi_jsonl(path) -> list[WsiInstance]:
    instances: list[WsiInstance] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                example = _example_from_record(record)
                instances.append(
                    WsiInstance(
                        id=example.id,
                        lemma=record.get("lemma", example.target_lemma),
                        pos=example.pos,
                        example=example,
                        gold_sense=record.get("gold_sense"),
                        gold_graded=record.get("gold_graded"),
                    )
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise DatasetError(f"{path}:{lineno}: bad instance: {exc}") from exc
    return instances
