from pathlib import Path

import numpy as np
import pytest

from lexsubkit.interchange import EmbeddingTable, TargetedExample, Vocabulary

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def make_example(
    sentence: str,
    target_index: int,
    example_id: str = "x1",
    lemma: str | None = None,
    pos: str = "n",
    gold: dict | None = None,
    **kwargs,
) -> TargetedExample:
    tokens = tuple(sentence.split())
    return TargetedExample(
        id=example_id,
        tokens=tokens,
        target_index=target_index,
        target_surface=tokens[target_index],
        target_lemma=lemma or tokens[target_index].lower(),
        pos=pos,
        gold=gold or {},
        **kwargs,
    )


def random_embeddings(
    words: list[str], dim: int, rng: np.random.Generator
) -> EmbeddingTable:
    return EmbeddingTable(
        Vocabulary(words), rng.standard_normal((len(words), dim))
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240117)
