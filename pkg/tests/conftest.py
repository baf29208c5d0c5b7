import math
import random
from typing import List, Sequence, Tuple

import numpy as np
import pytest

from experiential.state_space import EncodingConfig, SequenceKey, StateVector
from experiential.transition_graph import (
    EncodingSettings,
    GraphDocument,
    KeyEntry,
    TransitionEntry,
    TransitionGraph,
)


def brute_cosine(a: Sequence[float], b: Sequence[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0 or nb == 0:
        return 0.0
    return dot / (na * nb)


def random_state(rnd: random.Random, feature_range: int = 10) -> StateVector:
    flag = rnd.choice([(0, 0), (0, 0), (1, 0), (0, 1)])
    return StateVector(
        (rnd.randrange(-1, feature_range), rnd.randrange(0, feature_range)),
        flag,
        rnd.randrange(4),
    )


def random_key(rnd: random.Random, cs: int = 2, feature_range: int = 10) -> SequenceKey:
    return SequenceKey(tuple(random_state(rnd, feature_range) for _ in range(cs)))


def build_graph(entries: List[Tuple[List[List[int]], List[Tuple[List[int], int, int]]]],
                encoding: EncodingConfig = EncodingConfig()) -> TransitionGraph:
    """Graph with arbitrary U/C values, including combinations unit deltas cannot reach"""
    document = GraphDocument(
        version=1,
        encoding_config=EncodingSettings(sr=encoding.sr, ea=encoding.ea, n_features=encoding.n_features),
        entries=[
            KeyEntry(
                key=key,
                key_count=sum(count for _, _, count in transitions),
                transitions=[TransitionEntry(successor=s, utility=u, count=c) for s, u, c in transitions],
            )
            for key, transitions in entries
        ],
    )
    return TransitionGraph.from_document(document)


@pytest.fixture
def rnd() -> random.Random:
    return random.Random(1234)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(7)


@pytest.fixture
def encoding() -> EncodingConfig:
    return EncodingConfig()
