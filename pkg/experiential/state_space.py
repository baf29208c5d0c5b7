import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .exceptions import ContractViolation

logger = logging.getLogger(__name__)

NUM_ACTIONS = 4
NO_BALL = -1

Vector = Tuple[float, ...]


@dataclass(frozen=True)
class EncodingConfig:
    """How a StateVector is flattened into numbers (SR and EA options)"""
    sr: bool = True
    ea: bool = False
    n_features: int = 2

    @property
    def width(self) -> int:
        return self.n_features + (2 if self.sr else 0) + (NUM_ACTIONS if self.ea else 1)


@dataclass(frozen=True, slots=True)
class StateVector:
    """One time step: features f_t, feedback flags y_t = (pos, neg), action id a_t"""
    features: Tuple[int, ...]
    feedback: Tuple[int, int] = (0, 0)
    action: int = 0

    def __post_init__(self):
        if self.feedback[0] and self.feedback[1]:
            raise ContractViolation("positive and negative feedback on the same step")
        if not 0 <= self.action < NUM_ACTIONS:
            raise ContractViolation(f"action id {self.action} outside 0..{NUM_ACTIONS - 1}")


@dataclass(frozen=True, slots=True)
class SequenceKey:
    """The last CS states, oldest first"""
    states: Tuple[StateVector, ...]

    def __len__(self) -> int:
        return len(self.states)

    def encoded(self, config: EncodingConfig) -> Tuple[Vector, ...]:
        return tuple(encode(state, config) for state in self.states)


def encode(state: StateVector, config: EncodingConfig) -> Vector:
    """Flatten a state: features, then feedback iff SR, then the action (scalar or one-hot)"""
    vector = list(state.features)
    if config.sr:
        vector.extend(state.feedback)
    if config.ea:
        one_hot = [0] * NUM_ACTIONS
        one_hot[state.action] = 1
        vector.extend(one_hot)
    else:
        vector.append(state.action)
    return tuple(vector)


def decode(vector: Sequence[float], config: EncodingConfig) -> StateVector:
    """Inverse of encode; feedback reads as (0, 0) when SR is off"""
    if len(vector) != config.width:
        raise ContractViolation(f"encoded state has {len(vector)} components, expected {config.width}")
    n = config.n_features
    features = tuple(int(v) for v in vector[:n])
    feedback = (0, 0)
    if config.sr:
        feedback = (int(vector[n]), int(vector[n + 1]))
        n += 2
    if config.ea:
        action = int(np.argmax(vector[n:n + NUM_ACTIONS]))
    else:
        action = int(vector[n])
    return StateVector(features, feedback, action)


def canonical(state: StateVector, config: EncodingConfig) -> StateVector:
    return decode(encode(state, config), config)


def flatten(encoded_key: Sequence[Vector]) -> np.ndarray:
    return np.asarray([v for vector in encoded_key for v in vector], dtype=np.float64)


def cosine_similarity(vec1: np.ndarray, vec2: np.ndarray) -> float:
    """Cosine of the angle between two vectors in [-1, 1], 0.0 when either is all-zero

    Both squared norms go under one square root so that identical integer vectors
    give exactly 1.0.
    """
    squared1 = float(np.dot(vec1, vec1))
    squared2 = float(np.dot(vec2, vec2))
    if squared1 == 0 or squared2 == 0:
        return 0.0
    return float(np.clip(np.dot(vec1, vec2) / np.sqrt(squared1 * squared2), -1.0, 1.0))


def key_similarity(a: SequenceKey, b: SequenceKey, config: EncodingConfig) -> float:
    if len(a) != len(b):
        raise ContractViolation(f"cannot compare keys of length {len(a)} and {len(b)}")
    return cosine_similarity(flatten(a.encoded(config)), flatten(b.encoded(config)))


def make_key(history: Sequence[StateVector], cs: int) -> Optional[SequenceKey]:
    """The last cs states of history, or None while history is shorter than cs"""
    if len(history) < cs:
        return None
    return SequenceKey(tuple(history[len(history) - cs:]))
