import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ContractViolation
from .models import CandidateRecord, TraceRecord
from .state_space import NUM_ACTIONS, EncodingConfig, SequenceKey, StateVector, encode, make_key
from .transition_graph import EncodedKey, Match, TransitionGraph, TransitionRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolicyConfig:
    cs: int = 2
    ss: float = 0.9
    sc: int = 2
    tu: Optional[float] = 0
    tc: int = 1
    cu: bool = False

    def __post_init__(self):
        if self.tc < 1:
            raise ContractViolation(f"transition count threshold must be at least 1, got {self.tc}")

    def score(self, record: TransitionRecord) -> float:
        return record.utility * record.count if self.cu else record.utility


@dataclass(frozen=True)
class Candidate:
    successor: StateVector
    utility: int
    count: int
    score: float


@dataclass
class DecisionTrace:
    """Why an action was taken: the matched key, every scored candidate and the winner"""
    mode: str
    action: int
    matched_key: Optional[EncodedKey] = None
    similarity: Optional[float] = None
    candidates: List[Candidate] = field(default_factory=list)
    chosen: Optional[Candidate] = None

    def to_record(self, step: int, encoding: EncodingConfig, game: int = 1) -> TraceRecord:
        def successor(candidate: Candidate) -> List[int]:
            return list(encode(candidate.successor, encoding))

        return TraceRecord(
            game=game,
            step=step,
            mode=self.mode,
            action=self.action,
            matched_key=[list(v) for v in self.matched_key] if self.matched_key else None,
            similarity=self.similarity,
            candidates=[
                CandidateRecord(successor=successor(c), U=c.utility, C=c.count, score=c.score)
                for c in self.candidates
            ],
            chosen=successor(self.chosen) if self.chosen else None,
        )


def candidate_transitions(graph: TransitionGraph, key: SequenceKey,
                          config: PolicyConfig) -> Optional[Match]:
    """Exact match, else the most similar key; transitions below TU or TC are dropped"""
    match = graph.lookup_exact(key, config.sc)
    if match is None:
        match = graph.lookup_similar(key, config.ss, config.sc)
    if match is None:
        return None
    kept = [
        t for t in match.transitions
        if (config.tu is None or t.utility >= config.tu) and t.count >= config.tc
    ]
    return replace(match, transitions=kept)


def random_action(rng: np.random.Generator) -> int:
    return int(rng.integers(NUM_ACTIONS))


def select_action(graph: TransitionGraph, history: Sequence[StateVector], config: PolicyConfig,
                  rng: np.random.Generator) -> Tuple[int, DecisionTrace]:
    """Pick the successor with the highest U (or U*C); random when nothing applies.

    Ties go to the higher count, then the lower action id, then the earlier transition.
    """
    key = make_key(history, config.cs)
    match = candidate_transitions(graph, key, config) if key is not None else None
    if match is None or not match.transitions:
        action = random_action(rng)
        trace = DecisionTrace(mode="random", action=action)
        if match is not None:
            trace.matched_key = match.key
            trace.similarity = match.similarity
        return action, trace

    candidates = [Candidate(t.successor, t.utility, t.count, config.score(t)) for t in match.transitions]
    chosen = max(candidates, key=lambda c: (c.score, c.count, -c.successor.action))
    return chosen.successor.action, DecisionTrace(
        mode=match.mode,
        action=chosen.successor.action,
        matched_key=match.key,
        similarity=match.similarity,
        candidates=candidates,
        chosen=chosen,
    )
