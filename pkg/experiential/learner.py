import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

from .exceptions import ContractViolation
from .models import EventRecord
from .state_space import EncodingConfig, SequenceKey, StateVector, encode
from .transition_graph import TransitionGraph
from .utils import JsonLinesWriter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LearnerConfig:
    cs: int = 2
    lm: int = 2
    sr: bool = True
    ea: bool = False
    motivation_weights: Tuple[int, int] = (1, 1)

    def __post_init__(self):
        if self.cs < 1:
            raise ContractViolation(f"context size must be at least 1, got {self.cs}")
        if self.lm not in (0, 1, 2):
            raise ContractViolation(f"learning mode must be 0, 1 or 2, got {self.lm}")

    @property
    def encoding(self) -> EncodingConfig:
        return EncodingConfig(sr=self.sr, ea=self.ea)

    def learns(self, delta: int) -> bool:
        """LM gate: 0 never learns, 1 only on positive feedback, 2 on both"""
        return self.lm == 2 or (self.lm == 1 and delta > 0)


@dataclass
class EpisodeBuffer:
    """States since the last feedback event, preceded by the carried-over context"""
    history: List[StateVector] = field(default_factory=list)
    last_feedback_index: Optional[int] = None
    # Game step index of history[0]
    offset: int = 0

    def windows(self, cs: int) -> Iterator[Tuple[int, SequenceKey, StateVector]]:
        """(position, key of the cs states before it, successor) for every full window"""
        for i in range(cs, len(self.history)):
            yield i, SequenceKey(tuple(self.history[i - cs:i])), self.history[i]

    def flush(self, cs: int) -> None:
        self.last_feedback_index = self.offset + len(self.history) - 1
        dropped = max(0, len(self.history) - cs)
        self.history = self.history[dropped:]
        self.offset += dropped


@dataclass(frozen=True)
class RecordedTransition:
    step: int
    key: SequenceKey
    successor: StateVector
    delta: int


def observe(buffer: EpisodeBuffer, state: StateVector) -> EpisodeBuffer:
    buffer.history.append(state)
    return buffer


def feedback_delta(y_now: Tuple[int, int], y_prev: Tuple[int, int],
                   weights: Tuple[int, int] = (1, 1)) -> int:
    """Signed utility increment: +1 for positive feedback, -1 for negative feedback, else 0.

    Every flagged step is its own event, so two bricks on consecutive steps are two
    events and y_prev does not gate them. A negative event on the same step as a
    positive one wins.
    """
    if y_now[1]:
        return -weights[1]
    if y_now[0]:
        return weights[0]
    return 0


def on_feedback(buffer: EpisodeBuffer, graph: TransitionGraph, delta: int,
                config: LearnerConfig) -> List[RecordedTransition]:
    """Give every transition of the segment the same delta, then flush to the last CS states"""
    if delta not in (1, -1):
        raise ContractViolation(f"feedback delta must be +1 or -1, got {delta}")
    recorded = []
    if config.learns(delta):
        for i, key, successor in buffer.windows(config.cs):
            graph.record_transition(key, successor, delta)
            recorded.append(RecordedTransition(buffer.offset + i, key, successor, delta))
    buffer.flush(config.cs)
    return recorded


class ExperientialLearner:
    """Owns the episode buffer of one run and writes global feedback into the graph"""

    def __init__(self, graph: TransitionGraph, config: LearnerConfig,
                 event_log: Optional[JsonLinesWriter] = None):
        if graph.encoding != config.encoding:
            raise ContractViolation(
                f"graph encoding {graph.encoding} differs from learner encoding {config.encoding}")
        self.graph = graph
        self.config = config
        self.event_log = event_log
        self.buffer = EpisodeBuffer()
        self.game = 0
        self.events = 0

    @property
    def history(self) -> List[StateVector]:
        return self.buffer.history

    def start_game(self, game: int) -> None:
        self.game = game
        self.events = 0
        self.buffer = EpisodeBuffer()

    def observe(self, state: StateVector) -> None:
        observe(self.buffer, state)

    def on_feedback(self, delta: int) -> List[RecordedTransition]:
        recorded = on_feedback(self.buffer, self.graph, delta, self.config)
        self.events += 1
        if recorded:
            logger.debug(f"Game {self.game}: recorded {len(recorded)} transitions with delta {delta:+d}")
        if self.event_log is not None:
            encoding = self.config.encoding
            for r in recorded:
                self.event_log.write(EventRecord(
                    game=self.game,
                    event=self.events,
                    step=r.step,
                    key=[list(v) for v in r.key.encoded(encoding)],
                    successor=list(encode(r.successor, encoding)),
                    delta=r.delta,
                ))
        return recorded

    def imitation_record(self, delta: int) -> List[RecordedTransition]:
        """Record a rule-based agent's experience into the same model a learner later loads"""
        return self.on_feedback(delta)

    def end_game(self) -> None:
        """Drop the history at termination or truncation without learning"""
        self.buffer = EpisodeBuffer()
