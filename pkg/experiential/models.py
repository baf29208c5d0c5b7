from typing import List, Optional

from pydantic import BaseModel

from .transition_graph import GraphStats


class GameRecord(BaseModel):
    """One line of the game log"""
    run_id: str
    seed: int
    game: int
    score: int
    steps: int
    frames_cumulative: int
    pos_events: int
    neg_events: int


class CandidateRecord(BaseModel):
    successor: List[int]
    U: int
    C: int
    score: float


class TraceRecord(BaseModel):
    """One line of the decision trace: the matched key, every scored candidate and the winner"""
    game: int
    step: int
    mode: str
    action: int
    matched_key: Optional[List[List[int]]] = None
    similarity: Optional[float] = None
    candidates: List[CandidateRecord] = []
    chosen: Optional[List[int]] = None


class EventRecord(BaseModel):
    """One recorded transition of the learning event log; event numbers the feedback events of a game"""
    game: int
    event: int
    step: int
    key: List[List[int]]
    successor: List[int]
    delta: int


class RunSummary(BaseModel):
    run_id: str
    agent: str
    seed: int
    games: int
    mean: float = 0.0
    max: float = 0.0
    min: float = 0.0
    total_frames: int = 0
    steps_per_second: float = 0.0
    quick_learner_game: Optional[int] = None
    model: Optional[GraphStats] = None


class SweepRow(BaseModel):
    cell: int
    seed: int
    cs: Optional[int] = None
    lm: Optional[int] = None
    sr: Optional[bool] = None
    cu: Optional[bool] = None
    ea: Optional[bool] = None
    sc: Optional[int] = None
    ss: Optional[float] = None
    tu: Optional[float] = None
    tc: Optional[int] = None
    games: Optional[int] = None
    mean: Optional[float] = None
    max: Optional[float] = None
    min: Optional[float] = None
    total_frames: Optional[int] = None
    error: str = ""
