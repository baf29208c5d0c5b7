import logging
from collections import deque
from typing import Optional, Sequence, Tuple

import numpy as np

from .breakout_env import FIRE, LEFT, NOOP, RIGHT, BreakoutEnv
from .decision_policy import DecisionTrace, PolicyConfig, random_action, select_action
from .learner import ExperientialLearner, feedback_delta
from .models import GameRecord
from .perception import transform
from .state_space import NO_BALL, EncodingConfig, StateVector
from .transition_graph import TransitionGraph
from .utils import JsonLinesWriter

logger = logging.getLogger(__name__)


def automated_act(features: Tuple[int, int]) -> int:
    """Rule-based play: serve when there is no ball, otherwise follow the ball's column"""
    ball_x, paddle_x = features
    if ball_x == NO_BALL:
        return FIRE
    if paddle_x < ball_x:
        return RIGHT
    if paddle_x > ball_x:
        return LEFT
    return NOOP


class Agent:
    kind = "agent"
    context_size = 1

    def act(self, history: Sequence[StateVector],
            rng: np.random.Generator) -> Tuple[int, Optional[DecisionTrace]]:
        raise NotImplementedError


class RandomAgent(Agent):
    kind = "random"

    def act(self, history, rng):
        return random_action(rng), None


class AutomatedAgent(Agent):
    kind = "automated"

    def act(self, history, rng):
        return automated_act(history[-1].features), None


class ModelBasedAgent(Agent):
    """Plays by querying the transition graph; learning is the learner's business"""
    kind = "model"

    def __init__(self, graph: TransitionGraph, config: PolicyConfig):
        self.graph = graph
        self.config = config
        self.context_size = config.cs

    def act(self, history, rng):
        return select_action(self.graph, history, self.config, rng)


def run_game(env: BreakoutEnv, env_seed: int, agent: Agent, rng: np.random.Generator,
             learner: Optional[ExperientialLearner] = None, game: int = 1, run_id: str = "run",
             master_seed: int = 0, frames_before: int = 0,
             trace_log: Optional[JsonLinesWriter] = None,
             encoding: Optional[EncodingConfig] = None) -> GameRecord:
    """Play one game: observe, transform, learn on feedback, decide; repeat until the game ends.

    Each state carries the observation and feedback produced by a step together
    with the action executed in that step.
    """
    encoding = encoding or EncodingConfig()
    _, observation = env.reset(env_seed)
    state = StateVector(transform(observation), (0, 0), NOOP)
    recent = deque([state], maxlen=max(agent.context_size, 1))
    if learner is not None:
        learner.start_game(game)
        learner.observe(state)

    steps = pos_events = neg_events = 0
    while True:
        action, trace = agent.act(tuple(recent), rng)
        if trace is not None and trace_log is not None:
            trace_log.write(trace.to_record(steps, encoding, game))

        result = env.step(action)
        steps += 1
        feedback = (1 if result.points > 0 else 0, 1 if result.life_lost else 0)
        delta = feedback_delta(feedback, state.feedback)
        state = StateVector(transform(result.observation), feedback, action)
        recent.append(state)

        if delta > 0:
            pos_events += 1
        elif delta < 0:
            neg_events += 1
        if learner is not None:
            learner.observe(state)
            if delta and agent.kind == "automated":
                learner.imitation_record(delta)
            elif delta:
                learner.on_feedback(delta)

        if result.terminated or result.truncated:
            break

    if learner is not None:
        learner.end_game()
    return GameRecord(
        run_id=run_id,
        seed=master_seed,
        game=game,
        score=env.state.score,
        steps=steps,
        frames_cumulative=frames_before + steps,
        pos_events=pos_events,
        neg_events=neg_events,
    )
