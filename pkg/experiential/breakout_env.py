import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .exceptions import ContractViolation

logger = logging.getLogger(__name__)

NOOP, FIRE, LEFT, RIGHT = 0, 1, 2, 3

FIELD_WIDTH = 72
FIELD_HEIGHT = 40
BRICK_ROWS = 6
BRICK_COLUMNS = 18
BRICK_WIDTH = 4
BRICK_TOP = 6
ROW_VALUES = (7, 7, 4, 4, 1, 1)
SCREEN_VALUE = BRICK_COLUMNS * sum(ROW_VALUES)
MAX_SCORE = 2 * SCREEN_VALUE
PADDLE_ROW = 38
PADDLE_WIDTH = 6
PADDLE_SPEED = 2
LOSS_ROW = 39
SERVE_ROW = 20
SERVE_COLUMNS = (8, 63)
LIVES = 5
FRAME_CAP = 18_000
MAX_FRAME_CAP = 108_000


@dataclass
class Ball:
    x: int
    y: int
    dx: int
    dy: int


@dataclass
class GameState:
    bricks: np.ndarray = field(default_factory=lambda: np.ones((BRICK_ROWS, BRICK_COLUMNS), dtype=bool))
    screen: int = 1
    ball: Optional[Ball] = None
    paddle: int = (FIELD_WIDTH - PADDLE_WIDTH) // 2
    lives: int = LIVES
    score: int = 0
    frame: int = 0
    frame_cap: int = FRAME_CAP
    terminated: bool = False
    truncated: bool = False

    @property
    def done(self) -> bool:
        return self.terminated or self.truncated


@dataclass
class StepResult:
    observation: np.ndarray
    points: int = 0
    life_lost: bool = False
    terminated: bool = False
    truncated: bool = False


def render(state: GameState) -> np.ndarray:
    """Occupancy grid of the field: 1 for brick, paddle and ball cells, 0 elsewhere"""
    grid = np.zeros((FIELD_HEIGHT, FIELD_WIDTH), dtype=np.int8)
    grid[BRICK_TOP:BRICK_TOP + BRICK_ROWS] = np.repeat(state.bricks, BRICK_WIDTH, axis=1)
    grid[PADDLE_ROW, state.paddle:state.paddle + PADDLE_WIDTH] = 1
    if state.ball is not None:
        grid[state.ball.y, state.ball.x] = 1
    return grid


def render_text(state: GameState) -> str:
    """Plain-text frame dump, one character per cell"""
    grid = render(state)
    rows = ["".join("#" if cell else "." for cell in row) for row in grid]
    if state.ball is not None:
        row = rows[state.ball.y]
        rows[state.ball.y] = row[:state.ball.x] + "o" + row[state.ball.x + 1:]
    header = f"frame={state.frame} score={state.score} lives={state.lives} screen={state.screen}"
    return "\n".join([header] + rows)


class BreakoutEnv:
    """Deterministic brick-breaking game; a game is a pure function of (seed, actions).

    The ball moves one cell diagonally per step. It reflects off the side walls and
    the ceiling, bounces off bricks (removing them) and off the paddle, whose left,
    middle and right thirds send it left, straight on or right. A ball that enters
    the paddle row beside the paddle drops to the loss row and costs a life.
    """

    def __init__(self, frame_cap: int = FRAME_CAP, render_mode: Optional[str] = None):
        if not 1 <= frame_cap <= MAX_FRAME_CAP:
            raise ContractViolation(f"frame cap must be within 1..{MAX_FRAME_CAP}, got {frame_cap}")
        if render_mode not in (None, "text"):
            raise ContractViolation(f"unknown render mode {render_mode!r}")
        self.frame_cap = frame_cap
        self.render_mode = render_mode
        self.state = GameState(frame_cap=frame_cap)
        self.rng = np.random.default_rng(0)

    def reset(self, seed: int) -> Tuple[GameState, np.ndarray]:
        self.rng = np.random.default_rng(seed)
        self.state = GameState(frame_cap=self.frame_cap)
        return self.state, self._observe()

    def _observe(self) -> np.ndarray:
        if self.render_mode == "text":
            logger.debug("\n" + render_text(self.state))
        return render(self.state)

    def _serve(self) -> None:
        low, high = SERVE_COLUMNS
        x = int(self.rng.integers(low, high + 1))
        dx = -1 if self.rng.integers(2) == 0 else 1
        self.state.ball = Ball(x=x, y=SERVE_ROW, dx=dx, dy=1)

    def step(self, action: int) -> StepResult:
        state = self.state
        if state.done:
            raise ContractViolation("step called on a finished game")
        if action not in (NOOP, FIRE, LEFT, RIGHT):
            raise ContractViolation(f"unknown action {action}")

        if action == LEFT:
            state.paddle = max(0, state.paddle - PADDLE_SPEED)
        elif action == RIGHT:
            state.paddle = min(FIELD_WIDTH - PADDLE_WIDTH, state.paddle + PADDLE_SPEED)

        points = 0
        life_lost = False
        if state.ball is None:
            if action == FIRE:
                self._serve()
        else:
            points, life_lost = self._advance_ball()

        state.score += points
        state.frame += 1
        if life_lost:
            state.lives -= 1
        if state.lives == 0 or state.score >= MAX_SCORE:
            state.terminated = True
        if points and not state.bricks.any():
            if state.screen == 1:
                state.bricks[:] = True
                state.screen = 2
                state.ball = None
            else:
                state.terminated = True
        if not state.terminated and state.frame >= state.frame_cap:
            state.truncated = True

        return StepResult(
            observation=self._observe(),
            points=points,
            life_lost=life_lost,
            terminated=state.terminated,
            truncated=state.truncated,
        )

    def _advance_ball(self) -> Tuple[int, bool]:
        state = self.state
        ball = state.ball
        # Walls first, then bricks
        nx = ball.x + ball.dx
        if nx < 0 or nx >= FIELD_WIDTH:
            ball.dx = -ball.dx
            nx = ball.x + ball.dx
        ny = ball.y + ball.dy
        if ny < 0:
            ball.dy = -ball.dy
            ny = ball.y + ball.dy

        if ny == PADDLE_ROW:
            offset = nx - state.paddle
            if not 0 <= offset < PADDLE_WIDTH:
                state.ball = None
                return 0, True
            ball.dy = -1
            if offset < PADDLE_WIDTH // 3:
                ball.dx = -1
            elif offset >= 2 * PADDLE_WIDTH // 3:
                ball.dx = 1
            ball.x = nx
            return 0, False

        ball.x, ball.y = nx, ny
        row = ny - BRICK_TOP
        if 0 <= row < BRICK_ROWS and state.bricks[row, nx // BRICK_WIDTH]:
            state.bricks[row, nx // BRICK_WIDTH] = False
            ball.dy = -ball.dy
            return ROW_VALUES[row], False
        return 0, False
