import logging
from typing import Tuple

import numpy as np

from .breakout_env import (
    BRICK_COLUMNS,
    BRICK_ROWS,
    BRICK_TOP,
    BRICK_WIDTH,
    FIELD_HEIGHT,
    FIELD_WIDTH,
    PADDLE_ROW,
)
from .exceptions import ContractViolation
from .state_space import NO_BALL

logger = logging.getLogger(__name__)


def _mean_column(columns: np.ndarray) -> int:
    if columns.size == 0:
        return NO_BALL
    return int(columns.sum() // columns.size)


def transform(observation: np.ndarray) -> Tuple[int, int]:
    """Horizontal coordinates (ball_x, paddle_x) of the ball and paddle pixel clouds.

    Zoning: the paddle is whatever occupies the paddle row of the paddle band; in
    the brick rows, a cell is brick only when its whole brick slot is filled.
    Everything else that is occupied belongs to the ball. ball_x is -1 when the
    ball is not in play.
    """
    if observation.shape != (FIELD_HEIGHT, FIELD_WIDTH):
        raise ContractViolation(
            f"observation of shape {observation.shape}, expected {(FIELD_HEIGHT, FIELD_WIDTH)}")
    occupied = observation != 0
    paddle_x = _mean_column(np.flatnonzero(occupied[PADDLE_ROW]))

    ball = occupied.copy()
    ball[PADDLE_ROW] = False
    slots = ball[BRICK_TOP:BRICK_TOP + BRICK_ROWS].reshape(BRICK_ROWS, BRICK_COLUMNS, BRICK_WIDTH)
    slots[slots.all(axis=2)] = False
    _, columns = np.nonzero(ball)
    return _mean_column(columns), paddle_x
