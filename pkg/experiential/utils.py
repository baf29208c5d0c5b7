import os
import logging
from pathlib import Path
from typing import Dict, Iterator, Optional, Tuple, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from .exceptions import LogFormatError

logger = logging.getLogger(__name__)

T = TypeVar("T", bound=BaseModel)


def ensure_parent_dir_exists(path) -> None:
    """Ensure the directory holding path exists"""
    parent = Path(path).parent
    if str(parent):
        os.makedirs(parent, exist_ok=True)


class JsonLinesWriter:
    """Append-only JSON-lines file, one object per line"""

    def __init__(self, path):
        self.path = Path(path)
        ensure_parent_dir_exists(self.path)
        self._file = open(self.path, "w", encoding="utf-8")

    def write(self, record: BaseModel) -> None:
        self._file.write(record.model_dump_json() + "\n")

    def close(self) -> None:
        self._file.close()

    def __enter__(self) -> 'JsonLinesWriter':
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def open_writer(path) -> Optional[JsonLinesWriter]:
    return JsonLinesWriter(path) if path else None


def read_json_lines(path, model: Type[T]) -> Iterator[T]:
    """Parse a JSON-lines file into model instances; blank lines are skipped"""
    with open(path, "rb") as f:
        for line_number, raw in enumerate(f, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise LogFormatError(str(path), line_number, f"not valid UTF-8: {e.reason}") from e
            if not line.strip():
                continue
            try:
                yield model.model_validate_json(line)
            except ValidationError as e:
                raise LogFormatError(str(path), line_number, e.errors()[0]["msg"]) from e


def entropy_seed() -> int:
    """A fresh master seed for runs whose seed is not fixed"""
    return int(np.random.SeedSequence().entropy % (2 ** 32))


def derive_game_seeds(master_seed: int, game: int) -> Tuple[int, np.random.Generator]:
    """Split a master seed into (environment seed, fallback rng) for one game index"""
    sequence = np.random.SeedSequence([master_seed, game])
    env_entropy, policy_sequence = sequence.spawn(2)
    env_seed = int(env_entropy.generate_state(1)[0])
    return env_seed, np.random.default_rng(policy_sequence)


def summarize_scores(scores) -> Dict[str, float]:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        return {"mean": 0.0, "max": 0.0, "min": 0.0}
    return {"mean": float(scores.mean()), "max": float(scores.max()), "min": float(scores.min())}
