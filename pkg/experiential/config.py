import os
from typing import Any, Dict, List, Literal, Mapping, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .decision_policy import PolicyConfig
from .exceptions import ConfigError
from .learner import LearnerConfig
from .state_space import EncodingConfig


class Config:
    # Logging configuration
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_EVERY = int(os.getenv('LOG_EVERY', 10))

    # Experiment defaults
    DEFAULT_FRAME_CAP = int(os.getenv('DEFAULT_FRAME_CAP', 18_000))
    SWEEP_JOBS = int(os.getenv('SWEEP_JOBS', 1))


AgentKind = Literal["automated", "random", "model"]

UNSET = ("", "none", "null")


class HyperParameters(BaseModel):
    """The nine model hyper-parameters, with the defaults found best in systematic runs"""
    model_config = ConfigDict(extra="forbid")

    cs: int = Field(2, ge=1)
    lm: int = Field(2, ge=0, le=2)
    sr: bool = True
    cu: bool = False
    ea: bool = False
    sc: int = Field(2, ge=1)
    ss: float = Field(0.9, ge=-1.0, le=1.0)
    tu: Optional[float] = 0
    tc: int = Field(1, ge=1)

    @field_validator("tu", mode="before")
    @classmethod
    def unset_threshold(cls, value):
        if isinstance(value, str) and value.strip().lower() in UNSET:
            return None
        return value

    @property
    def encoding(self) -> EncodingConfig:
        return EncodingConfig(sr=self.sr, ea=self.ea)

    @property
    def learner_config(self) -> LearnerConfig:
        return LearnerConfig(cs=self.cs, lm=self.lm, sr=self.sr, ea=self.ea)

    @property
    def policy_config(self) -> PolicyConfig:
        return PolicyConfig(cs=self.cs, ss=self.ss, sc=self.sc, tu=self.tu, tc=self.tc, cu=self.cu)


class RunConfig(HyperParameters):
    agent: AgentKind = "model"
    games: int = Field(100, ge=0)
    seed: Optional[int] = Field(None, ge=0)
    frame_cap: int = Field(default_factory=lambda: Config.DEFAULT_FRAME_CAP, ge=1, le=108_000)
    run_id: str = "run"
    window: int = Field(30, ge=1)
    quick_learner_score: float = 400
    render: bool = False

    # Files
    load_model: Optional[str] = None
    save_model: Optional[str] = None
    log: Optional[str] = None
    trace: Optional[str] = None
    event_log: Optional[str] = None

    @field_validator("seed", "load_model", "save_model", "log", "trace", "event_log", mode="before")
    @classmethod
    def unset_value(cls, value):
        if isinstance(value, str) and value.strip().lower() in UNSET:
            return None
        return value


def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def load_config_file(path) -> Dict[str, Optional[str]]:
    """Read a flat key=value file; keys are case-insensitive and '-' equals '_'"""
    if not os.path.exists(path):
        raise ConfigError("config", f"config file {path} not found")
    return {normalize_key(k): v for k, v in dotenv_values(path).items()}


def validation_error(e: ValidationError) -> ConfigError:
    error = e.errors()[0]
    key = str(error["loc"][0]) if error["loc"] else "config"
    return ConfigError(key, error["msg"])


def build_run_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Config file values, then overrides (CLI flags) on top; None overrides are ignored"""
    values: Dict[str, Any] = {}
    if path:
        values.update(load_config_file(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[normalize_key(key)] = value
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise validation_error(e) from e


def parse_grid(items: List[str], path: Optional[str] = None) -> Dict[str, List[str]]:
    """Sweep axes from 'key=v1,v2' items and/or a key=value grid file, in the order given"""
    grid: Dict[str, List[str]] = {}
    if path:
        for key, value in load_config_file(path).items():
            grid[key] = [v.strip() for v in (value or "").split(",") if v.strip()]
    for item in items:
        if "=" not in item:
            raise ConfigError(item, "grid axis must look like key=v1,v2")
        key, _, value = item.partition("=")
        grid[normalize_key(key)] = [v.strip() for v in value.split(",") if v.strip()]
    unknown = [key for key in grid if key not in HyperParameters.model_fields and key not in RunConfig.model_fields]
    if unknown:
        raise ConfigError(unknown[0], "not a configuration key")
    return grid


def parse_seeds(text: str) -> List[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise ConfigError("seeds", f"expected comma-separated integers, got {text!r}") from e
