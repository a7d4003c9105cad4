import logging
import tomllib
from pathlib import Path

import tomli_w
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from src.agents.schemas import AgentKind, SamplingParams
from src.core.config import settings
from src.core.exceptions import ConfigurationError
from src.games.base import PlayerRole
from src.games.registry import GAME_NAMES
from src.judge.schemas import JudgeKind
from src.protocol.schemas import ShapingConfig
from src.training.schemas import GrpoConfig

logger = logging.getLogger(__name__)


class EndpointConfig(BaseModel):
    url: str = Field(default_factory=lambda: settings.endpoint)
    model: str = Field(default_factory=lambda: settings.model)
    api_key: str = Field(default_factory=lambda: settings.api_key)
    timeout_sec: float = Field(default_factory=lambda: settings.request_timeout_sec)
    max_retries: int = Field(default_factory=lambda: settings.max_retries)
    max_in_flight: int = Field(default_factory=lambda: settings.max_in_flight)


class AgentSpec(BaseModel):
    kind: AgentKind = AgentKind.SCRIPTED
    # scripted agents: an opponent spec such as "mcts:100"; empty means the rule agent
    bot: str = ""
    temperature: float | None = Field(default=None, gt=0.0)
    checkpoint: str = ""
    option_cap: int = Field(default=256, ge=1)
    format_retries: int = Field(default=2, ge=0)


class JudgeSpec(BaseModel):
    kind: JudgeKind = JudgeKind.EXACT_MATCH
    model: str = ""
    parse_retries: int = Field(default=2, ge=0)
    fallback: float = Field(default=0.0, ge=0.0, le=1.0)


class RunConfig(BaseModel):
    name: str = "run"
    game: str
    first: AgentSpec = Field(default_factory=lambda: AgentSpec(kind=AgentKind.TABULAR))
    second: AgentSpec = Field(default_factory=AgentSpec)
    shaping: ShapingConfig = Field(default_factory=ShapingConfig)
    grpo: GrpoConfig = Field(default_factory=GrpoConfig)
    sampling: SamplingParams = Field(default_factory=SamplingParams)
    judge: JudgeSpec = Field(default_factory=JudgeSpec)
    endpoint: EndpointConfig = Field(default_factory=EndpointConfig)
    micro_rollouts: int = Field(default=2, ge=1)
    master_seed: int = 0
    batch_size: int = Field(default=128, ge=1)
    eval_games: int = Field(default=500, ge=1)
    validation_every: int = Field(default=10, ge=1)
    validation_games: int = Field(default=100, ge=1)
    validation_opponent: str = "random"
    patience: int = Field(default=5, ge=1)
    run_root: str = Field(default_factory=lambda: settings.run_root)

    @field_validator("game")
    @classmethod
    def check_game(cls, value: str) -> str:
        if value not in GAME_NAMES:
            raise ValueError(f"unknown game '{value}', expected one of {', '.join(GAME_NAMES)}")
        return value

    @model_validator(mode="after")
    def check_learnable(self) -> "RunConfig":
        if self.first.kind == AgentKind.SCRIPTED and self.second.kind == AgentKind.SCRIPTED:
            raise ValueError("at least one role must be played by a learnable agent")
        return self

    def agent_spec(self, role: PlayerRole) -> AgentSpec:
        return self.first if role is PlayerRole.FIRST else self.second


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
        return RunConfig.model_validate(data)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file {path} not found") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid TOML: {exc}") from exc
    except ValidationError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc


def dump_run_config(config: RunConfig) -> str:
    return tomli_w.dumps(config.model_dump(mode="json", exclude_none=True))


def save_run_config(config: RunConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_run_config(config), encoding="utf-8")
    return path
