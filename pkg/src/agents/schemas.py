from dataclasses import dataclass
from enum import StrEnum

from pydantic import BaseModel, Field

from src.games.base import Game, GameState, Move, PlayerRole
from src.protocol.prompts import render_agent_prompt
from src.protocol.schemas import ParseOutcome


class AgentKind(StrEnum):
    SCRIPTED = "scripted"
    TABULAR = "tabular"
    REMOTE = "remote"


class SamplingParams(BaseModel):
    temperature: float = Field(default=0.5, gt=0.0)
    top_p: float = Field(default=0.9, gt=0.0, le=1.0)
    top_k: int = Field(default=100, ge=1)
    max_tokens: int = Field(default=2048, ge=1)


@dataclass(frozen=True, slots=True)
class ActContext:
    game: Game
    state: GameState
    role: PlayerRole
    observation: str
    prompt: str
    state_key: str
    legal: list[Move]
    prediction_labels: tuple[str, ...]
    require_all_fields: bool = True

    @classmethod
    def build(cls, game: Game, state: GameState, require_all_fields: bool = True) -> "ActContext":
        role = state.current
        observation = game.observation_text(state, role)
        return cls(
            game=game,
            state=state,
            role=role,
            observation=observation,
            prompt=render_agent_prompt(observation),
            state_key=game.information_state_key(state, role),
            legal=game.legal_moves(state),
            prediction_labels=game.prediction_labels(state),
            require_all_fields=require_all_fields,
        )


@dataclass(slots=True)
class AgentResult:
    raw_text: str
    outcome: ParseOutcome
    logprob: float | None = None
    option_id: int | None = None
    retries: int = 0
