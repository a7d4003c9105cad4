from enum import StrEnum

from pydantic import BaseModel, Field

from src.games.base import PlayerRole
from src.judge.schemas import TurnCotScore
from src.protocol.schemas import FormatErrorKind, OutcomeStatus, StructuredOutput


class Termination(StrEnum):
    NATURAL = "natural"
    INVALID_ACTION = "invalid_action"
    ABORTED = "aborted"


class TurnRecord(BaseModel):
    trajectory_id: str
    turn: int
    role: PlayerRole
    state_key: str
    prompt: str
    raw_text: str
    status: OutcomeStatus
    output: StructuredOutput | None = None
    error_kind: FormatErrorKind | None = None
    move_id: int | None = None
    action_text: str | None = None
    # reward of the transition for (First, Second)
    env_rewards: tuple[float, float] = (0.0, 0.0)
    shaping_reward: float = 0.0
    length_penalty: float = 0.0
    response_length: int = 0
    logprob: float | None = None
    option_id: int | None = None
    policy_version: int | None = None
    retries: int = 0
    is_mainstream: bool = True
    group_id: str | None = None

    @property
    def env_reward(self) -> float:
        return self.env_rewards[self.role]

    @property
    def total_reward(self) -> float:
        return self.env_reward + self.shaping_reward + self.length_penalty


class Trajectory(BaseModel):
    trajectory_id: str
    game: str
    seed: int
    records: list[TurnRecord] = Field(default_factory=list)
    returns: tuple[float, float] = (0.0, 0.0)
    termination: Termination = Termination.NATURAL
    agents: tuple[str, str] = ("", "")

    @property
    def history(self) -> list[str]:
        return [r.action_text for r in self.records if r.move_id is not None]

    def turns_of(self, role: PlayerRole) -> list[TurnRecord]:
        return [r for r in self.records if r.role == role]


class GroupSample(BaseModel):
    sample_id: int
    is_primary: bool
    raw_text: str
    status: OutcomeStatus
    output: StructuredOutput | None = None
    move_id: int | None = None
    logprob: float | None = None
    option_id: int | None = None
    cot: TurnCotScore | None = None


class MicroRolloutGroup(BaseModel):
    group_id: str
    trajectory_id: str
    turn: int
    role: PlayerRole
    state_key: str
    policy_version: int | None = None
    samples: list[GroupSample] = Field(default_factory=list)
    scored: bool = False
    failure: str | None = None

    @property
    def primary(self) -> GroupSample:
        return next(s for s in self.samples if s.is_primary)

    def cot_values(self) -> list[float | None]:
        return [s.cot.value if s.cot is not None else None for s in self.samples]
