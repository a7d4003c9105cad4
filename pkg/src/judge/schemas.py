from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field

from src.games.base import PlayerRole


class PairKind(StrEnum):
    PAST = "past"
    RECURSIVE = "recursive"
    FUTURE = "future"


class JudgeKind(StrEnum):
    EXACT_MATCH = "exact_match"
    LLM = "llm"


class AlignmentPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: PairKind
    turn: int = 0
    ego_role: PlayerRole = PlayerRole.FIRST
    prediction_text: str
    ground_truth_text: str
    # where each text came from, e.g. "sample:3:OpponentIntent" / "mainstream:2:MyIntent"
    prediction_source: str = ""
    ground_truth_source: str = ""


class JudgePairRecord(AlignmentPair):
    """Line of a judge-compare pairs file."""

    game: str


class ComponentScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: PairKind
    value: float = Field(ge=0.0, le=1.0)
    judge: str
    raw_text: str | None = None
    fallback: bool = False


class TurnCotScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    turn: int
    sample_id: int
    components: list[ComponentScore] = Field(default_factory=list)
    value: float | None = None

    @property
    def defined(self) -> bool:
        return self.value is not None
