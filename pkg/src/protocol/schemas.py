from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Bracketed field names as they appear in responses, mapped to model attributes.
FIELD_NAMES: dict[str, str] = {
    "state_summary": "state_summary",
    "OpponentIntent": "opponent_intent",
    "OpponentPrediction": "opponent_prediction",
    "MyIntent": "my_intent",
    "MyAction": "my_action",
    "MyPrediction": "my_prediction",
}


class FormatErrorKind(StrEnum):
    MALFORMED_TAGS = "malformed_tags"
    TRAILING_TEXT = "trailing_text"
    MISSING_FIELDS = "missing_fields"
    MISSING_ACTION = "missing_action"


class OutcomeStatus(StrEnum):
    PARSED = "parsed"
    FORMAT_ERROR = "format_error"
    INVALID_ACTION = "invalid_action"


class StructuredOutput(BaseModel):
    model_config = ConfigDict(frozen=True)

    think_text: str = ""
    state_summary: str | None = None
    opponent_intent: str | None = None
    opponent_prediction: str | None = None
    my_intent: str | None = None
    my_action: str | None = None
    my_prediction: str | None = None
    answer_text: str = ""

    def field(self, name: str) -> str | None:
        return getattr(self, FIELD_NAMES[name])

    def missing_fields(self) -> list[str]:
        return [name for name in FIELD_NAMES if not self.field(name)]


class ParseOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: OutcomeStatus
    output: StructuredOutput | None = None
    move_id: int | None = None
    error_kind: FormatErrorKind | None = None
    invalid_text: str | None = None
    missing_fields: list[str] = Field(default_factory=list)
    # whitespace-delimited word count of the raw response
    length: int = 0

    @property
    def parsed(self) -> bool:
        return self.status is OutcomeStatus.PARSED


class ShapingConfig(BaseModel):
    format_bonus: float = 0.05
    invalid_penalty: float = -10.0
    format_error_penalty: float = -10.0
    length_alpha: float = 0.5
    l_min: int = 11
    l_max: int = 2048
    require_all_fields: bool = True

    @model_validator(mode="after")
    def check_length_bounds(self) -> "ShapingConfig":
        if self.l_max <= self.l_min:
            raise ValueError("l_max must be greater than l_min")
        return self
