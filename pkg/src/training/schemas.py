from enum import StrEnum

from pydantic import BaseModel, Field, model_validator

from src.games.base import PlayerRole


class AdvantageMode(StrEnum):
    NORMALIZED = "normalized"
    RAW = "raw"
    RETURN_ONLY = "return_only"


class LrSchedule(StrEnum):
    CONSTANT = "constant"
    COSINE = "cosine"


class KlAnchor(StrEnum):
    REFERENCE = "reference"
    OLD = "old"


class GrpoConfig(BaseModel):
    clip_eps: float = Field(default=0.2, gt=0.0)
    kl_coef: float = Field(default=0.15, ge=0.0)
    kl_anchor: KlAnchor = KlAnchor.REFERENCE
    dual_clip: float = Field(default=3.0, gt=1.0)
    omega: float = 0.2
    gamma: float = Field(default=1.0, ge=0.0, le=1.0)
    # stored for completeness; returns are plain Monte Carlo sums
    lam: float = 0.95
    learning_rate: float = Field(default=5e-6, gt=0.0)
    epochs: int = Field(default=1, ge=1)
    grad_clip: float = Field(default=1.0, gt=0.0)
    betas: tuple[float, float] = (0.9, 0.95)
    adam_eps: float = 1e-8
    weight_decay: float = Field(default=0.0, ge=0.0)
    lr_schedule: LrSchedule = LrSchedule.CONSTANT
    max_steps: int = Field(default=200, ge=1)
    std_floor: float = 1e-8
    advantage_mode: AdvantageMode = AdvantageMode.NORMALIZED
    train_on_micro_rollouts: bool = False

    @model_validator(mode="after")
    def check_betas(self) -> "GrpoConfig":
        if not all(0.0 <= b < 1.0 for b in self.betas):
            raise ValueError("Adam betas must lie in [0, 1)")
        return self

    @property
    def effective_omega(self) -> float:
        return 0.0 if self.advantage_mode == AdvantageMode.RETURN_ONLY else self.omega


class AdvantageRecord(BaseModel):
    trajectory_id: str
    turn: int
    sample_id: int = 0
    is_primary: bool = True
    role: PlayerRole
    state_key: str
    option_id: int
    old_logprob: float
    policy_version: int | None = None
    s_cot: float | None = None
    a_cot: float = 0.0
    a_return: float = 0.0
    a_hybrid: float = 0.0
    group_mean: float | None = None
    group_std: float | None = None
    batch_mean: float | None = None
    future_correct: bool | None = None


class TrainingBatch(BaseModel):
    role: PlayerRole
    version: int
    samples: list[AdvantageRecord] = Field(default_factory=list)

    def weights(self) -> list[float]:
        """1/G per trajectory and 1/K per turn of that trajectory."""
        per_trajectory: dict[str, int] = {}
        for sample in self.samples:
            per_trajectory[sample.trajectory_id] = per_trajectory.get(sample.trajectory_id, 0) + 1
        groups = len(per_trajectory)
        return [1.0 / (groups * per_trajectory[s.trajectory_id]) for s in self.samples]
