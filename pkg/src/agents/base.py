import logging
from abc import ABC, abstractmethod

import numpy as np

from src.agents.schemas import ActContext, AgentKind, AgentResult
from src.core.exceptions import RoleMismatch
from src.games.base import PlayerRole
from src.protocol.parser import parse_structured_output, serialize_structured_output
from src.protocol.schemas import StructuredOutput

logger = logging.getLogger(__name__)


class Agent(ABC):
    kind: AgentKind
    # whether the agent's turns get micro-rollouts and advantages
    learnable: bool = False

    def __init__(self, role: PlayerRole) -> None:
        self.role = role

    async def act(self, ctx: ActContext, rng: np.random.Generator) -> AgentResult:
        if ctx.role != self.role:
            raise RoleMismatch(f"{self.describe()} plays {self.role.label}, asked to act as {ctx.role.label}")
        return await self.respond(ctx, rng)

    @abstractmethod
    async def respond(self, ctx: ActContext, rng: np.random.Generator) -> AgentResult: ...

    @property
    def policy_version(self) -> int | None:
        return None

    def describe(self) -> str:
        return f"{self.kind}:{self.role.label}"


def compose_response(
    ctx: ActContext,
    *,
    opponent_intent: str,
    opponent_prediction: str,
    my_intent: str,
    action: str,
    my_prediction: str,
    think_text: str = "",
) -> str:
    summary = (
        f"{ctx.role.label} to move in {ctx.game.name} with {len(ctx.legal)} legal moves "
        f"and plays {action}."
    )
    output = StructuredOutput(
        think_text=think_text,
        state_summary=summary,
        opponent_intent=opponent_intent,
        opponent_prediction=opponent_prediction,
        my_intent=my_intent,
        my_action=action,
        my_prediction=my_prediction,
        answer_text=action,
    )
    return serialize_structured_output(output)


def result_from_text(ctx: ActContext, raw_text: str, **kwargs) -> AgentResult:
    outcome = parse_structured_output(raw_text, ctx.legal, ctx.require_all_fields)
    return AgentResult(raw_text=raw_text, outcome=outcome, **kwargs)
