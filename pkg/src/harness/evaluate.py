import asyncio
import logging
import math
from collections.abc import Mapping, Sequence

import numpy as np
from pydantic import BaseModel

from src.agents.base import Agent
from src.core.config import settings
from src.core.exceptions import RemoteUnavailable
from src.games.base import Game, PlayerRole, RewardSemantics
from src.protocol.schemas import ShapingConfig
from src.rollout.engine import collect_trajectory
from src.rollout.schemas import Termination, Trajectory

logger = logging.getLogger(__name__)

Z_95 = 1.96


class EvalReport(BaseModel):
    game: str
    opponent: str
    role: PlayerRole
    games: int
    mean_returns: tuple[float, float]
    stderr: tuple[float, float]
    normalized: float
    ci95: float
    wins: int | None = None
    draws: int | None = None
    losses: int | None = None
    invalid_terminations: int = 0

    def render(self) -> str:
        lines = [
            f"game: {self.game}  role: {self.role.label}  opponent: {self.opponent}  games: {self.games}",
        ]
        for role in PlayerRole:
            lines.append(f"  {role.label:<6} mean return {self.mean_returns[role]:+.4f} ± {self.stderr[role]:.4f}")
        lines.append(f"  normalized score {self.normalized:.2f} (95% CI ± {self.ci95:.2f})")
        if self.wins is not None:
            lines.append(f"  wins/draws/losses {self.wins}/{self.draws}/{self.losses}")
        if self.invalid_terminations:
            lines.append(f"  invalid terminations {self.invalid_terminations}")
        return "\n".join(lines)


def scored_returns(game: Game, trajectory: Trajectory) -> tuple[float, float]:
    """
    Returns used for evaluation. An invalid output in an adversarial game is a
    loss for the offender at the game's minimum; cooperative games keep the
    score reached so far.
    """
    if trajectory.termination != Termination.INVALID_ACTION or game.spec.reward_semantics == RewardSemantics.SHARED:
        return trajectory.returns
    offender = trajectory.records[-1].role
    scored = [0.0, 0.0]
    scored[offender] = game.spec.min_return
    scored[offender.other] = -game.spec.min_return
    return scored[0], scored[1]


def summarize(
    game: Game,
    trajectories: Sequence[Trajectory],
    role: PlayerRole,
    opponent: str,
) -> EvalReport:
    returns = np.array([scored_returns(game, t) for t in trajectories], dtype=float)
    count = len(returns)
    means = returns.mean(axis=0)
    stderr = returns.std(axis=0, ddof=1) / math.sqrt(count) if count > 1 else np.zeros(2)
    span = game.spec.max_return - game.spec.min_return
    report = EvalReport(
        game=game.name,
        opponent=opponent,
        role=role,
        games=count,
        mean_returns=(float(means[0]), float(means[1])),
        stderr=(float(stderr[0]), float(stderr[1])),
        normalized=game.spec.normalize(float(means[role])),
        ci95=float(100.0 * Z_95 * stderr[role] / span),
        invalid_terminations=sum(t.termination == Termination.INVALID_ACTION for t in trajectories),
    )
    if game.spec.reward_semantics == RewardSemantics.ZERO_SUM:
        own = returns[:, role]
        report.wins = int((own > 0).sum())
        report.draws = int((own == 0).sum())
        report.losses = int((own < 0).sum())
    return report


async def evaluate(
    game: Game,
    agents: Mapping[PlayerRole, Agent],
    seeds: Sequence[int],
    role: PlayerRole = PlayerRole.FIRST,
    opponent: str = "",
    shaping: ShapingConfig | None = None,
    prefix: str = "eval-",
    workers: int | None = None,
) -> EvalReport:
    """
    Play one seeded game per seed with fixed seats and report ``role``'s results.
    Games run concurrently, at most ``workers`` at a time.
    """
    if not seeds:
        raise ValueError("evaluation needs at least one game")
    shaping = shaping or ShapingConfig()
    slots = asyncio.Semaphore(workers or settings.max_in_flight)

    async def play(seed: int) -> Trajectory:
        async with slots:
            return await collect_trajectory(game, agents, seed, shaping, f"{prefix}{game.name}-{seed}")

    results = await asyncio.gather(*(play(seed) for seed in seeds), return_exceptions=True)
    trajectories = [r for r in results if isinstance(r, Trajectory)]
    for result in results:
        if isinstance(result, RemoteUnavailable):
            logger.error(f"Evaluation stopped after {len(trajectories)} of {len(seeds)} games")
        if isinstance(result, BaseException):
            raise result
    return summarize(game, trajectories, role, opponent or agents[role.other].describe())

