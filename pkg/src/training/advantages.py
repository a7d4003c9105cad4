import logging
from collections.abc import Sequence

import numpy as np

from src.games.base import PlayerRole
from src.judge.schemas import PairKind
from src.rollout.schemas import MicroRolloutGroup, Trajectory
from src.training.schemas import AdvantageMode, AdvantageRecord, GrpoConfig

logger = logging.getLogger(__name__)


def cot_advantage(scores: Sequence[float | None], floor: float = 1e-8) -> list[float]:
    """Group-normalized CoT scores with population std; undefined scores map to 0."""
    defined = np.array([s for s in scores if s is not None], dtype=float)
    if len(defined) < 2:
        return [0.0] * len(scores)
    mean, std = defined.mean(), defined.std()
    if std < floor:
        return [0.0] * len(scores)
    return [0.0 if s is None else float((s - mean) / std) for s in scores]


def monte_carlo_returns(trajectory: Trajectory, role: PlayerRole, gamma: float = 1.0) -> list[float]:
    """
    Discounted suffix sums over the role's turns. A turn's reward is its own
    shaping terms plus every environment reward the role receives until its
    next turn.
    """
    rewards: list[float] = []
    for record in trajectory.records:
        if record.role == role:
            rewards.append(record.shaping_reward + record.length_penalty)
        if rewards:
            rewards[-1] += record.env_rewards[role]
    returns = [0.0] * len(rewards)
    running = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        running = rewards[i] + gamma * running
        returns[i] = running
    return returns


def return_advantage(returns: Sequence[float]) -> list[float]:
    if not returns:
        return []
    mean = float(np.mean(returns))
    return [float(r - mean) for r in returns]


def hybrid_advantage(a_return: float, a_cot: float, omega: float) -> float:
    return a_return + omega * a_cot


def _future_correct(sample_cot) -> bool | None:
    if sample_cot is None:
        return None
    for component in sample_cot.components:
        if component.kind == PairKind.FUTURE:
            return component.value >= 1.0
    return None


def compute_advantages(
    trajectories: Sequence[Trajectory],
    groups: Sequence[MicroRolloutGroup],
    role: PlayerRole,
    cfg: GrpoConfig,
) -> list[AdvantageRecord]:
    """
    Advantage records for the role's learnable mainstream turns (those with a
    log-probability), plus non-primary micro-rollout samples when
    ``train_on_micro_rollouts`` is set.
    """
    by_turn = {(g.trajectory_id, g.turn): g for g in groups if g.role == role}
    omega = cfg.effective_omega

    pending: list[tuple[AdvantageRecord, float]] = []
    for trajectory in trajectories:
        owned = trajectory.turns_of(role)
        returns = monte_carlo_returns(trajectory, role, cfg.gamma)
        for record, r_t in zip(owned, returns):
            if record.logprob is None or record.option_id is None:
                continue
            group = by_turn.get((trajectory.trajectory_id, record.turn))
            s_cot, a_cot, stats = None, 0.0, (None, None)
            if group is not None and group.scored and cfg.advantage_mode != AdvantageMode.RETURN_ONLY:
                values = group.cot_values()
                s_cot = values[0]
                a_cots = cot_advantage(values, cfg.std_floor)
                a_cot = a_cots[0]
                defined = [v for v in values if v is not None]
                if defined:
                    stats = (float(np.mean(defined)), float(np.std(defined)))
                if cfg.train_on_micro_rollouts:
                    for sample, sample_a_cot in zip(group.samples[1:], a_cots[1:]):
                        if sample.option_id is None or sample.logprob is None:
                            continue
                        signal = sample.cot.value if cfg.advantage_mode == AdvantageMode.RAW and sample.cot else sample_a_cot
                        pending.append(
                            (
                                AdvantageRecord(
                                    trajectory_id=trajectory.trajectory_id,
                                    turn=record.turn,
                                    sample_id=sample.sample_id,
                                    is_primary=False,
                                    role=role,
                                    state_key=record.state_key,
                                    option_id=sample.option_id,
                                    old_logprob=sample.logprob,
                                    policy_version=record.policy_version,
                                    s_cot=sample.cot.value if sample.cot else None,
                                    a_cot=sample_a_cot,
                                    a_hybrid=omega * (signal or 0.0),
                                    group_mean=stats[0],
                                    group_std=stats[1],
                                ),
                                float("nan"),
                            )
                        )
            pending.append(
                (
                    AdvantageRecord(
                        trajectory_id=trajectory.trajectory_id,
                        turn=record.turn,
                        role=role,
                        state_key=record.state_key,
                        option_id=record.option_id,
                        old_logprob=record.logprob,
                        policy_version=record.policy_version,
                        s_cot=s_cot,
                        a_cot=a_cot,
                        group_mean=stats[0],
                        group_std=stats[1],
                        future_correct=_future_correct(group.samples[0].cot) if group is not None and group.scored else None,
                    ),
                    r_t,
                )
            )

    mainstream_returns = [r for record, r in pending if record.is_primary]
    batch_mean = float(np.mean(mainstream_returns)) if mainstream_returns else 0.0
    records: list[AdvantageRecord] = []
    for record, r_t in pending:
        if not record.is_primary:
            records.append(record)
            continue
        a_return = r_t - batch_mean
        signal = (record.s_cot or 0.0) if cfg.advantage_mode == AdvantageMode.RAW else record.a_cot
        records.append(
            record.model_copy(
                update={
                    "a_return": a_return,
                    "a_hybrid": hybrid_advantage(a_return, signal, omega),
                    "batch_mean": batch_mean,
                }
            )
        )
    return records
