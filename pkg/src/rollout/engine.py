import asyncio
import logging
from collections.abc import Mapping, Sequence

import numpy as np

from src.agents.base import Agent
from src.agents.schemas import ActContext, AgentResult
from src.core.exceptions import JudgeUnavailable, RemoteUnavailable, ReplayMismatch, RoleMismatch
from src.games.base import Game, GameState, PlayerRole
from src.judge.judges import Judge, score_sample
from src.protocol.schemas import OutcomeStatus, ShapingConfig
from src.protocol.shaping import length_penalty, shaping_reward
from src.rollout.schemas import GroupSample, MicroRolloutGroup, Termination, Trajectory, TurnRecord

logger = logging.getLogger(__name__)

Agents = Mapping[PlayerRole, Agent]

AGENT_STREAM = 1
RESAMPLE_STREAM = 2


def agent_rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, *stream])


def check_agents(agents: Agents) -> None:
    for role in PlayerRole:
        agent = agents.get(role)
        if agent is None or agent.role != role:
            raise RoleMismatch(f"no agent bound to the {role.label} role")


def trajectory_id_for(game: str, seed: int, prefix: str = "") -> str:
    return f"{prefix}{game}-{seed}"


async def collect_trajectory(
    game: Game,
    agents: Agents,
    seed: int,
    shaping: ShapingConfig,
    trajectory_id: str | None = None,
) -> Trajectory:
    """
    Play one mainstream episode. A remote failure re-raises with the partial
    trajectory, marked aborted, attached as ``exc.trajectory``.
    """
    check_agents(agents)
    trajectory = Trajectory(
        trajectory_id=trajectory_id or trajectory_id_for(game.name, seed),
        game=game.name,
        seed=seed,
        agents=(agents[PlayerRole.FIRST].describe(), agents[PlayerRole.SECOND].describe()),
    )
    rng = agent_rng(seed, AGENT_STREAM)
    state = game.new_game(seed)

    while not state.terminal:
        role = state.current
        agent = agents[role]
        ctx = ActContext.build(game, state, shaping.require_all_fields)
        try:
            result = await agent.act(ctx, rng)
        except RemoteUnavailable as exc:
            trajectory.termination = Termination.ABORTED
            trajectory.returns = state.cumulative
            exc.trajectory = trajectory
            raise

        record = turn_record(trajectory.trajectory_id, len(trajectory.records), ctx, result, shaping, agent)
        if record.move_id is None:
            trajectory.records.append(record)
            trajectory.termination = Termination.INVALID_ACTION
            trajectory.returns = state.cumulative
            logger.debug(
                f"{trajectory.trajectory_id}: {role.label} ended the episode with {record.status}",
                extra={"turn": record.turn},
            )
            return trajectory

        state, step = game.apply_move(state, record.move_id)
        trajectory.records.append(record.model_copy(update={"env_rewards": step.rewards}))

    trajectory.returns = game.returns(state)
    return trajectory


def turn_record(
    trajectory_id: str,
    turn: int,
    ctx: ActContext,
    result: AgentResult,
    shaping: ShapingConfig,
    agent: Agent,
) -> TurnRecord:
    outcome = result.outcome
    bonus, terminate = shaping_reward(outcome, shaping)
    move_id = None if terminate else outcome.move_id
    return TurnRecord(
        trajectory_id=trajectory_id,
        turn=turn,
        role=ctx.role,
        state_key=ctx.state_key,
        prompt=ctx.prompt,
        raw_text=result.raw_text,
        status=outcome.status,
        output=outcome.output,
        error_kind=outcome.error_kind,
        move_id=move_id,
        action_text=ctx.game.move_display(ctx.state, move_id) if move_id is not None else outcome.invalid_text,
        shaping_reward=bonus,
        length_penalty=length_penalty(outcome.length, shaping),
        response_length=outcome.length,
        logprob=result.logprob,
        option_id=result.option_id,
        policy_version=agent.policy_version,
        retries=result.retries,
    )


async def collect_batch(
    game: Game,
    agents: Agents,
    seeds: Sequence[int],
    shaping: ShapingConfig,
    prefix: str = "",
) -> list[Trajectory]:
    """
    Collect one trajectory per seed. When any episode hits a remote failure,
    the first such error is re-raised with every finished and aborted
    trajectory attached as ``exc.completed``.
    """
    results = await asyncio.gather(
        *(
            collect_trajectory(game, agents, seed, shaping, trajectory_id_for(game.name, seed, prefix))
            for seed in seeds
        ),
        return_exceptions=True,
    )
    failures = [r for r in results if isinstance(r, BaseException)]
    if not failures:
        return list(results)
    for failure in failures:
        if not isinstance(failure, RemoteUnavailable):
            raise failure
    completed = [r for r in results if isinstance(r, Trajectory)]
    completed.extend(f.trajectory for f in failures if getattr(f, "trajectory", None) is not None)
    error = failures[0]
    error.completed = completed
    raise error


def mainstream_states(game: Game, trajectory: Trajectory) -> list[GameState]:
    """State before each record of the trajectory."""
    state = game.new_game(trajectory.seed)
    states = []
    for record in trajectory.records:
        states.append(state)
        if record.move_id is not None:
            state = game.transition(state, record.move_id)
    return states


def primary_sample(record: TurnRecord) -> GroupSample:
    return GroupSample(
        sample_id=0,
        is_primary=True,
        raw_text=record.raw_text,
        status=record.status,
        output=record.output,
        move_id=record.move_id,
        logprob=record.logprob,
        option_id=record.option_id,
    )


async def resample_micro_rollouts(
    game: Game,
    trajectories: Sequence[Trajectory],
    micro_rollouts: int,
    agents: Agents,
    shaping: ShapingConfig,
) -> list[MicroRolloutGroup]:
    """
    Draw ``micro_rollouts`` extra same-prompt samples for every mainstream turn
    of a learnable agent. Samples never advance the game.
    """
    if micro_rollouts < 1:
        raise ValueError("micro_rollouts must be at least 1")
    check_agents(agents)

    async def resample(trajectory: Trajectory, record: TurnRecord, state: GameState) -> MicroRolloutGroup:
        agent = agents[record.role]
        ctx = ActContext.build(game, state, shaping.require_all_fields)
        if ctx.prompt != record.prompt:
            raise ReplayMismatch(trajectory.trajectory_id, record.turn, "prompt differs on resampling")
        group = MicroRolloutGroup(
            group_id=f"{trajectory.trajectory_id}:{record.turn}",
            trajectory_id=trajectory.trajectory_id,
            turn=record.turn,
            role=record.role,
            state_key=record.state_key,
            policy_version=record.policy_version,
            samples=[primary_sample(record)],
        )
        rng = agent_rng(trajectory.seed, RESAMPLE_STREAM, record.turn)
        try:
            results = [await agent.act(ctx, rng) for _ in range(micro_rollouts)]
        except RemoteUnavailable as exc:
            logger.warning(f"Resampling {group.group_id} failed: {exc}")
            return group.model_copy(update={"failure": str(exc)})
        for sample_id, result in enumerate(results, start=1):
            group.samples.append(
                GroupSample(
                    sample_id=sample_id,
                    is_primary=False,
                    raw_text=result.raw_text,
                    status=result.outcome.status,
                    output=result.outcome.output,
                    move_id=result.outcome.move_id,
                    logprob=result.logprob,
                    option_id=result.option_id,
                )
            )
        return group

    jobs = []
    for trajectory in trajectories:
        states = mainstream_states(game, trajectory)
        for record, state in zip(trajectory.records, states):
            if record.is_mainstream and agents[record.role].learnable:
                jobs.append(resample(trajectory, record, state))
    return list(await asyncio.gather(*jobs))


async def score_groups(
    groups: Sequence[MicroRolloutGroup],
    trajectories: Sequence[Trajectory],
    judge: Judge,
) -> list[MicroRolloutGroup]:
    """Attach a CoT score to every sample, judged against mainstream opponent turns only."""
    by_id = {t.trajectory_id: t for t in trajectories}

    async def score(group: MicroRolloutGroup) -> MicroRolloutGroup:
        if group.failure is not None:
            return group
        trajectory = by_id[group.trajectory_id]
        try:
            cots = await asyncio.gather(
                *(
                    score_sample(
                        judge,
                        trajectory,
                        sample.output if sample.status == OutcomeStatus.PARSED else None,
                        group.turn,
                        sample.sample_id,
                    )
                    for sample in group.samples
                )
            )
        except JudgeUnavailable as exc:
            logger.warning(f"Scoring {group.group_id} failed: {exc}")
            return group.model_copy(update={"failure": str(exc)})
        samples = [s.model_copy(update={"cot": cot}) for s, cot in zip(group.samples, cots)]
        return group.model_copy(update={"samples": samples, "scored": True})

    return list(await asyncio.gather(*(score(g) for g in groups)))
