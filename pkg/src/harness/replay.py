import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

from src.core.exceptions import CorruptRecord, ReplayMismatch
from src.games.registry import get_game
from src.protocol.parser import parse_structured_output
from src.protocol.schemas import ShapingConfig
from src.protocol.shaping import length_penalty, shaping_reward
from src.rollout.schemas import Termination, Trajectory
from src.rollout.store import load_trajectories

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=0.0, abs_tol=TOLERANCE)


def verify_trajectory(trajectory: Trajectory, shaping: ShapingConfig | None = None) -> None:
    """Re-simulate the stored moves and compare every stored reward and return."""
    shaping = shaping or ShapingConfig()
    game = get_game(trajectory.game)
    state = game.new_game(trajectory.seed)
    tid = trajectory.trajectory_id

    for index, record in enumerate(trajectory.records):
        if state.terminal:
            raise ReplayMismatch(tid, index, "record after the game ended")
        if record.role != state.current:
            raise ReplayMismatch(tid, index, f"stored role {record.role.label}, expected {state.current.label}")
        if record.state_key != game.information_state_key(state, record.role):
            raise ReplayMismatch(tid, index, "state key differs")

        outcome = parse_structured_output(record.raw_text, game.legal_moves(state), shaping.require_all_fields)
        bonus, terminate = shaping_reward(outcome, shaping)
        if not _close(bonus, record.shaping_reward):
            raise ReplayMismatch(tid, index, f"shaping reward {record.shaping_reward} != {bonus}")
        if not _close(length_penalty(outcome.length, shaping), record.length_penalty):
            raise ReplayMismatch(tid, index, "length penalty differs")

        if terminate:
            if record.move_id is not None or index != len(trajectory.records) - 1:
                raise ReplayMismatch(tid, index, "invalid output did not end the episode")
            break
        if record.move_id != outcome.move_id:
            raise ReplayMismatch(tid, index, f"stored move {record.move_id}, response plays {outcome.move_id}")
        state, step = game.apply_move(state, record.move_id)
        if not all(_close(a, b) for a, b in zip(step.rewards, record.env_rewards)):
            raise ReplayMismatch(tid, index, f"env rewards {record.env_rewards} != {step.rewards}")

    if trajectory.termination == Termination.NATURAL and not state.terminal:
        raise ReplayMismatch(tid, len(trajectory.records), "trajectory ends before the game does")
    if trajectory.termination != Termination.ABORTED and not all(
        _close(a, b) for a, b in zip(state.cumulative, trajectory.returns)
    ):
        raise ReplayMismatch(tid, len(trajectory.records), f"returns {trajectory.returns} != {state.cumulative}")


@dataclass
class ReplaySummary:
    files: int = 0
    trajectories: int = 0
    verified: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def render(self) -> str:
        lines = [f"files: {self.files}  trajectories: {self.trajectories}  verified: {self.verified}"]
        lines.extend(f"  MISMATCH {failure}" for failure in self.failures)
        return "\n".join(lines)


def replay_files(paths: Iterable[str | Path], shaping: ShapingConfig | None = None) -> ReplaySummary:
    summary = ReplaySummary()
    for path in paths:
        summary.files += 1
        try:
            trajectories = load_trajectories(path)
        except CorruptRecord as exc:
            summary.failures.append(str(exc))
            continue
        for trajectory in trajectories:
            summary.trajectories += 1
            try:
                verify_trajectory(trajectory, shaping)
            except ReplayMismatch as exc:
                logger.error(f"{path}: {exc}")
                summary.failures.append(f"{path}: {exc}")
            else:
                summary.verified += 1
    return summary
