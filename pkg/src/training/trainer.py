import logging
from pathlib import Path

import numpy as np
import orjson

import src.constants as const
from src.agents.base import Agent
from src.agents.schemas import AgentKind
from src.agents.tabular import TabularPolicy
from src.core.exceptions import ConfigurationError, RemoteUnavailable
from src.games.base import PlayerRole
from src.games.registry import get_game
from src.harness.config import RunConfig, save_run_config
from src.harness.evaluate import evaluate
from src.harness.factory import build_agent, build_judge, parse_opponent
from src.harness.seeds import TRAIN_STREAM, VALIDATION_STREAM, derive_seeds
from src.rollout.engine import collect_batch, resample_micro_rollouts, score_groups
from src.rollout.schemas import MicroRolloutGroup, Trajectory
from src.rollout.store import TrajectoryStore, run_directory
from src.training.advantages import compute_advantages
from src.training.optimizer import AdamState, train_step
from src.training.schemas import AdvantageMode, AdvantageRecord, TrainingBatch

logger = logging.getLogger(__name__)


class Trainer:
    """
    On-policy loop: collect a batch, resample and judge the learnable turns,
    compute hybrid advantages and update each tabular role separately.
    """

    def __init__(self, config: RunConfig, run_dir: str | Path | None = None) -> None:
        self.config = config
        self.game = get_game(config.game)
        self.run_dir = Path(run_dir) if run_dir else run_directory(config.run_root)
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.store = TrajectoryStore(self.run_dir, self.game.name)
        self.metrics_path = self.run_dir / const.METRICS_FILE

        self.policies: dict[PlayerRole, TabularPolicy] = {}
        self.agents: dict[PlayerRole, Agent] = {}
        for role in PlayerRole:
            spec = config.agent_spec(role)
            policy = None
            if spec.kind == AgentKind.TABULAR:
                policy = TabularPolicy.load(spec.checkpoint) if spec.checkpoint else TabularPolicy(role)
                self.policies[role] = policy
            self.agents[role] = build_agent(spec, self.game, role, config, policy=policy)
        if not self.policies:
            raise ConfigurationError("training needs at least one tabular role")

        self.references = {role: policy.snapshot() for role, policy in self.policies.items()}
        self.adam = {role: AdamState() for role in self.policies}
        self.judge = build_judge(config.judge, config.endpoint)
        self.validation_seeds = derive_seeds(config.master_seed, config.validation_games, VALIDATION_STREAM)
        self.best_score: float | None = None
        self.stale_validations = 0

    @property
    def uses_cot(self) -> bool:
        return self.config.grpo.advantage_mode != AdvantageMode.RETURN_ONLY

    async def run(self) -> Path:
        save_run_config(self.config, self.run_dir / "config.toml")
        cfg = self.config.grpo
        for step in range(1, cfg.max_steps + 1):
            await self.step(step)
            if step % self.config.validation_every == 0 and await self.validate(step):
                logger.info(f"Early stop at step {step}: no improvement in {self.config.patience} validations")
                break
        self.save_checkpoints(const.CHECKPOINT_FINAL)
        return self.run_dir

    async def step(self, step: int) -> list[dict]:
        olds = {role: policy.snapshot() for role, policy in self.policies.items()}
        seeds = derive_seeds(self.config.master_seed, self.config.batch_size, TRAIN_STREAM, step)
        try:
            trajectories = await collect_batch(self.game, self.agents, seeds, self.config.shaping, prefix=f"s{step}-")
        except RemoteUnavailable as exc:
            completed = getattr(exc, "completed", [])
            self.store.persist_trajectories(step, completed)
            logger.error(f"Remote failure at step {step}; persisted {len(completed)} trajectories")
            raise
        self.store.persist_trajectories(step, trajectories)

        groups: list[MicroRolloutGroup] = []
        if self.uses_cot:
            groups = await resample_micro_rollouts(
                self.game, trajectories, self.config.micro_rollouts, self.agents, self.config.shaping
            )
            groups = await score_groups(groups, trajectories, self.judge)
            self.store.persist_groups(step, groups)

        lines = []
        for role, policy in self.policies.items():
            records = compute_advantages(trajectories, groups, role, cfg=self.config.grpo)
            batch = TrainingBatch(role=role, version=olds[role].version, samples=records)
            metrics = train_step(
                policy,
                olds[role],
                self.references[role],
                batch,
                self.config.grpo,
                self.adam[role],
                self.agents[role].temperature,
            )
            line = {
                "step": step,
                "role": role.label,
                **metrics.as_dict(),
                **self._diagnostics(trajectories, records, role),
            }
            lines.append(line)
            logger.info(
                f"step {step} {role.label}: loss={line['loss']:.4f} kl={line['kl']:.4f} "
                f"mean_return={line['mean_return']:.4f} future_acc={line['future_accuracy']}"
            )
        with self.metrics_path.open("ab") as fh:
            for line in lines:
                fh.write(orjson.dumps(line) + b"\n")
        return lines

    @staticmethod
    def _diagnostics(trajectories: list[Trajectory], records: list[AdvantageRecord], role: PlayerRole) -> dict:
        primary = [r for r in records if r.is_primary]
        s_cots = [r.s_cot for r in primary if r.s_cot is not None]
        futures = [r.future_correct for r in primary if r.future_correct is not None]
        return {
            "mean_return": float(np.mean([t.returns[role] for t in trajectories])) if trajectories else 0.0,
            "mean_s_cot": float(np.mean(s_cots)) if s_cots else None,
            "future_accuracy": float(np.mean(futures)) if futures else None,
            "mean_advantage": float(np.mean([r.a_hybrid for r in records])) if records else 0.0,
            "abs_advantage_variance": float(np.var([abs(r.a_hybrid) for r in records])) if records else 0.0,
        }

    async def validation_score(self) -> float:
        scores = []
        for role in self.policies:
            opponent = parse_opponent(self.config.validation_opponent, self.game, role.other)
            agents = {role: self.agents[role], role.other: opponent}
            report = await evaluate(
                self.game,
                agents,
                self.validation_seeds,
                role=role,
                opponent=self.config.validation_opponent,
                shaping=self.config.shaping,
                prefix="val-",
            )
            scores.append(report.normalized)
        return float(np.mean(scores))

    async def validate(self, step: int) -> bool:
        """Run validation; True when patience is exhausted."""
        score = await self.validation_score()
        logger.info(f"validation at step {step}: {score:.2f}")
        with self.metrics_path.open("ab") as fh:
            fh.write(orjson.dumps({"step": step, "validation_score": score}) + b"\n")
        if self.best_score is None or score > self.best_score:
            self.best_score = score
            self.stale_validations = 0
            self.save_checkpoints(const.CHECKPOINT_BEST, {"step": step, "validation_score": score})
            return False
        self.stale_validations += 1
        return self.stale_validations >= self.config.patience

    def save_checkpoints(self, name: str, meta: dict | None = None) -> Path:
        directory = self.run_dir / "checkpoints" / name
        for role, policy in self.policies.items():
            policy.save(directory / f"{role.label.lower()}.tab")
        info = {
            **(meta or {}),
            "validation_opponent": self.config.validation_opponent,
            "validation_seeds": self.validation_seeds,
        }
        (directory / "validation.json").write_bytes(orjson.dumps(info, option=orjson.OPT_INDENT_2))
        return directory


async def train(config: RunConfig, run_dir: str | Path | None = None) -> Path:
    return await Trainer(config, run_dir).run()
