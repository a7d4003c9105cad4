import logging
from collections.abc import Iterable
from datetime import datetime, timezone
from pathlib import Path
from typing import TypeVar

import orjson
from pydantic import BaseModel, ValidationError

import src.constants as const
from src.core.exceptions import CorruptRecord
from src.rollout.schemas import MicroRolloutGroup, Trajectory

logger = logging.getLogger(__name__)

ModelType = TypeVar("ModelType", bound=BaseModel)


def run_directory(root: str | Path, now: datetime | None = None) -> Path:
    stamp = (now or datetime.now(timezone.utc)).strftime("%Y%m%dT%H%M%S%f")
    path = Path(root) / f"run_{stamp}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def append_jsonl(path: str | Path, records: Iterable[BaseModel | dict]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("ab") as fh:
        for record in records:
            payload = record.model_dump(mode="json") if isinstance(record, BaseModel) else record
            fh.write(orjson.dumps(payload) + b"\n")
            count += 1
    return count


def read_jsonl(path: str | Path, model: type[ModelType]) -> list[ModelType]:
    """Load every record; the first unreadable line raises CorruptRecord."""
    path = Path(path)
    records: list[ModelType] = []
    with path.open("rb") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(model.model_validate(orjson.loads(line)))
            except (orjson.JSONDecodeError, ValidationError) as exc:
                logger.error(f"Corrupt record in {path} at line {line_no}: {exc}")
                raise CorruptRecord(str(path), line_no, type(exc).__name__) from exc
    return records


class TrajectoryStore:
    """Append-only stores under ``<run>/<game>/``: ``<batch>.traj`` and ``<batch>.groups``."""

    def __init__(self, run_dir: str | Path, game: str) -> None:
        self.directory = Path(run_dir) / game

    def trajectory_path(self, batch: int | str) -> Path:
        return self.directory / f"{batch}{const.TRAJECTORY_SUFFIX}"

    def groups_path(self, batch: int | str) -> Path:
        return self.directory / f"{batch}{const.GROUPS_SUFFIX}"

    def persist_trajectories(self, batch: int | str, trajectories: Iterable[Trajectory]) -> Path:
        path = self.trajectory_path(batch)
        append_jsonl(path, trajectories)
        return path

    def persist_groups(self, batch: int | str, groups: Iterable[MicroRolloutGroup]) -> Path:
        path = self.groups_path(batch)
        append_jsonl(path, groups)
        return path

    def load_trajectories(self, batch: int | str) -> list[Trajectory]:
        return load_trajectories(self.trajectory_path(batch))

    def load_groups(self, batch: int | str) -> list[MicroRolloutGroup]:
        return load_groups(self.groups_path(batch))


def load_trajectories(path: str | Path) -> list[Trajectory]:
    return read_jsonl(path, Trajectory)


def load_groups(path: str | Path) -> list[MicroRolloutGroup]:
    return read_jsonl(path, MicroRolloutGroup)
