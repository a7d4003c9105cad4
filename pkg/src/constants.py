import os
from pathlib import Path
from contextvars import ContextVar

ENV = os.environ.get("ENV", "dev")
APP_VERSION = "0.1.0"
APP_NAME = "turnwise"
APP_DESCRIPTION = (
    "Two-player alternating game harness for recursive-reasoning policy training"
)
APP_API_DOCS_TITLE = f"{APP_NAME} ({ENV.upper()})" if ENV != "dev" else APP_NAME
APP_SUBSYSTEM = "turnwise"

RUN_ID_IN_CONTEXT: ContextVar[str] = ContextVar("run_id", default="")

TRAJECTORY_SUFFIX = ".traj"
GROUPS_SUFFIX = ".groups"
METRICS_FILE = "metrics.log"
CHECKPOINT_BEST = "best"
CHECKPOINT_FINAL = "final"

PROMPTS_DIR = Path(__file__).resolve().parents[1] / "etc" / "prompts"
