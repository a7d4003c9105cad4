import logging
import sys
import uuid
from logging import config as logging_config

import logfire

import src.constants as const
from src.core.config import settings
from src.core.instrumentators import start_metrics_exporter
from src.core.logger import LOGGING
from src.harness.cli import run

logging_config.dictConfig(LOGGING)
logger = logging.getLogger(__name__)


def main() -> int:
    const.RUN_ID_IN_CONTEXT.set(uuid.uuid4().hex[:12])

    if settings.enable_tracing:
        logfire.configure(
            send_to_logfire=False,
            service_name=const.APP_SUBSYSTEM,
            environment=const.ENV,
            console=False,
        )
        logfire.instrument_openai()

    if settings.enable_metrics:
        start_metrics_exporter(settings.metrics_port)

    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
