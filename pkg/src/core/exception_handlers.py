import logging

from fastapi import Request, status
from fastapi.responses import ORJSONResponse

import src.constants as const
from src.api.schemas import BaseExceptionBody, ErrorDetail
from src.core.exceptions import EXIT_VERIFICATION_FAILURE, HarnessError
from src.core.instrumentators import harness_exceptions_total

logger = logging.getLogger(__name__)


def cli_exception_handler(exc: Exception) -> int:
    """
    Log an exception escaping a CLI command and map it to the exit code
    contract: 1 verification failure, 2 configuration error, 3 remote failure.
    """
    exception_type = type(exc).__name__
    harness_exceptions_total.labels(exception_type=exception_type).inc()

    if isinstance(exc, HarnessError):
        logger.error(
            f"{exception_type}: {exc}",
            extra={"run_id": const.RUN_ID_IN_CONTEXT.get(), "exit_code": exc.exit_code},
        )
        return exc.exit_code

    logger.error(
        f"Unhandled exception: {exception_type}: {exc}",
        exc_info=True,
        extra={"run_id": const.RUN_ID_IN_CONTEXT.get()},
    )
    return EXIT_VERIFICATION_FAILURE


async def global_exception_handler(request: Request, exc: Exception) -> ORJSONResponse:
    """
    Global exception handler for the mock inference server that tracks all
    unhandled exceptions and returns a consistent error response.
    """
    exception_type = type(exc).__name__

    harness_exceptions_total.labels(exception_type=exception_type).inc()

    logger.error(
        f"Unhandled exception: {exception_type}: {exc}",
        exc_info=True,
        extra={
            "path": request.url.path,
            "method": request.method,
            "exception_type": exception_type,
        },
    )

    return ORJSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content=BaseExceptionBody(
            data=ErrorDetail(
                status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
                detail="Internal server error",
                type=exception_type,
            )
        ).model_dump(),
    )
