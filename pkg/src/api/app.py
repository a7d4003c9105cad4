import logging
import uuid
from contextlib import asynccontextmanager
from typing import Any, AsyncIterator, Callable

import logfire
from fastapi import APIRouter, FastAPI, Request
from fastapi.responses import ORJSONResponse

import src.constants as const
from src.api.schemas import BaseExceptionBody
from src.api.v1.completions.routers import router as completions_router
from src.api.v1.completions.schemas import MockScript
from src.api.v1.completions.services import CompletionService
from src.api.v1.healthcheck.routers import router as healthcheck_router
from src.core import instrumentators
from src.core.config import settings
from src.core.exception_handlers import global_exception_handler

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI) -> AsyncIterator[None]:
    instrumentators.mock_server_info.info(
        {"name": const.APP_NAME, "version": const.APP_VERSION, "env": const.ENV}
    )
    logger.info(f"Mock server ready with {len(app.state.completion_service.script.replies)} scripted replies")
    yield


def create_app(script: MockScript | None = None) -> FastAPI:
    """Scripted chat-completions server for exercising the remote paths offline."""
    v1_router = APIRouter(
        responses={
            404: {"model": BaseExceptionBody},
            400: {"model": BaseExceptionBody},
        },
    )
    v1_router.include_router(completions_router)
    v1_router.include_router(healthcheck_router)

    app = FastAPI(
        title=const.APP_API_DOCS_TITLE,
        version=const.APP_VERSION,
        description=const.APP_DESCRIPTION,
        docs_url="/api/v1/docs",
        openapi_url="/api/v1/docs.json",
        default_response_class=ORJSONResponse,
        lifespan=lifespan,
    )
    app.state.completion_service = CompletionService(script or MockScript())
    app.include_router(v1_router)
    app.add_exception_handler(Exception, global_exception_handler)

    @app.middleware("http")
    async def request_id_middleware(request: Request, call_next: Callable[..., Any]) -> Any:
        const.RUN_ID_IN_CONTEXT.set(request.headers.get("X-Request-Id", uuid.uuid4().hex))
        return await call_next(request)

    if settings.enable_tracing:
        logfire.instrument_fastapi(
            app,
            capture_headers=True,
            excluded_urls="/api/v1/healthcheck/",
        )
    return app
