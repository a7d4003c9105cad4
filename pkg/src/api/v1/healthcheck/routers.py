from typing import Annotated

from fastapi import APIRouter, Depends, status

from src.api.schemas import BaseExceptionBody, BaseResponseBody
from src.api.v1.completions.services import CompletionService, get_completion_service

router = APIRouter(prefix="/api/v1/healthcheck", tags=["Healthcheck"])


@router.get(
    "/",
    response_model=BaseResponseBody,
    status_code=status.HTTP_200_OK,
    summary="Healthcheck",
)
async def get_readiness_status(
    service: Annotated[CompletionService, Depends(get_completion_service)],
) -> BaseResponseBody | BaseExceptionBody:
    return BaseResponseBody(
        data={
            "status": "ok",
            "scripted_replies": len(service.script.replies),
            "recorded_requests": len(service.recorded),
        }
    )
