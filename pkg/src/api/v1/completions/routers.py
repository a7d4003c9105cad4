import logging
from typing import Annotated

from fastapi import APIRouter, Depends, HTTPException, Request, status

from src.api.v1.completions.schemas import ChatCompletionRequest, ChatCompletionResponse
from src.api.v1.completions.services import CompletionService, get_completion_service

router = APIRouter(prefix="/v1", tags=["Completions"])
logger = logging.getLogger(__name__)


@router.post(
    "/chat/completions",
    summary="Create chat completion.",
    status_code=status.HTTP_200_OK,
    description="OpenAI-compatible chat completion answered from the mock script.",
)
async def create_chat_completion(
    request: Request,
    body: ChatCompletionRequest,
    service: Annotated[CompletionService, Depends(get_completion_service)],
) -> ChatCompletionResponse:
    service.recorded.append(await request.body())
    if service.should_fail():
        logger.info("Mock script fails this request")
        raise HTTPException(status_code=status.HTTP_503_SERVICE_UNAVAILABLE, detail="scripted failure")
    return service.complete(body)
