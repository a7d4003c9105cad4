import itertools
import logging
import time
from pathlib import Path

import orjson
from fastapi import Request

from src.api.v1.completions.schemas import (
    ChatChoice,
    ChatCompletionRequest,
    ChatCompletionResponse,
    ChatMessage,
    MockScript,
    Usage,
)
from src.judge.prompts import JUDGE_SYSTEM_PROMPT

logger = logging.getLogger(__name__)

EMPTY_REPLY = "<think>[state_summary: nothing scripted]</think><answer></answer>"


def load_script(path: str | Path) -> MockScript:
    return MockScript.model_validate(orjson.loads(Path(path).read_bytes()))


class CompletionService:
    """Replays scripted replies in a cycle and records every request body."""

    def __init__(self, script: MockScript) -> None:
        self.script = script
        self.recorded: list[bytes] = []
        self._counter = itertools.count()
        self._failures_left = script.fail_first
        self._reply_index = 0

    def should_fail(self) -> bool:
        if self._failures_left > 0:
            self._failures_left -= 1
            return True
        return False

    def reply_for(self, body: ChatCompletionRequest) -> str:
        system = next((m.content for m in body.messages if m.role == "system"), None)
        if system == JUDGE_SYSTEM_PROMPT and self.script.judge_score is not None:
            return f"<answer>{self.script.judge_score}</answer>"
        if not self.script.replies:
            return EMPTY_REPLY
        reply = self.script.replies[self._reply_index % len(self.script.replies)]
        self._reply_index += 1
        return reply

    def complete(self, body: ChatCompletionRequest) -> ChatCompletionResponse:
        content = self.reply_for(body)
        prompt_tokens = sum(len(m.content.split()) for m in body.messages)
        completion_tokens = len(content.split())
        return ChatCompletionResponse(
            id=f"mock-{next(self._counter)}",
            created=int(time.time()),
            model=body.model,
            choices=[ChatChoice(message=ChatMessage(role="assistant", content=content))],
            usage=Usage(
                prompt_tokens=prompt_tokens,
                completion_tokens=completion_tokens,
                total_tokens=prompt_tokens + completion_tokens,
            ),
        )


def get_completion_service(request: Request) -> CompletionService:
    return request.app.state.completion_service
