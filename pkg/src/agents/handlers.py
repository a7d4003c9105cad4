import asyncio
import logging

import httpx
import numpy as np
import openai
from openai import AsyncOpenAI
from redis.backoff import ExponentialBackoff

from src.agents.base import Agent, result_from_text
from src.agents.schemas import ActContext, AgentKind, AgentResult, SamplingParams
from src.core.config import settings
from src.core.exceptions import RemoteTimeout, RemoteUnavailable
from src.core.instrumentators import remote_requests_total, remote_retries_total
from src.games.base import PlayerRole
from src.protocol.schemas import OutcomeStatus

logger = logging.getLogger(__name__)


class ChatCompletionHandler:
    """
    Chat-completions client with bounded retries and an in-flight cap.
    Transport failures and 5xx/429 responses are retried with exponential
    backoff; exhausting the retries raises RemoteUnavailable (RemoteTimeout
    when the last failure was a timeout).
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str = "dummy",
        timeout: float = settings.request_timeout_sec,
        max_retries: int = settings.max_retries,
        backoff_base: float = settings.retry_backoff_base_sec,
        backoff_cap: float = settings.retry_backoff_cap_sec,
        max_in_flight: int = settings.max_in_flight,
        http_client: httpx.AsyncClient | None = None,
    ) -> None:
        self.endpoint = endpoint
        self.model = model
        self.max_retries = max_retries
        self._backoff = ExponentialBackoff(cap=backoff_cap, base=backoff_base)
        self._semaphore = asyncio.Semaphore(max_in_flight)
        self._client = AsyncOpenAI(
            base_url=endpoint,
            api_key=api_key or "dummy",
            timeout=timeout,
            max_retries=0,
            http_client=http_client,
        )

    async def complete(self, messages: list[dict[str, str]], params: SamplingParams) -> str:
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                async with self._semaphore:
                    response = await self._client.chat.completions.create(
                        model=self.model,
                        messages=messages,
                        temperature=params.temperature,
                        top_p=params.top_p,
                        max_tokens=params.max_tokens,
                        extra_body={"top_k": params.top_k},
                    )
                remote_requests_total.labels(outcome="ok").inc()
                return response.choices[0].message.content or ""
            except openai.APIStatusError as exc:
                remote_requests_total.labels(outcome="error").inc()
                if exc.status_code < 500 and exc.status_code != 429:
                    raise RemoteUnavailable(
                        f"{self.endpoint} rejected the request: {exc.status_code}", attempt + 1
                    ) from exc
                last_error = exc
            except openai.APIConnectionError as exc:
                remote_requests_total.labels(outcome="timeout" if isinstance(exc, openai.APITimeoutError) else "error").inc()
                last_error = exc

            if attempt < self.max_retries:
                delay = self._backoff.compute(attempt)
                remote_retries_total.inc()
                logger.warning(
                    f"Chat completion failed ({type(last_error).__name__}), retry {attempt + 1}/{self.max_retries} in {delay:.2f}s",
                    extra={"endpoint": self.endpoint},
                )
                await asyncio.sleep(delay)

        attempts = self.max_retries + 1
        if isinstance(last_error, openai.APITimeoutError):
            raise RemoteTimeout(f"{self.endpoint} timed out after {attempts} attempts", attempts) from last_error
        raise RemoteUnavailable(f"{self.endpoint} unavailable after {attempts} attempts", attempts) from last_error

    async def close(self) -> None:
        await self._client.close()


async def remote_generate(handler: ChatCompletionHandler, prompt: str, params: SamplingParams) -> str:
    return await handler.complete([{"role": "user", "content": prompt}], params)


class RemoteAgent(Agent):
    """LLM agent behind a chat-completions endpoint; malformed replies are re-requested."""

    kind = AgentKind.REMOTE
    learnable = True

    def __init__(
        self,
        role: PlayerRole,
        handler: ChatCompletionHandler,
        params: SamplingParams | None = None,
        format_retries: int = 2,
    ) -> None:
        super().__init__(role)
        self.handler = handler
        self.params = params or SamplingParams()
        self.format_retries = format_retries

    async def respond(self, ctx: ActContext, rng: np.random.Generator) -> AgentResult:
        result: AgentResult | None = None
        for retry in range(self.format_retries + 1):
            raw = await remote_generate(self.handler, ctx.prompt, self.params)
            result = result_from_text(ctx, raw, retries=retry)
            if result.outcome.status != OutcomeStatus.FORMAT_ERROR:
                return result
            logger.warning(
                f"{self.describe()} returned malformed output ({result.outcome.error_kind}), retry {retry + 1}",
                extra={"state_key": ctx.state_key},
            )
        return result

    def describe(self) -> str:
        return f"remote:{self.handler.model}:{self.role.label}"
