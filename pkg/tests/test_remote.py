from unittest.mock import AsyncMock, MagicMock

import httpx
import numpy as np
import orjson
import pytest

from src.agents.handlers import ChatCompletionHandler, RemoteAgent
from src.agents.schemas import ActContext, SamplingParams
from src.api.app import create_app
from src.api.v1.completions.schemas import MockScript
from src.core.exceptions import RemoteTimeout, RemoteUnavailable
from src.games import PlayerRole, get_game
from src.protocol.schemas import FormatErrorKind, OutcomeStatus

GOOD_REPLY = (
    "<think>Win the middle row.\n\n"
    "[state_summary: X threatens the middle row.]\n"
    "[OpponentIntent: win_now]\n"
    "[OpponentPrediction: O(0,1)]\n"
    "[MyIntent: win_now]\n"
    "[MyAction: X(1,2)]\n"
    "[MyPrediction: None]</think><answer>X(1,2)</answer>"
)

COMPLETION = {
    "id": "cmpl-1",
    "object": "chat.completion",
    "created": 0,
    "model": "test-model",
    "choices": [
        {
            "index": 0,
            "message": {"role": "assistant", "content": GOOD_REPLY},
            "finish_reason": "stop",
        }
    ],
}


def make_handler(transport, max_retries=2):
    return ChatCompletionHandler(
        endpoint="http://mock/v1",
        model="test-model",
        max_retries=max_retries,
        backoff_base=0.0,
        backoff_cap=0.0,
        http_client=httpx.AsyncClient(transport=transport),
    )


@pytest.fixture
def case_study_context():
    game = get_game("tic_tac_toe")
    return ActContext.build(game, game.from_board("O_O/XX_/___"))


class TestChatCompletionHandler:
    """Tests for the chat-completions client"""

    @pytest.mark.asyncio
    async def test_sends_sampling_parameters(self):
        """Test that sampling parameters reach the request body"""
        # Setup transport that records the request
        seen = []

        def respond(request):
            seen.append(orjson.loads(request.content))
            return httpx.Response(200, json=COMPLETION)

        handler = make_handler(httpx.MockTransport(respond))
        params = SamplingParams(temperature=0.7, top_p=0.8, top_k=50, max_tokens=128)

        content = await handler.complete([{"role": "user", "content": "hi"}], params)

        assert content == GOOD_REPLY
        assert seen[0]["model"] == "test-model"
        assert seen[0]["temperature"] == 0.7
        assert seen[0]["top_p"] == 0.8
        assert seen[0]["top_k"] == 50
        assert seen[0]["max_tokens"] == 128

    @pytest.mark.asyncio
    async def test_retries_server_errors(self):
        """Test that 503 responses are retried until one succeeds"""
        calls = []

        def respond(request):
            calls.append(request)
            if len(calls) < 3:
                return httpx.Response(503, json={"detail": "busy"})
            return httpx.Response(200, json=COMPLETION)

        handler = make_handler(httpx.MockTransport(respond), max_retries=2)

        content = await handler.complete([{"role": "user", "content": "hi"}], SamplingParams())

        assert content == GOOD_REPLY
        assert len(calls) == 3

    @pytest.mark.asyncio
    async def test_gives_up_after_retries(self):
        """Test that exhausting the retries raises RemoteUnavailable"""
        calls = []

        def respond(request):
            calls.append(request)
            return httpx.Response(503, json={"detail": "busy"})

        handler = make_handler(httpx.MockTransport(respond), max_retries=1)

        with pytest.raises(RemoteUnavailable) as exc_info:
            await handler.complete([{"role": "user", "content": "hi"}], SamplingParams())

        assert exc_info.value.attempts == 2
        assert len(calls) == 2

    @pytest.mark.asyncio
    async def test_client_error_not_retried(self):
        """Test that a 4xx response fails immediately"""
        calls = []

        def respond(request):
            calls.append(request)
            return httpx.Response(400, json={"error": {"message": "bad"}})

        handler = make_handler(httpx.MockTransport(respond), max_retries=3)

        with pytest.raises(RemoteUnavailable) as exc_info:
            await handler.complete([{"role": "user", "content": "hi"}], SamplingParams())

        assert exc_info.value.attempts == 1
        assert len(calls) == 1

    @pytest.mark.asyncio
    async def test_timeout(self):
        """Test that repeated timeouts surface as RemoteTimeout"""

        def respond(request):
            raise httpx.ReadTimeout("slow", request=request)

        handler = make_handler(httpx.MockTransport(respond), max_retries=1)

        with pytest.raises(RemoteTimeout):
            await handler.complete([{"role": "user", "content": "hi"}], SamplingParams())

    @pytest.mark.integration
    @pytest.mark.asyncio
    async def test_against_mock_server(self):
        """Test a round trip through the scripted mock server"""
        app = create_app(MockScript(replies=[GOOD_REPLY], fail_first=1))
        handler = make_handler(httpx.ASGITransport(app=app), max_retries=1)

        content = await handler.complete([{"role": "user", "content": "hi"}], SamplingParams())

        assert content == GOOD_REPLY
        assert len(app.state.completion_service.recorded) == 2


class TestRemoteAgent:
    """Tests for the remote LLM agent"""

    @pytest.mark.asyncio
    async def test_parses_reply(self, case_study_context):
        """Test that a well-formed reply becomes a parsed move"""
        handler = MagicMock(spec=ChatCompletionHandler)
        handler.model = "test-model"
        handler.complete = AsyncMock(return_value=GOOD_REPLY)
        agent = RemoteAgent(PlayerRole.FIRST, handler)

        result = await agent.act(case_study_context, np.random.default_rng(0))

        assert result.outcome.move_id == 5
        assert result.retries == 0
        messages, params = handler.complete.call_args.args
        assert messages == [{"role": "user", "content": case_study_context.prompt}]
        assert params == SamplingParams()

    @pytest.mark.asyncio
    async def test_retries_malformed_reply(self, case_study_context):
        """Test that a format error is re-requested"""
        handler = MagicMock(spec=ChatCompletionHandler)
        handler.model = "test-model"
        handler.complete = AsyncMock(side_effect=["no tags at all", GOOD_REPLY])
        agent = RemoteAgent(PlayerRole.FIRST, handler, format_retries=2)

        result = await agent.act(case_study_context, np.random.default_rng(0))

        assert result.outcome.parsed
        assert result.retries == 1
        assert handler.complete.call_count == 2

    @pytest.mark.asyncio
    async def test_returns_last_format_error(self, case_study_context):
        """Test that the last malformed reply is returned once retries run out"""
        handler = MagicMock(spec=ChatCompletionHandler)
        handler.model = "test-model"
        handler.complete = AsyncMock(return_value="no tags at all")
        agent = RemoteAgent(PlayerRole.FIRST, handler, format_retries=1)

        result = await agent.act(case_study_context, np.random.default_rng(0))

        assert result.outcome.status is OutcomeStatus.FORMAT_ERROR
        assert result.outcome.error_kind is FormatErrorKind.MALFORMED_TAGS
        assert result.retries == 1
        assert handler.complete.call_count == 2

    @pytest.mark.asyncio
    async def test_invalid_action_not_retried(self, case_study_context):
        """Test that an illegal move is returned without another request"""
        handler = MagicMock(spec=ChatCompletionHandler)
        handler.model = "test-model"
        handler.complete = AsyncMock(return_value=GOOD_REPLY.replace("X(1,2)", "X(0,0)"))
        agent = RemoteAgent(PlayerRole.FIRST, handler)

        result = await agent.act(case_study_context, np.random.default_rng(0))

        assert result.outcome.status is OutcomeStatus.INVALID_ACTION
        assert handler.complete.call_count == 1
