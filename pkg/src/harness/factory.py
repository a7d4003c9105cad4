import logging

from src.agents.base import Agent
from src.agents.handlers import ChatCompletionHandler, RemoteAgent
from src.agents.schemas import AgentKind, SamplingParams
from src.agents.scripted import BotAgent, RuleAgent
from src.agents.tabular import TabularAgent, TabularPolicy
from src.agents.vocab import get_vocabulary
from src.core.exceptions import AlphaOutOfRange, ConfigurationError
from src.games.base import Game, PlayerRole
from src.harness.config import AgentSpec, EndpointConfig, JudgeSpec, RunConfig
from src.judge.judges import ExactMatchJudge, Judge, LlmJudge
from src.judge.schemas import JudgeKind
from src.solvers.cfr import CfrTable
from src.solvers.kuhn_nash import kuhn_nash_bot
from src.solvers.mcts import MctsBot
from src.solvers.minimax import MinimaxBot
from src.solvers.policies import RandomBot

logger = logging.getLogger(__name__)

RULE_GAMES = ("tic_tac_toe", "connect_four", "mini_hanabi", "simple_hanabi")


def parse_opponent(spec: str, game: Game, role: PlayerRole) -> Agent:
    """
    Build a fixed opponent from ``mcts:<sims>``, ``kuhn_nash[:alpha]``,
    ``cfr:<table file>``, ``random``, ``minimax`` or ``scripted``.
    """
    name, _, argument = spec.strip().partition(":")
    try:
        match name:
            case "mcts":
                return BotAgent(role, MctsBot(int(argument or 100)))
            case "kuhn_nash":
                if game.name != "kuhn_poker":
                    raise ConfigurationError(f"kuhn_nash plays kuhn_poker, not {game.name}")
                return BotAgent(role, kuhn_nash_bot(float(argument) if argument else 1.0 / 3.0)[role])
            case "cfr":
                if not argument:
                    raise ConfigurationError("cfr opponent needs a table file, e.g. cfr:runs/leduc.cfr")
                table = CfrTable.load(argument)
                if table.game != game.name:
                    raise ConfigurationError(f"{argument} holds a {table.game} table, not {game.name}")
                return BotAgent(role, table.policy())
            case "random":
                return BotAgent(role, RandomBot())
            case "minimax":
                return BotAgent(role, MinimaxBot())
            case "scripted":
                if game.name not in RULE_GAMES:
                    raise ConfigurationError(f"no rule agent for {game.name}")
                return RuleAgent(role)
    except (ValueError, AlphaOutOfRange) as exc:
        raise ConfigurationError(f"bad opponent spec '{spec}': {exc}") from exc
    raise ConfigurationError(f"unknown opponent spec '{spec}'")


def build_handler(endpoint: EndpointConfig, model: str = "") -> ChatCompletionHandler:
    return ChatCompletionHandler(
        endpoint=endpoint.url,
        model=model or endpoint.model,
        api_key=endpoint.api_key,
        timeout=endpoint.timeout_sec,
        max_retries=endpoint.max_retries,
        max_in_flight=endpoint.max_in_flight,
    )


def build_agent(
    spec: AgentSpec,
    game: Game,
    role: PlayerRole,
    config: RunConfig,
    policy: TabularPolicy | None = None,
    handler: ChatCompletionHandler | None = None,
) -> Agent:
    match spec.kind:
        case AgentKind.TABULAR:
            if policy is None:
                policy = TabularPolicy.load(spec.checkpoint) if spec.checkpoint else TabularPolicy(role)
            return TabularAgent(
                role,
                policy,
                get_vocabulary(game.name),
                temperature=spec.temperature or config.sampling.temperature,
                option_cap=spec.option_cap,
            )
        case AgentKind.REMOTE:
            params: SamplingParams = config.sampling
            if spec.temperature:
                params = params.model_copy(update={"temperature": spec.temperature})
            return RemoteAgent(role, handler or build_handler(config.endpoint), params, spec.format_retries)
    return parse_opponent(spec.bot or "scripted", game, role)


def build_judge(spec: JudgeSpec, endpoint: EndpointConfig, handler: ChatCompletionHandler | None = None) -> Judge:
    if spec.kind == JudgeKind.LLM:
        return LlmJudge(
            handler or build_handler(endpoint, spec.model),
            parse_retries=spec.parse_retries,
            fallback=spec.fallback,
        )
    return ExactMatchJudge()


def parse_judges(names: str, endpoint: EndpointConfig) -> list[Judge]:
    """Comma-separated ``exact_match`` / ``llm`` / ``llm:<model>`` list."""
    judges: list[Judge] = []
    for item in filter(None, (n.strip() for n in names.split(","))):
        kind, _, model = item.partition(":")
        try:
            judge_kind = JudgeKind(kind)
        except ValueError:
            raise ConfigurationError(f"unknown judge '{item}'") from None
        judges.append(build_judge(JudgeSpec(kind=judge_kind, model=model), endpoint))
    if not judges:
        raise ConfigurationError("no judges given")
    return judges
