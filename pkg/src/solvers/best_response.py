import logging
from collections import defaultdict
from dataclasses import dataclass

from src.core.exceptions import GameTooLarge
from src.games.base import Game, GameState, PlayerRole
from src.solvers.policies import BotKind, BotPolicy, TabularBot

logger = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 2_000_000


@dataclass(frozen=True, slots=True)
class ExploitabilityReport:
    game: str
    best_response_first: float
    best_response_second: float
    exploitability: float
    iterations: int = 0

    def as_dict(self) -> dict[str, float | int | str]:
        return {
            "game": self.game,
            "best_response_first": self.best_response_first,
            "best_response_second": self.best_response_second,
            "exploitability": self.exploitability,
            "iterations": self.iterations,
        }


def _history_key(state: GameState) -> tuple[tuple[int, ...], tuple[int, ...]]:
    return state.deal, state.moves


class _Budget:
    def __init__(self, game: Game, limit: int) -> None:
        self.game = game
        self.limit = limit
        self.used = 0

    def spend(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise GameTooLarge(f"{self.game.name}: tree exceeds {self.limit} nodes")


def profile_value(
    game: Game,
    first: BotPolicy,
    second: BotPolicy,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> tuple[float, float]:
    """Exact expected returns of a strategy profile, summed over every chance deal."""
    budget = _Budget(game, node_budget)
    bots = (first, second)

    def expect(state: GameState) -> tuple[float, float]:
        budget.spend()
        if state.terminal:
            return state.cumulative
        totals = [0.0, 0.0]
        for move_id, p in bots[state.current].action_probabilities(game, state).items():
            if p <= 0.0:
                continue
            child = expect(game.transition(state, move_id))
            totals[0] += p * child[0]
            totals[1] += p * child[1]
        return totals[0], totals[1]

    value = [0.0, 0.0]
    for deal, chance in game.chance_deals():
        first_value, second_value = expect(game.initial_state(deal))
        value[0] += chance * first_value
        value[1] += chance * second_value
    return value[0], value[1]


def best_response(
    game: Game,
    opponent: BotPolicy,
    role: PlayerRole,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> tuple[TabularBot, float]:
    """
    Exact best response of ``role`` against a fixed opponent.

    Histories are grouped by the responder's information-state key and
    weighted by chance probability times the opponent's reach; each group
    takes the move maximising the weighted value of its continuations.
    Returns the deterministic response policy and its expected value.
    """
    budget = _Budget(game, node_budget)
    groups: dict[str, list[tuple[GameState, float]]] = defaultdict(list)

    def collect(state: GameState, weight: float) -> None:
        budget.spend()
        if state.terminal:
            return
        if state.current == role:
            groups[game.information_state_key(state, role)].append((state, weight))
            for move_id in game.legal_move_ids(state):
                collect(game.transition(state, move_id), weight)
            return
        for move_id, p in opponent.action_probabilities(game, state).items():
            if p > 0.0:
                collect(game.transition(state, move_id), weight * p)

    roots = [(game.initial_state(deal), chance) for deal, chance in game.chance_deals()]
    for root, chance in roots:
        collect(root, chance)
    logger.debug(f"{game.name}: best response over {len(groups)} information states")

    choices: dict[str, int] = {}
    values: dict[tuple, float] = {}

    def value(state: GameState) -> float:
        key = _history_key(state)
        if key in values:
            return values[key]
        if state.terminal:
            result = state.cumulative[role]
        elif state.current == role:
            move_id = choose(game.information_state_key(state, role))
            result = value(game.transition(state, move_id))
        else:
            result = 0.0
            for move_id, p in opponent.action_probabilities(game, state).items():
                if p > 0.0:
                    result += p * value(game.transition(state, move_id))
        values[key] = result
        return result

    def choose(info_key: str) -> int:
        if info_key in choices:
            return choices[info_key]
        members = groups[info_key]
        legal = game.legal_move_ids(members[0][0])
        best_move, best_value = legal[0], float("-inf")
        for move_id in legal:
            total = sum(weight * value(game.transition(s, move_id)) for s, weight in members)
            if total > best_value + 1e-15:
                best_move, best_value = move_id, total
        choices[info_key] = best_move
        return best_move

    expected = sum(chance * value(root) for root, chance in roots)
    table = {key: {choose(key): 1.0} for key in groups}
    return TabularBot(BotKind.BEST_RESPONSE, table, label=role.label), expected


def exploitability(
    game: Game,
    first: BotPolicy,
    second: BotPolicy,
    iterations: int = 0,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> ExploitabilityReport:
    """Average best-response gain against a profile of a zero-sum game."""
    _, against_second = best_response(game, second, PlayerRole.FIRST, node_budget)
    _, against_first = best_response(game, first, PlayerRole.SECOND, node_budget)
    return ExploitabilityReport(
        game=game.name,
        best_response_first=against_second,
        best_response_second=against_first,
        exploitability=(against_second + against_first) / 2.0,
        iterations=iterations,
    )
