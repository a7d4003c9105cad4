import random
from abc import ABC, abstractmethod
from enum import StrEnum

from src.core.exceptions import TerminalState
from src.games.base import Game, GameState

PROBABILITY_TOLERANCE = 1e-9


class BotKind(StrEnum):
    MCTS = "mcts"
    KUHN_NASH = "kuhn_nash"
    CFR_AVERAGE = "cfr_average"
    RANDOM = "random"
    MINIMAX = "minimax"
    BEST_RESPONSE = "best_response"


Strategy = dict[int, float]


class BotPolicy(ABC):
    """Static opponent: a distribution over legal move ids at every decision state."""

    kind: BotKind

    @abstractmethod
    def action_probabilities(self, game: Game, state: GameState) -> Strategy: ...

    def choose(self, game: Game, state: GameState, rng: random.Random) -> int:
        if state.terminal:
            raise TerminalState(f"{self.kind} bot asked to move in a terminal state")
        probabilities = self.action_probabilities(game, state)
        draw = rng.random()
        cumulative = 0.0
        last = None
        for move_id in sorted(probabilities):
            p = probabilities[move_id]
            if p <= 0.0:
                continue
            last = move_id
            cumulative += p
            if draw < cumulative:
                return move_id
        return last

    def describe(self) -> str:
        return str(self.kind)


def uniform(move_ids: list[int]) -> Strategy:
    return {move_id: 1.0 / len(move_ids) for move_id in move_ids}


def normalized(weights: dict[int, float], move_ids: list[int]) -> Strategy:
    """Restrict ``weights`` to ``move_ids`` and renormalize; uniform when nothing is left."""
    kept = {m: max(0.0, weights.get(m, 0.0)) for m in move_ids}
    total = sum(kept.values())
    if total <= 0.0:
        return uniform(move_ids)
    return {m: w / total for m, w in kept.items()}


class RandomBot(BotPolicy):
    kind = BotKind.RANDOM

    def action_probabilities(self, game: Game, state: GameState) -> Strategy:
        return uniform(game.legal_move_ids(state))


class TabularBot(BotPolicy):
    """
    Behaviour strategy keyed by the acting player's information-state key.
    Keys missing from the table play uniformly over the legal moves.
    """

    def __init__(self, kind: BotKind, table: dict[str, Strategy], label: str = "") -> None:
        self.kind = kind
        self.table = table
        self.label = label

    def action_probabilities(self, game: Game, state: GameState) -> Strategy:
        legal = game.legal_move_ids(state)
        key = game.information_state_key(state, state.current)
        strategy = self.table.get(key)
        if strategy is None:
            return uniform(legal)
        return normalized(strategy, legal)

    def describe(self) -> str:
        return f"{self.kind}:{self.label}" if self.label else str(self.kind)


class ProfileBot(BotPolicy):
    """Routes each decision to the member policy of the player to move."""

    def __init__(self, first: BotPolicy, second: BotPolicy) -> None:
        self.members = (first, second)
        self.kind = first.kind

    def action_probabilities(self, game: Game, state: GameState) -> Strategy:
        return self.members[state.current].action_probabilities(game, state)

    def choose(self, game: Game, state: GameState, rng: random.Random) -> int:
        return self.members[state.current].choose(game, state, rng)
