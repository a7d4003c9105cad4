import logging

from src.core.exceptions import GameTooLarge, TerminalState, UnsupportedGame
from src.games.base import Game, GameState, PlayerRole
from src.solvers.policies import BotKind, BotPolicy, Strategy

logger = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 3_000_000
# scores are WIN_SCORE minus the plies to the end, so faster wins rank higher
WIN_SCORE = 100


class MinimaxSolver:
    """
    Memoized negamax over depth-scored outcomes. Scores are stated for the
    player to move; the game value is their sign.
    """

    def __init__(self, game: Game, node_budget: int = DEFAULT_NODE_BUDGET) -> None:
        if not game.spec.perfect_information:
            raise UnsupportedGame(f"minimax needs a perfect-information game, not {game.name}")
        self.game = game
        self.node_budget = node_budget
        self.nodes = 0
        self._scores: dict[tuple, int] = {}

    def score(self, state: GameState) -> int:
        key = (state.payload, state.current)
        cached = self._scores.get(key)
        if cached is not None:
            return cached
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise GameTooLarge(f"{self.game.name}: minimax exceeded {self.node_budget} nodes")
        best = -WIN_SCORE
        mover = state.current
        for move_id in self.game.legal_move_ids(state):
            best = max(best, self._child_score(state, move_id, mover))
            if best == WIN_SCORE - 1:
                break
        self._scores[key] = best
        return best

    def value(self, state: GameState) -> int:
        return _sign(self.score(state))

    def _child_score(self, state: GameState, move_id: int, mover: PlayerRole) -> int:
        child = self.game.transition(state, move_id)
        if child.terminal:
            return _sign(child.cumulative[mover]) * (WIN_SCORE - 1)
        score = -self.score(child)
        return score - _sign(score)

    def solve(self, state: GameState) -> tuple[int, list[int]]:
        """
        Game value for the player to move and the moves that realize it in the
        fewest plies: the quickest wins, or the slowest losses. Every move that
        keeps the game value, however long it takes, is listed by
        ``value_moves``.
        """
        scored = self._scored_moves(state)
        best = max(s for s, _ in scored)
        logger.debug(f"{self.game.name}: minimax visited {self.nodes} nodes")
        return _sign(best), sorted(m for s, m in scored if s == best)

    def value_moves(self, state: GameState) -> list[int]:
        """Every move whose outcome equals the game value, regardless of depth."""
        scored = self._scored_moves(state)
        value = _sign(max(s for s, _ in scored))
        return sorted(m for s, m in scored if _sign(s) == value)

    def _scored_moves(self, state: GameState) -> list[tuple[int, int]]:
        if state.terminal:
            raise TerminalState("minimax asked to solve a terminal state")
        mover = state.current
        return [(self._child_score(state, m, mover), m) for m in self.game.legal_move_ids(state)]


def _sign(value: float) -> int:
    return (value > 0) - (value < 0)


def minimax_solve(game: Game, state: GameState, node_budget: int = DEFAULT_NODE_BUDGET) -> tuple[int, list[int]]:
    """Value in {-1, 0, +1} and the fastest optimal moves; see ``MinimaxSolver.solve``."""
    return MinimaxSolver(game, node_budget).solve(state)


class MinimaxBot(BotPolicy):
    """Plays the lowest-id optimal move; one solver cache serves a whole game."""

    kind = BotKind.MINIMAX

    def __init__(self, node_budget: int = DEFAULT_NODE_BUDGET) -> None:
        self.node_budget = node_budget
        self._solvers: dict[str, MinimaxSolver] = {}

    def action_probabilities(self, game: Game, state: GameState) -> Strategy:
        solver = self._solvers.get(game.name)
        if solver is None:
            solver = self._solvers[game.name] = MinimaxSolver(game, self.node_budget)
        _, optimal = solver.solve(state)
        return {optimal[0]: 1.0}
