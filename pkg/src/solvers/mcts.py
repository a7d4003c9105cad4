import math
import random
from dataclasses import dataclass, field

from src.core.exceptions import TerminalState, UnsupportedGame
from src.games.base import Game, GameState, PlayerRole
from src.solvers.policies import BotKind, BotPolicy, Strategy

DEFAULT_EXPLORATION = math.sqrt(2.0)

WIN, LOSS = 1, -1


@dataclass(eq=False)
class Node:
    state: GameState
    mover: PlayerRole | None
    move_id: int | None = None
    parent: "Node | None" = None
    children: dict[int, "Node"] = field(default_factory=dict)
    untried: list[int] = field(default_factory=list)
    visits: int = 0
    total: float = 0.0
    # game-theoretic result for ``mover`` once proven
    proven: int | None = None

    def mean(self) -> float:
        return self.total / self.visits if self.visits else 0.0


class MctsSearch:
    """
    UCT over uniform-random playouts. Rewards are the mover's return mapped
    onto [0, 1]. Proven wins and losses are backed up from terminal children,
    and expansion tries moves that end the game before the others.
    """

    def __init__(self, game: Game, simulations: int, exploration: float = DEFAULT_EXPLORATION, seed: int = 0) -> None:
        if not game.spec.perfect_information:
            raise UnsupportedGame(f"MCTS bots play perfect-information games, not {game.name}")
        if simulations < 1:
            raise ValueError("simulations must be positive")
        self.game = game
        self.simulations = simulations
        self.exploration = exploration
        self.rng = random.Random(seed)

    def _scaled(self, returns: tuple[float, float], role: PlayerRole) -> float:
        spec = self.game.spec
        return (returns[role] - spec.min_return) / (spec.max_return - spec.min_return)

    def _make_node(self, state: GameState, mover: PlayerRole | None, move_id: int | None, parent: Node | None) -> Node:
        node = Node(state=state, mover=mover, move_id=move_id, parent=parent)
        if state.terminal:
            if mover is not None:
                score = state.cumulative[mover]
                if score >= self.game.spec.max_return:
                    node.proven = WIN
                elif score <= self.game.spec.min_return:
                    node.proven = LOSS
        else:
            node.untried = self.game.legal_move_ids(state)
        return node

    def choose(self, state: GameState) -> int:
        if state.terminal:
            raise TerminalState("MCTS asked to move in a terminal state")
        legal = self.game.legal_move_ids(state)
        if len(legal) == 1:
            return legal[0]

        root = self._make_node(state, None, None, None)
        for _ in range(self.simulations):
            if root.proven is not None:
                break
            node = self._select(root)
            if not node.state.terminal and node.proven is None:
                node = self._expand(node)
            reward_first = self._rollout(node.state)
            self._backpropagate(node, reward_first)
        return self._best_move(root)

    def _select(self, node: Node) -> Node:
        while not node.state.terminal and not node.untried and node.proven is None:
            open_children = [c for c in node.children.values() if c.proven is None]
            winning = [c for c in node.children.values() if c.proven == WIN]
            if winning:
                return winning[0]
            if not open_children:
                return node
            log_visits = math.log(max(1, node.visits))
            node = max(
                open_children,
                key=lambda c: (
                    c.mean() + self.exploration * math.sqrt(log_visits / c.visits) if c.visits else float("inf"),
                    -c.move_id,
                ),
            )
        return node

    def _expand(self, node: Node) -> Node:
        mover = node.state.current
        index = None
        for i, move_id in enumerate(node.untried):
            successor = self.game.transition(node.state, move_id)
            if not successor.terminal:
                continue
            if successor.cumulative[mover] >= self.game.spec.max_return:
                index = i
                break
            if index is None:
                index = i
        if index is None:
            index = self.rng.randrange(len(node.untried))
        move_id = node.untried.pop(index)
        child = self._make_node(self.game.transition(node.state, move_id), node.state.current, move_id, node)
        node.children[move_id] = child
        return child

    def _rollout(self, state: GameState) -> tuple[float, float]:
        while not state.terminal:
            state = self.game.transition(state, self.rng.choice(self.game.legal_move_ids(state)))
        return state.cumulative

    def _backpropagate(self, node: Node, returns: tuple[float, float]) -> None:
        while node is not None:
            node.visits += 1
            if node.mover is not None:
                node.total += self._scaled(returns, node.mover)
            self._prove(node)
            node = node.parent

    @staticmethod
    def _prove(node: Node) -> None:
        if node.proven is not None or not node.children:
            return
        # children results are stated for the opponent of ``node.mover``
        if any(c.proven == WIN for c in node.children.values()):
            node.proven = LOSS
        elif not node.untried and all(c.proven == LOSS for c in node.children.values()):
            node.proven = WIN

    def _best_move(self, root: Node) -> int:
        children = sorted(root.children.values(), key=lambda c: c.move_id)
        winning = [c for c in children if c.proven == WIN]
        if winning:
            return winning[0].move_id
        candidates = [c for c in children if c.proven != LOSS] or children
        return max(candidates, key=lambda c: (c.visits, -c.move_id)).move_id


def mcts_choose(
    game: Game,
    state: GameState,
    simulations: int,
    exploration: float = DEFAULT_EXPLORATION,
    seed: int = 0,
) -> int:
    return MctsSearch(game, simulations, exploration, seed).choose(state)


class MctsBot(BotPolicy):
    kind = BotKind.MCTS

    def __init__(self, simulations: int, exploration: float = DEFAULT_EXPLORATION, seed: int = 0) -> None:
        self.simulations = simulations
        self.exploration = exploration
        self.seed = seed

    def action_probabilities(self, game: Game, state: GameState) -> Strategy:
        return {mcts_choose(game, state, self.simulations, self.exploration, self.seed): 1.0}

    def choose(self, game: Game, state: GameState, rng: random.Random) -> int:
        if state.terminal:
            raise TerminalState("MCTS asked to move in a terminal state")
        return mcts_choose(game, state, self.simulations, self.exploration, rng.getrandbits(63))

    def describe(self) -> str:
        return f"mcts:{self.simulations}"
