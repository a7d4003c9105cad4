import random
from dataclasses import replace

import numpy as np

from src.agents.base import Agent, compose_response, result_from_text
from src.agents.schemas import ActContext, AgentKind, AgentResult
from src.agents.vocab import get_vocabulary
from src.games.base import Game, GameState, PlayerRole
from src.games.connect_four import COLS, connects, drop_row
from src.games.hanabi import UNKNOWN, Hanabi
from src.games.tic_tac_toe import EMPTY, WIN_LINES, mark_for
from src.solvers.policies import BotPolicy

NO_PREDICTION = "None"

# Tic-Tac-Toe

CENTER = 4
CORNERS = (0, 2, 6, 8)
EDGES = (1, 3, 5, 7)
OPPOSITE_CORNER = {0: 8, 2: 6, 6: 2, 8: 0}


def _place(board: tuple[int, ...], cell: int, mark: int) -> tuple[int, ...]:
    cells = list(board)
    cells[cell] = mark
    return tuple(cells)


def threat_cells(board: tuple[int, ...], mark: int) -> set[int]:
    """Empty cells that would complete a line for ``mark``."""
    cells = set()
    for line in WIN_LINES:
        marks = [board[i] for i in line]
        if marks.count(mark) == 2 and marks.count(EMPTY) == 1:
            cells.add(line[marks.index(EMPTY)])
    return cells


def fork_cells(board: tuple[int, ...], mark: int) -> list[int]:
    return [
        cell
        for cell, value in enumerate(board)
        if value == EMPTY and len(threat_cells(_place(board, cell, mark), mark)) >= 2
    ]


def _other(mark: int) -> int:
    return 3 - mark


def tic_tac_toe_rule(board: tuple[int, ...], mark: int) -> tuple[int, str]:
    """First applicable rule of the classic perfect-play ladder, as (cell, intent)."""
    opponent = _other(mark)
    empties = [cell for cell, value in enumerate(board) if value == EMPTY]

    wins = sorted(threat_cells(board, mark))
    if wins:
        return wins[0], "win_now"
    blocks = sorted(threat_cells(board, opponent))
    if blocks:
        return blocks[0], "block_win"
    forks = fork_cells(board, mark)
    if forks:
        return forks[0], "build_fork"

    opponent_forks = fork_cells(board, opponent)
    if opponent_forks:

        def forces_safely(cell: int) -> bool:
            after = _place(board, cell, mark)
            threats = threat_cells(after, mark)
            if len(threats) != 1:
                return False
            reply = _place(after, threats.pop(), opponent)
            return len(threat_cells(reply, opponent)) < 2

        if len(opponent_forks) == 1:
            return opponent_forks[0], "block_fork"
        forcing = [cell for cell in empties if forces_safely(cell)]
        preferred = [cell for cell in forcing if cell in opponent_forks]
        if preferred:
            return preferred[0], "block_fork"
        if forcing:
            return forcing[0], "block_fork"
        return opponent_forks[0], "block_fork"

    if board[CENTER] == EMPTY:
        return CENTER, "take_center"
    for corner, opposite in OPPOSITE_CORNER.items():
        if board[corner] == opponent and board[opposite] == EMPTY:
            return opposite, "take_corner"
    for corner in CORNERS:
        if board[corner] == EMPTY:
            return corner, "take_corner"
    return next(edge for edge in EDGES if board[edge] == EMPTY), "take_edge"


def tic_tac_toe_intent(board: tuple[int, ...], mark: int, cell: int) -> str:
    """Intent label of an arbitrary move, read off the same ladder."""
    if cell in threat_cells(board, mark):
        return "win_now"
    if cell in threat_cells(board, _other(mark)):
        return "block_win"
    if cell in fork_cells(board, mark):
        return "build_fork"
    if cell in fork_cells(board, _other(mark)):
        return "block_fork"
    if cell == CENTER:
        return "take_center"
    if cell in CORNERS:
        return "take_corner"
    return "take_edge"


# Connect Four

CENTER_ORDER = (3, 2, 4, 1, 5, 0, 6)


def _drop(board: tuple[int, ...], col: int, mark: int) -> tuple[tuple[int, ...], int]:
    row = drop_row(board, col)
    cells = list(board)
    cells[row * COLS + col] = mark
    return tuple(cells), row


def winning_columns(board: tuple[int, ...], mark: int) -> list[int]:
    columns = []
    for col in range(COLS):
        if drop_row(board, col) < 0:
            continue
        after, row = _drop(board, col, mark)
        if connects(after, row, col):
            columns.append(col)
    return columns


def connect_four_rule(board: tuple[int, ...], mark: int) -> tuple[int, str]:
    opponent = _other(mark)
    legal = [col for col in CENTER_ORDER if drop_row(board, col) >= 0]
    wins = winning_columns(board, mark)
    if wins:
        return wins[0], "win_now"
    blocks = winning_columns(board, opponent)
    if blocks:
        return blocks[0], "block_win"
    safe = [col for col in legal if not winning_columns(_drop(board, col, mark)[0], opponent)]
    for col in safe:
        if winning_columns(_drop(board, col, mark)[0], mark):
            return col, "build_threat"
    if 3 in safe:
        return 3, "take_center"
    return (safe or legal)[0], "develop"


def connect_four_intent(board: tuple[int, ...], mark: int, col: int) -> str:
    if col in winning_columns(board, mark):
        return "win_now"
    if col in winning_columns(board, _other(mark)):
        return "block_win"
    if winning_columns(_drop(board, col, mark)[0], mark):
        return "build_threat"
    return "take_center" if col == 3 else "develop"


# Hanabi


def hanabi_knowledge_playable(game: Hanabi, state: GameState, role: PlayerRole) -> list[int]:
    """Own cards that hints prove playable."""
    table = state.payload
    playable = []
    for index, (color, rank) in enumerate(table.knowledge[role]):
        if rank == UNKNOWN:
            continue
        colors = [color] if color != UNKNOWN else range(len(game.config.colors))
        if all(table.fireworks[c] == rank for c in colors):
            playable.append(index)
    return playable


def hanabi_rule(game: Hanabi, state: GameState) -> tuple[int, str]:
    table = state.payload
    me = state.current
    legal = game.legal_move_ids(state)
    known = hanabi_knowledge_playable(game, state, me)
    if known:
        return known[0], "play"
    if table.hints > 0:
        for index, card in enumerate(table.hands[me.other]):
            color, rank = game.card_color(card), game.card_rank(card)
            if table.fireworks[color] == rank and table.knowledge[me.other][index][1] == UNKNOWN:
                hint = game.rank_hint_base + rank
                if hint in legal:
                    return hint, "hint"
    discards = [m for m in legal if game.discard_base <= m < game.color_hint_base]
    if discards:
        return discards[0], "discard"
    hints = [m for m in legal if m >= game.color_hint_base]
    if hints:
        return hints[0], "hint"
    return legal[0], "play"


def hanabi_prediction(game: Hanabi, state: GameState) -> str:
    """Partner's next move, from public knowledge only."""
    if state.terminal:
        return NO_PREDICTION
    partner = state.current
    known = hanabi_knowledge_playable(game, state, partner)
    if known:
        return game.action_text(game.play_base + known[0])
    if state.payload.hints > 0:
        return game.action_text(game.rank_hint_base + min(state.payload.fireworks))
    return game.action_text(game.discard_base)


def intent_of(game: Game, state: GameState, move_id: int) -> str:
    """Intent label for any legal move, used when a bot rather than a rule picked it."""
    match game.name:
        case "tic_tac_toe":
            return tic_tac_toe_intent(state.payload, mark_for(state.current), move_id)
        case "connect_four":
            return connect_four_intent(state.payload, mark_for(state.current), move_id)
    return get_vocabulary(game.name).intent_for_move(game.move_display(state, move_id))


def _rule(game: Game, state: GameState) -> tuple[int, str]:
    match game.name:
        case "tic_tac_toe":
            return tic_tac_toe_rule(state.payload, mark_for(state.current))
        case "connect_four":
            return connect_four_rule(state.payload, mark_for(state.current))
        case "mini_hanabi" | "simple_hanabi":
            return hanabi_rule(game, state)
    raise ValueError(f"no rule agent for {game.name}")


def _predict_reply(game: Game, state: GameState, move_id: int) -> str:
    successor = game.transition(state, move_id)
    if successor.terminal:
        return NO_PREDICTION
    if isinstance(game, Hanabi):
        return hanabi_prediction(game, successor)
    reply, _ = _rule(game, successor)
    return game.move_display(successor, reply)


class RuleAgent(Agent):
    """Deterministic rule policy for the board games and Hanabi."""

    kind = AgentKind.SCRIPTED

    async def respond(self, ctx: ActContext, rng: np.random.Generator) -> AgentResult:
        game, state = ctx.game, ctx.state
        move_id, intent = _rule(game, state)
        if isinstance(game, Hanabi):
            opponent_intent = _last_intent(game, state)
        else:
            opponent_intent = _rule(game, _as_opponent(state))[1]
        raw = compose_response(
            ctx,
            opponent_intent=opponent_intent,
            opponent_prediction=game.move_display(state, move_id),
            my_intent=intent,
            action=game.move_display(state, move_id),
            my_prediction=_predict_reply(game, state, move_id),
            think_text=f"Rule policy picks the first applicable rule: {intent}.",
        )
        return result_from_text(ctx, raw)

    def describe(self) -> str:
        return f"scripted:{self.role.label}"


def _as_opponent(state: GameState) -> GameState:
    """The same position with the other side to move."""
    return replace(state, current=state.current.other)


def _last_intent(game: Game, state: GameState) -> str:
    vocabulary = get_vocabulary(game.name)
    if not state.moves:
        return vocabulary.intents[0]
    previous = game.path(state)[-2]
    return intent_of(game, previous, state.moves[-1])


class BotAgent(Agent):
    """Wraps a solver bot and labels its moves in the structured format."""

    kind = AgentKind.SCRIPTED

    def __init__(self, role: PlayerRole, bot: BotPolicy) -> None:
        super().__init__(role)
        self.bot = bot

    async def respond(self, ctx: ActContext, rng: np.random.Generator) -> AgentResult:
        game, state = ctx.game, ctx.state
        move_id = self.bot.choose(game, state, random.Random(int(rng.integers(2**62))))
        display = game.move_display(state, move_id)
        labels = sorted(ctx.prediction_labels)
        raw = compose_response(
            ctx,
            opponent_intent=_last_intent(game, state),
            opponent_prediction=display,
            my_intent=intent_of(game, state, move_id),
            action=display,
            my_prediction=labels[0] if labels else NO_PREDICTION,
            think_text=f"{self.bot.describe()} selects {display}.",
        )
        return result_from_text(ctx, raw)

    def describe(self) -> str:
        return f"bot:{self.bot.describe()}:{self.role.label}"
