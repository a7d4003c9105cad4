from src.games.base import Game, GameSpec, GameState, PlayerRole, RewardSemantics

EMPTY, CROSS, NOUGHT = 0, 1, 2
MARKS = {EMPTY: "_", CROSS: "X", NOUGHT: "O"}
SIZE = 3

WIN_LINES: tuple[tuple[int, int, int], ...] = (
    (0, 1, 2),
    (3, 4, 5),
    (6, 7, 8),
    (0, 3, 6),
    (1, 4, 7),
    (2, 5, 8),
    (0, 4, 8),
    (2, 4, 6),
)

RULES = (
    "Tic-Tac-Toe on a 3x3 grid. Player X (First) and player O (Second) alternate "
    "placing their mark in an empty cell. Three marks in a row, column or diagonal "
    "win (+1 to the winner, -1 to the loser); a full board without a line is a draw (0)."
)


def mark_for(role: PlayerRole) -> int:
    return CROSS if role is PlayerRole.FIRST else NOUGHT


def winner_of(board: tuple[int, ...]) -> int:
    for a, b, c in WIN_LINES:
        if board[a] != EMPTY and board[a] == board[b] == board[c]:
            return board[a]
    return EMPTY


def format_board(board: tuple[int, ...]) -> list[str]:
    return [
        " ".join(MARKS[board[row * SIZE + col]] for col in range(SIZE))
        for row in range(SIZE)
    ]


class TicTacToe(Game):
    spec = GameSpec(
        name="tic_tac_toe",
        num_actions=9,
        min_return=-1.0,
        max_return=1.0,
        reward_semantics=RewardSemantics.ZERO_SUM,
        perfect_information=True,
    )
    rules_summary = RULES

    def initial_state(self, deal: tuple[int, ...] = (), seed: int = 0) -> GameState:
        return GameState(
            game=self.name,
            seed=seed,
            deal=(),
            moves=(),
            current=PlayerRole.FIRST,
            payload=(EMPTY,) * (SIZE * SIZE),
        )

    def from_board(self, rows: str, seed: int = 0) -> GameState:
        """
        Position from a "O_O/XX_/___" style board. X moves first, so the side
        to move follows from the mark counts. The move history is left empty.
        """
        cells = rows.replace("/", "").replace(" ", "")
        if len(cells) != SIZE * SIZE:
            raise ValueError(f"expected {SIZE * SIZE} cells, got {len(cells)}")
        lookup = {v: k for k, v in MARKS.items()}
        board = tuple(lookup[ch] for ch in cells)
        crosses, noughts = board.count(CROSS), board.count(NOUGHT)
        current = PlayerRole.FIRST if crosses == noughts else PlayerRole.SECOND
        state = GameState(
            game=self.name, seed=seed, deal=(), moves=(), current=current, payload=board
        )
        return self._settle(state, board, current)

    def legal_move_ids(self, state: GameState) -> list[int]:
        if state.terminal:
            return []
        return [i for i, cell in enumerate(state.payload) if cell == EMPTY]

    def move_display(self, state: GameState, move_id: int) -> str:
        role = state.current if state.current is not None else PlayerRole.FIRST
        symbol = MARKS[mark_for(role)]
        return f"{symbol}({move_id // SIZE},{move_id % SIZE})"

    def transition(self, state: GameState, move_id: int) -> GameState:
        mover = state.current
        board = list(state.payload)
        board[move_id] = mark_for(mover)
        board_t = tuple(board)
        return self._settle(self._advance(state, move_id, payload=board_t), board_t, mover.other)

    def _settle(self, state: GameState, board: tuple[int, ...], to_move: PlayerRole) -> GameState:
        winner = winner_of(board)
        if winner == CROSS:
            return _finish(state, (1.0, -1.0))
        if winner == NOUGHT:
            return _finish(state, (-1.0, 1.0))
        if EMPTY not in board:
            return _finish(state, (0.0, 0.0))
        return GameState(
            game=state.game,
            seed=state.seed,
            deal=state.deal,
            moves=state.moves,
            current=to_move,
            payload=board,
            cumulative=state.cumulative,
        )

    def observation_text(self, state: GameState, role: PlayerRole) -> str:
        lines = [
            f"Game: {self.name}",
            f"Rules: {self.rules_summary}",
            f"You are player {MARKS[mark_for(role)]} ({role.label}).",
            "Board (row 0 at the top, cells addressed as (row,col)):",
            *format_board(state.payload),
        ]
        if state.moves:
            last = state.moves[-1]
            lines.append(f"Last move: {MARKS[state.payload[last]]}({last // SIZE},{last % SIZE})")
        if state.terminal:
            lines.append(f"Game over. Returns: X={state.cumulative[0]:+g}, O={state.cumulative[1]:+g}")
        else:
            lines.append(f"Current turn: {MARKS[mark_for(state.current)]}")
            lines.append(f"Legal moves: {self.legal_moves_text(state)}")
        return "\n".join(lines)

    def information_state_key(self, state: GameState, role: PlayerRole) -> str:
        return "/".join(row.replace(" ", "") for row in format_board(state.payload))


def _finish(state: GameState, returns: tuple[float, float]) -> GameState:
    return GameState(
        game=state.game,
        seed=state.seed,
        deal=state.deal,
        moves=state.moves,
        current=None,
        payload=state.payload,
        cumulative=returns,
    )
