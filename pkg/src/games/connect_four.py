from src.games.base import Game, GameSpec, GameState, PlayerRole, RewardSemantics
from src.games.tic_tac_toe import CROSS, EMPTY, MARKS, NOUGHT, mark_for

ROWS, COLS, CONNECT = 6, 7, 4

RULES = (
    "Connect Four on a 6x7 grid. Player X (First) and player O (Second) alternate "
    "dropping a disc into a column; it falls to the lowest empty cell. Four discs "
    "in a row horizontally, vertically or diagonally win (+1/-1); a full grid is a draw."
)

_DIRECTIONS = ((0, 1), (1, 0), (1, 1), (1, -1))


def connects(board: tuple[int, ...], row: int, col: int) -> bool:
    mark = board[row * COLS + col]
    for dr, dc in _DIRECTIONS:
        count = 1
        for sign in (1, -1):
            r, c = row + sign * dr, col + sign * dc
            while 0 <= r < ROWS and 0 <= c < COLS and board[r * COLS + c] == mark:
                count += 1
                r += sign * dr
                c += sign * dc
        if count >= CONNECT:
            return True
    return False


def drop_row(board: tuple[int, ...], col: int) -> int:
    for row in range(ROWS - 1, -1, -1):
        if board[row * COLS + col] == EMPTY:
            return row
    return -1


class ConnectFour(Game):
    spec = GameSpec(
        name="connect_four",
        num_actions=COLS,
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
            payload=(EMPTY,) * (ROWS * COLS),
        )

    def from_rows(self, rows: list[str], seed: int = 0) -> GameState:
        """Position from six row strings, top row first, using X/O/_ cells."""
        if len(rows) != ROWS or any(len(r) != COLS for r in rows):
            raise ValueError(f"expected {ROWS} rows of {COLS} cells")
        lookup = {v: k for k, v in MARKS.items()}
        board = tuple(lookup[ch] for row in rows for ch in row)
        crosses, noughts = board.count(CROSS), board.count(NOUGHT)
        current = PlayerRole.FIRST if crosses == noughts else PlayerRole.SECOND
        return GameState(
            game=self.name, seed=seed, deal=(), moves=(), current=current, payload=board
        )

    def legal_move_ids(self, state: GameState) -> list[int]:
        if state.terminal:
            return []
        return [col for col in range(COLS) if state.payload[col] == EMPTY]

    def move_display(self, state: GameState, move_id: int) -> str:
        role = state.current if state.current is not None else PlayerRole.FIRST
        return f"{MARKS[mark_for(role)]}({move_id})"

    def transition(self, state: GameState, move_id: int) -> GameState:
        mover = state.current
        row = drop_row(state.payload, move_id)
        board = list(state.payload)
        board[row * COLS + move_id] = mark_for(mover)
        board_t = tuple(board)
        if connects(board_t, row, move_id):
            returns = (1.0, -1.0) if mover is PlayerRole.FIRST else (-1.0, 1.0)
            return self._advance(state, move_id, payload=board_t, current=None, cumulative=returns)
        if EMPTY not in board_t[:COLS]:
            return self._advance(state, move_id, payload=board_t, current=None, cumulative=(0.0, 0.0))
        return self._advance(state, move_id, payload=board_t, current=mover.other)

    def observation_text(self, state: GameState, role: PlayerRole) -> str:
        grid = [
            " ".join(MARKS[state.payload[r * COLS + c]] for c in range(COLS))
            for r in range(ROWS)
        ]
        lines = [
            f"Game: {self.name}",
            f"Rules: {self.rules_summary}",
            f"You are player {MARKS[mark_for(role)]} ({role.label}).",
            "Board (top row first, columns numbered 0-6 from the left):",
            *grid,
            " ".join(str(c) for c in range(COLS)),
        ]
        if state.moves:
            last = state.moves[-1]
            top = next(r for r in range(ROWS) if state.payload[r * COLS + last] != EMPTY)
            lines.append(f"Last move: {MARKS[state.payload[top * COLS + last]]}({last})")
        if state.terminal:
            lines.append(f"Game over. Returns: X={state.cumulative[0]:+g}, O={state.cumulative[1]:+g}")
        else:
            lines.append(f"Current turn: {MARKS[mark_for(state.current)]}")
            lines.append(f"Legal moves: {self.legal_moves_text(state)}")
        return "\n".join(lines)

    def information_state_key(self, state: GameState, role: PlayerRole) -> str:
        return "".join(MARKS[cell] for cell in state.payload)
