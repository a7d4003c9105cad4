import itertools
from dataclasses import dataclass

from src.games.base import (
    Game,
    GameSpec,
    GameState,
    PlayerRole,
    RewardSemantics,
    seeded_permutation,
)

FOLD, CALL, RAISE = 0, 1, 2
RANKS = ("J", "Q", "K")
SUITS = 2
DECK_SIZE = len(RANKS) * SUITS
ANTE = 1
RAISE_SIZES = (2, 4)
MAX_RAISES = 2

RULES = (
    "Leduc Hold'em with six cards (J, Q, K in two suits). Each player antes 1 chip "
    "and receives one private card. Two betting rounds; a public card is revealed "
    "before the second. Raises are 2 chips in round one and 4 in round two, at most "
    "two raises per round. A pair with the public card beats any unpaired hand, "
    "otherwise the higher card wins; equal ranks split the pot."
)


@dataclass(frozen=True, slots=True)
class Betting:
    round: int
    contributions: tuple[int, int]
    raises: int
    round_moves: tuple[int, ...]
    rounds: tuple[tuple[int, ...], ...] = ()


def rank_of(card: int) -> int:
    return card // SUITS


def _code(moves: tuple[int, ...]) -> str:
    return "".join("fcr"[m] for m in moves)


class LeducHoldem(Game):
    """
    The second round opens with the player who did not close the first round,
    so turns alternate strictly across the chance node.
    """

    spec = GameSpec(
        name="leduc_holdem",
        num_actions=3,
        min_return=-13.0,
        max_return=13.0,
        reward_semantics=RewardSemantics.ZERO_SUM,
        perfect_information=False,
    )
    rules_summary = RULES

    def deal_from_seed(self, seed: int) -> tuple[int, ...]:
        return seeded_permutation(seed, DECK_SIZE)[:3]

    def chance_deals(self) -> list[tuple[tuple[int, ...], float]]:
        deals = list(itertools.permutations(range(DECK_SIZE), 3))
        return [(deal, 1.0 / len(deals)) for deal in deals]

    def initial_state(self, deal: tuple[int, ...], seed: int = 0) -> GameState:
        return GameState(
            game=self.name,
            seed=seed,
            deal=tuple(deal),
            moves=(),
            current=PlayerRole.FIRST,
            payload=Betting(round=0, contributions=(ANTE, ANTE), raises=0, round_moves=()),
        )

    def facing_bet(self, state: GameState) -> bool:
        c = state.payload.contributions
        return c[state.current] < c[state.current.other]

    def legal_move_ids(self, state: GameState) -> list[int]:
        if state.terminal:
            return []
        moves = [FOLD] if self.facing_bet(state) else []
        moves.append(CALL)
        if state.payload.raises < MAX_RAISES:
            moves.append(RAISE)
        return moves

    def move_display(self, state: GameState, move_id: int) -> str:
        facing = state.current is not None and self.facing_bet(state)
        if move_id == FOLD:
            return "Fold"
        if move_id == CALL:
            return "Call" if facing else "Check"
        return "Raise" if facing else "Bet"

    def transition(self, state: GameState, move_id: int) -> GameState:
        betting: Betting = state.payload
        me, other = state.current, state.current.other
        contributions = list(betting.contributions)

        if move_id == FOLD:
            loss = float(contributions[me])
            returns = (-loss, loss) if me is PlayerRole.FIRST else (loss, -loss)
            return self._advance(state, move_id, current=None, cumulative=returns)

        round_moves = betting.round_moves + (move_id,)
        if move_id == RAISE:
            contributions[me] = contributions[other] + RAISE_SIZES[betting.round]
            payload = Betting(
                round=betting.round,
                contributions=tuple(contributions),
                raises=betting.raises + 1,
                round_moves=round_moves,
                rounds=betting.rounds,
            )
            return self._advance(state, move_id, current=other, payload=payload)

        contributions[me] = contributions[other]
        if not betting.round_moves:
            payload = Betting(
                round=betting.round,
                contributions=tuple(contributions),
                raises=betting.raises,
                round_moves=round_moves,
                rounds=betting.rounds,
            )
            return self._advance(state, move_id, current=other, payload=payload)

        # a check behind a check or a call of a raise closes the round
        rounds = betting.rounds + (round_moves,)
        if betting.round == 0:
            payload = Betting(
                round=1,
                contributions=tuple(contributions),
                raises=0,
                round_moves=(),
                rounds=rounds,
            )
            return self._advance(state, move_id, current=other, payload=payload)

        payload = Betting(
            round=betting.round,
            contributions=tuple(contributions),
            raises=betting.raises,
            round_moves=(),
            rounds=rounds,
        )
        return self._advance(
            state,
            move_id,
            current=None,
            payload=payload,
            cumulative=self._showdown(state.deal, contributions[0]),
        )

    def _showdown(self, deal: tuple[int, ...], stake: int) -> tuple[float, float]:
        board = rank_of(deal[2])
        strengths = []
        for card in deal[:2]:
            rank = rank_of(card)
            strengths.append((1 if rank == board else 0, rank))
        if strengths[0] == strengths[1]:
            return (0.0, 0.0)
        if strengths[0] > strengths[1]:
            return (float(stake), -float(stake))
        return (-float(stake), float(stake))

    def board_visible(self, state: GameState) -> bool:
        return state.payload.round == 1

    def chance_text(self, state: GameState) -> list[str]:
        first, second, board = (RANKS[rank_of(c)] for c in state.deal)
        return [f"deal First={first} Second={second}", f"public card {board}"]

    def _betting_text(self, state: GameState) -> str:
        if not state.moves:
            return "(no actions yet)"
        parts = []
        round_index = 0
        for before, move_id in zip(self.path(state), state.moves):
            if before.payload.round != round_index:
                round_index = before.payload.round
                parts.append("| public card revealed |")
            parts.append(f"{before.current.label}: {self.move_display(before, move_id)}")
        return " ".join(parts)

    def observation_text(self, state: GameState, role: PlayerRole) -> str:
        betting: Betting = state.payload
        lines = [
            f"Game: {self.name}",
            f"Rules: {self.rules_summary}",
            f"You are the {role.label} player.",
            f"Your card: {RANKS[rank_of(state.deal[role])]}",
            f"Public card: {RANKS[rank_of(state.deal[2])] if self.board_visible(state) else '(not revealed)'}",
            f"Round: {betting.round + 1}",
            f"Betting so far: {self._betting_text(state)}",
            f"Chips committed: First={betting.contributions[0]}, Second={betting.contributions[1]}",
        ]
        if state.terminal:
            lines.append(
                f"Hand over. Returns: First={state.cumulative[0]:+g}, Second={state.cumulative[1]:+g}"
            )
        else:
            lines.append(f"Current turn: {state.current.label}")
            lines.append(f"Legal moves: {self.legal_moves_text(state)}")
        return "\n".join(lines)

    def information_state_key(self, state: GameState, role: PlayerRole) -> str:
        betting: Betting = state.payload
        private = RANKS[rank_of(state.deal[role])]
        public = RANKS[rank_of(state.deal[2])] if self.board_visible(state) else "-"
        rounds = [_code(r) for r in betting.rounds]
        if betting.round_moves or len(rounds) < 2:
            rounds.append(_code(betting.round_moves))
        return f"{private}{public}:{'/'.join(rounds)}"
