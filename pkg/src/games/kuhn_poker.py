import itertools

from src.games.base import (
    Game,
    GameSpec,
    GameState,
    PlayerRole,
    RewardSemantics,
    seeded_permutation,
)

PASS, BET = 0, 1
CARDS = ("J", "Q", "K")
ANTE = 1

RULES = (
    "Kuhn Poker with a three-card deck (J < Q < K). Each player antes 1 chip and "
    "receives one private card. First acts: Check or Bet 1. Facing a check, Second "
    "may Check (showdown) or Bet 1; facing a bet a player may Fold or Call. The "
    "higher card wins the pot at showdown; the net payoff ranges from -2 to +2."
)

# Betting sequences after which the hand is over.
_TERMINAL = {(PASS, PASS), (BET, PASS), (BET, BET), (PASS, BET, PASS), (PASS, BET, BET)}


def history_code(moves: tuple[int, ...]) -> str:
    return "".join("b" if m == BET else "p" for m in moves)


class KuhnPoker(Game):
    spec = GameSpec(
        name="kuhn_poker",
        num_actions=2,
        min_return=-2.0,
        max_return=2.0,
        reward_semantics=RewardSemantics.ZERO_SUM,
        perfect_information=False,
    )
    rules_summary = RULES

    def deal_from_seed(self, seed: int) -> tuple[int, ...]:
        return seeded_permutation(seed, len(CARDS))[:2]

    def chance_deals(self) -> list[tuple[tuple[int, ...], float]]:
        deals = list(itertools.permutations(range(len(CARDS)), 2))
        return [(deal, 1.0 / len(deals)) for deal in deals]

    def initial_state(self, deal: tuple[int, ...], seed: int = 0) -> GameState:
        return GameState(
            game=self.name,
            seed=seed,
            deal=tuple(deal),
            moves=(),
            current=PlayerRole.FIRST,
            payload=None,
        )

    def legal_move_ids(self, state: GameState) -> list[int]:
        return [] if state.terminal else [PASS, BET]

    def facing_bet(self, state: GameState) -> bool:
        return bool(state.moves) and state.moves[-1] == BET

    def move_display(self, state: GameState, move_id: int) -> str:
        if self.facing_bet(state):
            return "Call" if move_id == BET else "Fold"
        return "Bet" if move_id == BET else "Check"

    def transition(self, state: GameState, move_id: int) -> GameState:
        moves = state.moves + (move_id,)
        if moves not in _TERMINAL:
            return self._advance(state, move_id, current=state.current.other)
        return self._advance(state, move_id, current=None, cumulative=self._payoff(state.deal, moves))

    def _payoff(self, deal: tuple[int, ...], moves: tuple[int, ...]) -> tuple[float, float]:
        if moves[-1] == PASS and BET in moves:
            # the player who passed facing the bet folds
            folder = PlayerRole((len(moves) - 1) % 2)
            return (-1.0, 1.0) if folder is PlayerRole.FIRST else (1.0, -1.0)
        stake = ANTE + (1 if BET in moves else 0)
        first_wins = deal[0] > deal[1]
        return (float(stake), -float(stake)) if first_wins else (-float(stake), float(stake))

    def pot(self, state: GameState) -> int:
        return 2 * ANTE + sum(1 for m in state.moves if m == BET)

    def chance_text(self, state: GameState) -> list[str]:
        return [f"deal First={CARDS[state.deal[0]]} Second={CARDS[state.deal[1]]}"]

    def _betting_text(self, state: GameState) -> str:
        if not state.moves:
            return "(no actions yet)"
        parts = []
        for before, move_id in zip(self.path(state), state.moves):
            parts.append(f"{before.current.label}: {self.move_display(before, move_id)}")
        return ", ".join(parts)

    def observation_text(self, state: GameState, role: PlayerRole) -> str:
        lines = [
            f"Game: {self.name}",
            f"Rules: {self.rules_summary}",
            f"You are the {role.label} player.",
            f"Your card: {CARDS[state.deal[role]]}",
            f"Betting so far: {self._betting_text(state)}",
            f"Pot: {self.pot(state)} chips",
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
        return f"{CARDS[state.deal[role]]}:{history_code(state.moves)}"
