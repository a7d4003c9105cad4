import itertools
from dataclasses import dataclass, replace

from src.games.base import (
    Game,
    GameSpec,
    GameState,
    PlayerRole,
    RewardSemantics,
    seeded_permutation,
)

UNKNOWN = -1


@dataclass(frozen=True, slots=True)
class HanabiConfig:
    name: str
    colors: tuple[str, ...]
    ranks: int
    copies: tuple[int, ...]
    hand_size: int
    max_hints: int
    max_lives: int

    @property
    def max_score(self) -> int:
        return len(self.colors) * self.ranks

    @property
    def deck(self) -> tuple[int, ...]:
        cards = []
        for color in range(len(self.colors)):
            for rank in range(self.ranks):
                cards.extend([color * self.ranks + rank] * self.copies[rank])
        return tuple(cards)


MINI_HANABI = HanabiConfig(
    name="mini_hanabi",
    colors=("R",),
    ranks=4,
    copies=(1, 1, 1, 1),
    hand_size=1,
    max_hints=3,
    max_lives=1,
)

SIMPLE_HANABI = HanabiConfig(
    name="simple_hanabi",
    colors=("R", "Y"),
    ranks=3,
    copies=(1, 1, 1),
    hand_size=2,
    max_hints=3,
    max_lives=1,
)


@dataclass(frozen=True, slots=True)
class Table:
    hands: tuple[tuple[int, ...], tuple[int, ...]]
    # per card slot: (known color index or UNKNOWN, known rank index or UNKNOWN)
    knowledge: tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]
    deck_pos: int
    fireworks: tuple[int, ...]
    hints: int
    lives: int
    discards: tuple[int, ...]
    turns_left: int | None
    last_event: str = ""


class Hanabi(Game):
    """Two-player cooperative Hanabi with a configurable deck."""

    def __init__(self, config: HanabiConfig) -> None:
        self.config = config
        self.spec = GameSpec(
            name=config.name,
            num_actions=2 * config.hand_size + len(config.colors) + config.ranks,
            min_return=0.0,
            max_return=float(config.max_score),
            reward_semantics=RewardSemantics.SHARED,
            perfect_information=False,
        )
        self.rules_summary = (
            f"Cooperative Hanabi with colors {', '.join(config.colors)} and ranks "
            f"1-{config.ranks}; hand size {config.hand_size}, {config.max_hints} hint "
            f"tokens, {config.max_lives} life token(s). You cannot see your own cards. "
            "On your turn: play a card (it must be the next rank of its color's "
            "firework, otherwise a life is lost), discard a card (regains a hint, only "
            "when hints are below the maximum), or spend a hint to tell your partner "
            "every card of one color or one rank in their hand. Each played card "
            f"scores +1 for both players (maximum {config.max_score}). Losing the last "
            "life ends the game with score 0; after the deck runs out each player "
            "takes one more turn."
        )

    # Action encoding

    @property
    def play_base(self) -> int:
        return 0

    @property
    def discard_base(self) -> int:
        return self.config.hand_size

    @property
    def color_hint_base(self) -> int:
        return 2 * self.config.hand_size

    @property
    def rank_hint_base(self) -> int:
        return 2 * self.config.hand_size + len(self.config.colors)

    def card_color(self, card: int) -> int:
        return card // self.config.ranks

    def card_rank(self, card: int) -> int:
        return card % self.config.ranks

    def card_text(self, card: int) -> str:
        return f"{self.config.colors[self.card_color(card)]}{self.card_rank(card) + 1}"

    def action_text(self, move_id: int) -> str:
        if move_id < self.discard_base:
            return f"Play card {move_id}"
        if move_id < self.color_hint_base:
            return f"Discard card {move_id - self.discard_base}"
        if move_id < self.rank_hint_base:
            return f"Hint color {self.config.colors[move_id - self.color_hint_base]}"
        return f"Hint rank {move_id - self.rank_hint_base + 1}"

    # Chance

    def deal_from_seed(self, seed: int) -> tuple[int, ...]:
        deck = self.config.deck
        return tuple(deck[i] for i in seeded_permutation(seed, len(deck)))

    def chance_deals(self) -> list[tuple[tuple[int, ...], float]]:
        orders = sorted(set(itertools.permutations(self.config.deck)))
        return [(order, 1.0 / len(orders)) for order in orders]

    def initial_state(self, deal: tuple[int, ...], seed: int = 0) -> GameState:
        size = self.config.hand_size
        hands = (tuple(deal[0:size]), tuple(deal[size : 2 * size]))
        blank = ((UNKNOWN, UNKNOWN),) * size
        deck_pos = 2 * size
        table = Table(
            hands=hands,
            knowledge=(blank, blank),
            deck_pos=deck_pos,
            fireworks=(0,) * len(self.config.colors),
            hints=self.config.max_hints,
            lives=self.config.max_lives,
            discards=(),
            turns_left=2 if deck_pos >= len(deal) else None,
        )
        return GameState(
            game=self.name,
            seed=seed,
            deal=tuple(deal),
            moves=(),
            current=PlayerRole.FIRST,
            payload=table,
        )

    # Moves

    def legal_move_ids(self, state: GameState) -> list[int]:
        if state.terminal:
            return []
        table: Table = state.payload
        me, partner = state.current, state.current.other
        own = len(table.hands[me])
        moves = [self.play_base + i for i in range(own)]
        if table.hints < self.config.max_hints:
            moves.extend(self.discard_base + i for i in range(own))
        if table.hints > 0:
            partner_hand = table.hands[partner]
            for color in range(len(self.config.colors)):
                if any(self.card_color(c) == color for c in partner_hand):
                    moves.append(self.color_hint_base + color)
            for rank in range(self.config.ranks):
                if any(self.card_rank(c) == rank for c in partner_hand):
                    moves.append(self.rank_hint_base + rank)
        return moves

    def move_display(self, state: GameState, move_id: int) -> str:
        return self.action_text(move_id)

    def transition(self, state: GameState, move_id: int) -> GameState:
        table: Table = state.payload
        me, partner = state.current, state.current.other
        score = sum(table.fireworks)

        if move_id >= self.color_hint_base:
            table = self._hint(table, partner, move_id)
        else:
            index = move_id % self.config.hand_size
            card = table.hands[me][index]
            table = self._remove_and_draw(table, me, index, state.deal)
            if move_id < self.discard_base:
                table = self._play(table, card)
            else:
                table = replace(
                    table,
                    hints=table.hints + 1,
                    discards=table.discards + (card,),
                    last_event=f"{me.label} discarded {self.card_text(card)}",
                )

        new_score = sum(table.fireworks)
        ended = (
            table.lives == 0
            or new_score == self.config.max_score
            or table.turns_left == 0
        )
        if table.lives == 0:
            new_score = 0
        cumulative = (
            state.cumulative[0] + (new_score - score),
            state.cumulative[1] + (new_score - score),
        )
        return self._advance(
            state,
            move_id,
            payload=table,
            current=None if ended else partner,
            cumulative=cumulative,
        )

    def _hint(self, table: Table, target: PlayerRole, move_id: int) -> Table:
        hand = table.hands[target]
        knowledge = list(table.knowledge[target])
        if move_id < self.rank_hint_base:
            color = move_id - self.color_hint_base
            for i, card in enumerate(hand):
                if self.card_color(card) == color:
                    knowledge[i] = (color, knowledge[i][1])
        else:
            rank = move_id - self.rank_hint_base
            for i, card in enumerate(hand):
                if self.card_rank(card) == rank:
                    knowledge[i] = (knowledge[i][0], rank)
        all_knowledge = list(table.knowledge)
        all_knowledge[target] = tuple(knowledge)
        return replace(
            table,
            knowledge=tuple(all_knowledge),
            hints=table.hints - 1,
            turns_left=_tick(table.turns_left),
            last_event=f"hint to {target.label}: {self.action_text(move_id)}",
        )

    def _remove_and_draw(
        self, table: Table, player: PlayerRole, index: int, deal: tuple[int, ...]
    ) -> Table:
        hand = list(table.hands[player])
        knowledge = list(table.knowledge[player])
        del hand[index]
        del knowledge[index]
        deck_pos = table.deck_pos
        turns_left = _tick(table.turns_left)
        if deck_pos < len(deal):
            hand.append(deal[deck_pos])
            knowledge.append((UNKNOWN, UNKNOWN))
            deck_pos += 1
            if deck_pos == len(deal):
                turns_left = 2
        hands = list(table.hands)
        hands[player] = tuple(hand)
        all_knowledge = list(table.knowledge)
        all_knowledge[player] = tuple(knowledge)
        return replace(
            table,
            hands=tuple(hands),
            knowledge=tuple(all_knowledge),
            deck_pos=deck_pos,
            turns_left=turns_left,
        )

    def _play(self, table: Table, card: int) -> Table:
        color, rank = self.card_color(card), self.card_rank(card)
        if table.fireworks[color] == rank:
            fireworks = list(table.fireworks)
            fireworks[color] += 1
            hints = table.hints
            if rank == self.config.ranks - 1 and hints < self.config.max_hints:
                hints += 1
            return replace(
                table,
                fireworks=tuple(fireworks),
                hints=hints,
                last_event=f"played {self.card_text(card)} successfully",
            )
        return replace(
            table,
            lives=table.lives - 1,
            discards=table.discards + (card,),
            last_event=f"misplayed {self.card_text(card)}",
        )

    # Views

    def chance_text(self, state: GameState) -> list[str]:
        return ["deck order " + " ".join(self.card_text(c) for c in state.deal)]

    def knowledge_text(self, slot: tuple[int, int]) -> str:
        color = self.config.colors[slot[0]] if slot[0] != UNKNOWN else "?"
        rank = str(slot[1] + 1) if slot[1] != UNKNOWN else "?"
        return color + rank

    def observation_text(self, state: GameState, role: PlayerRole) -> str:
        table: Table = state.payload
        partner = role.other
        fireworks = ", ".join(
            f"{color}={height}" for color, height in zip(self.config.colors, table.fireworks)
        )
        own = ", ".join(
            f"card {i}: {self.knowledge_text(k)}" for i, k in enumerate(table.knowledge[role])
        )
        visible = ", ".join(
            f"card {i}: {self.card_text(c)}" for i, c in enumerate(table.hands[partner])
        )
        lines = [
            f"Game: {self.name}",
            f"Rules: {self.rules_summary}",
            f"You are the {role.label} player.",
            f"Fireworks: {fireworks}",
            f"Hint tokens: {table.hints}/{self.config.max_hints}, life tokens: {table.lives}/{self.config.max_lives}",
            f"Cards left in deck: {len(state.deal) - table.deck_pos}",
            f"Discards: {' '.join(self.card_text(c) for c in table.discards) or '(none)'}",
            f"Your hand (what hints told you): {own or '(empty)'}",
            f"Partner's hand: {visible or '(empty)'}",
        ]
        if table.last_event:
            lines.append(f"Last event: {table.last_event}")
        if state.terminal:
            lines.append(f"Game over. Shared score: {state.cumulative[0]:g}")
        else:
            lines.append(f"Current turn: {state.current.label}")
            lines.append(f"Legal moves: {self.legal_moves_text(state)}")
        return "\n".join(lines)

    def information_state_key(self, state: GameState, role: PlayerRole) -> str:
        table: Table = state.payload
        own = ",".join(self.knowledge_text(k) for k in table.knowledge[role])
        partner = ",".join(self.card_text(c) for c in table.hands[role.other])
        fireworks = "".join(str(h) for h in table.fireworks)
        left = len(state.deal) - table.deck_pos
        return f"{own}|{partner}|f{fireworks}|h{table.hints}l{table.lives}d{left}"

    def prediction_labels(self, state: GameState) -> tuple[str, ...]:
        return tuple(self.action_text(i) for i in range(self.spec.num_actions))


def _tick(turns_left: int | None) -> int | None:
    return None if turns_left is None else turns_left - 1
