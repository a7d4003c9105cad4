from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class IntentVocabulary:
    """Finite intent labels of one game; predictions use move display strings."""

    game: str
    intents: tuple[str, ...]

    def intent_for_move(self, display: str) -> str:
        """Label a move by its surface form, for agents that have no richer rationale."""
        lowered = display.lower()
        if self.intents == POKER_INTENTS:
            return "aggressive" if lowered in ("bet", "raise") else "passive"
        if self.intents == HANABI_INTENTS:
            for intent in HANABI_INTENTS:
                if lowered.startswith(intent):
                    return intent
        return self.intents[-1]


TIC_TAC_TOE_INTENTS = (
    "win_now",
    "block_win",
    "build_fork",
    "block_fork",
    "take_center",
    "take_corner",
    "take_edge",
)
CONNECT_FOUR_INTENTS = ("win_now", "block_win", "build_threat", "take_center", "develop")
POKER_INTENTS = ("aggressive", "passive")
HANABI_INTENTS = ("play", "hint", "discard")

VOCABULARIES = {
    "tic_tac_toe": IntentVocabulary("tic_tac_toe", TIC_TAC_TOE_INTENTS),
    "connect_four": IntentVocabulary("connect_four", CONNECT_FOUR_INTENTS),
    "kuhn_poker": IntentVocabulary("kuhn_poker", POKER_INTENTS),
    "leduc_holdem": IntentVocabulary("leduc_holdem", POKER_INTENTS),
    "mini_hanabi": IntentVocabulary("mini_hanabi", HANABI_INTENTS),
    "simple_hanabi": IntentVocabulary("simple_hanabi", HANABI_INTENTS),
}


def get_vocabulary(game_name: str) -> IntentVocabulary:
    return VOCABULARIES[game_name]
