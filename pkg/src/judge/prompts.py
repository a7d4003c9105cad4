from src.core.exceptions import UnknownGame
from src.protocol.prompts import load_prompt

JUDGE_SYSTEM_PROMPT = load_prompt("judge_system")
TIC_TAC_TOE_JUDGE_PROMPT = load_prompt("judge_tic_tac_toe")
KUHN_POKER_JUDGE_PROMPT = load_prompt("judge_kuhn_poker")
HANABI_JUDGE_PROMPT = load_prompt("judge_hanabi")

# Connect Four has no listing of its own and shares the board-game rubric.
JUDGE_PROMPTS = {
    "tic_tac_toe": TIC_TAC_TOE_JUDGE_PROMPT,
    "connect_four": TIC_TAC_TOE_JUDGE_PROMPT,
    "kuhn_poker": KUHN_POKER_JUDGE_PROMPT,
    "leduc_holdem": KUHN_POKER_JUDGE_PROMPT,
    "mini_hanabi": HANABI_JUDGE_PROMPT,
    "simple_hanabi": HANABI_JUDGE_PROMPT,
}


def judge_prompt_for(game: str) -> str:
    try:
        return JUDGE_PROMPTS[game]
    except KeyError:
        raise UnknownGame(f"no judge prompt for game {game!r}") from None


def render_judge_messages(game: str, prediction: str, ground_truth: str) -> list[dict[str, str]]:
    user = f"{judge_prompt_for(game)}\n\nPREDICTION: {prediction}\nGROUND TRUTH: {ground_truth}"
    return [
        {"role": "system", "content": JUDGE_SYSTEM_PROMPT},
        {"role": "user", "content": user},
    ]
