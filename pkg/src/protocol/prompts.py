from functools import cache

from src.constants import PROMPTS_DIR


@cache
def load_prompt(name: str) -> str:
    """Read a checked-in prompt asset; the file's final newline is not part of the prompt."""
    return (PROMPTS_DIR / f"{name}.txt").read_text(encoding="utf-8").removesuffix("\n")


STRUCTURED_REASONING_PROMPT = load_prompt("structured_reasoning")


def render_agent_prompt(observation: str) -> str:
    if not observation:
        return STRUCTURED_REASONING_PROMPT
    return f"{observation}\n\n{STRUCTURED_REASONING_PROMPT}"
