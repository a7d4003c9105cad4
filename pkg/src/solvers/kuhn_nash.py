from src.core.exceptions import AlphaOutOfRange
from src.games.kuhn_poker import BET, CARDS, PASS
from src.solvers.policies import BotKind, TabularBot

# Value of the game to First under any member of the family.
KUHN_GAME_VALUE = -1.0 / 18.0


def _bet(probability: float) -> dict[int, float]:
    return {PASS: 1.0 - probability, BET: probability}


def kuhn_nash_tables(alpha: float) -> tuple[dict[str, dict[int, float]], dict[str, dict[int, float]]]:
    """Behaviour tables of the one-parameter Kuhn equilibrium family, keyed "<card>:<history>"."""
    if not 0.0 <= alpha <= 1.0 / 3.0 + 1e-12:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1/3], got {alpha}")
    alpha = min(alpha, 1.0 / 3.0)
    jack, queen, king = CARDS

    first = {
        f"{jack}:": _bet(alpha),
        f"{queen}:": _bet(0.0),
        f"{king}:": _bet(3.0 * alpha),
        # facing a bet after checking: BET means call
        f"{jack}:pb": _bet(0.0),
        f"{queen}:pb": _bet(alpha + 1.0 / 3.0),
        f"{king}:pb": _bet(1.0),
    }
    second = {
        f"{jack}:b": _bet(0.0),
        f"{queen}:b": _bet(1.0 / 3.0),
        f"{king}:b": _bet(1.0),
        f"{jack}:p": _bet(1.0 / 3.0),
        f"{queen}:p": _bet(0.0),
        f"{king}:p": _bet(1.0),
    }
    return first, second


def kuhn_nash_bot(alpha: float = 1.0 / 3.0) -> tuple[TabularBot, TabularBot]:
    first, second = kuhn_nash_tables(alpha)
    label = f"alpha={alpha:.4g}"
    return (
        TabularBot(BotKind.KUHN_NASH, first, label=label),
        TabularBot(BotKind.KUHN_NASH, second, label=label),
    )
