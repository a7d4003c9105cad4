from functools import lru_cache

from src.core.exceptions import UnknownGame
from src.games.base import Game, GameState
from src.games.connect_four import ConnectFour
from src.games.hanabi import MINI_HANABI, SIMPLE_HANABI, Hanabi
from src.games.kuhn_poker import KuhnPoker
from src.games.leduc_holdem import LeducHoldem
from src.games.tic_tac_toe import TicTacToe

GAME_NAMES = (
    "tic_tac_toe",
    "connect_four",
    "kuhn_poker",
    "leduc_holdem",
    "mini_hanabi",
    "simple_hanabi",
)


@lru_cache(maxsize=None)
def get_game(name: str) -> Game:
    match name:
        case "tic_tac_toe":
            return TicTacToe()
        case "connect_four":
            return ConnectFour()
        case "kuhn_poker":
            return KuhnPoker()
        case "leduc_holdem":
            return LeducHoldem()
        case "mini_hanabi":
            return Hanabi(MINI_HANABI)
        case "simple_hanabi":
            return Hanabi(SIMPLE_HANABI)
    raise UnknownGame(f"unknown game '{name}', expected one of {', '.join(GAME_NAMES)}")


def new_game(name: str, seed: int) -> GameState:
    return get_game(name).new_game(seed)
