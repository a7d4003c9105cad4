from src.games.base import Game, GameSpec, GameState, Move, PlayerRole, StepResult
from src.games.registry import GAME_NAMES, get_game, new_game

__all__ = [
    "GAME_NAMES",
    "Game",
    "GameSpec",
    "GameState",
    "Move",
    "PlayerRole",
    "StepResult",
    "get_game",
    "new_game",
]
