import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from enum import IntEnum, StrEnum
from typing import Any

import numpy as np

from src.core.exceptions import IllegalMove, NotTerminal

logger = logging.getLogger(__name__)

HISTORY_SEPARATOR = ";"


class PlayerRole(IntEnum):
    FIRST = 0
    SECOND = 1

    @property
    def other(self) -> "PlayerRole":
        return PlayerRole(1 - self.value)

    @property
    def label(self) -> str:
        return "First" if self is PlayerRole.FIRST else "Second"

    @classmethod
    def parse(cls, value: "str | int | PlayerRole") -> "PlayerRole":
        if isinstance(value, PlayerRole):
            return value
        if isinstance(value, int):
            return cls(value)
        return cls[value.strip().upper()]


class RewardSemantics(StrEnum):
    ZERO_SUM = "zero_sum"
    SHARED = "shared"


@dataclass(frozen=True, slots=True)
class Move:
    id: int
    display: str


@dataclass(frozen=True, slots=True)
class GameSpec:
    name: str
    num_actions: int
    min_return: float
    max_return: float
    reward_semantics: RewardSemantics
    perfect_information: bool

    def __post_init__(self) -> None:
        if not self.min_return < self.max_return:
            raise ValueError(f"{self.name}: min_return must be below max_return")

    def normalize(self, value: float) -> float:
        """Affine map of a raw return onto [0, 100], clipped."""
        score = 100.0 * (value - self.min_return) / (self.max_return - self.min_return)
        return float(min(100.0, max(0.0, score)))


@dataclass(frozen=True, slots=True)
class GameState:
    """
    Immutable position. ``deal`` holds every chance outcome of the episode,
    fixed from ``seed`` when the game is created; ``current`` is None once the
    state is terminal.
    """

    game: str
    seed: int
    deal: tuple[int, ...]
    moves: tuple[int, ...]
    current: PlayerRole | None
    payload: Any
    cumulative: tuple[float, float] = (0.0, 0.0)

    @property
    def terminal(self) -> bool:
        return self.current is None


@dataclass(frozen=True, slots=True)
class StepResult:
    rewards: tuple[float, float]
    terminal: bool
    observations: tuple[str, str]


def seeded_permutation(seed: int, size: int) -> tuple[int, ...]:
    rng = np.random.default_rng(seed)
    return tuple(int(x) for x in rng.permutation(size))


class Game(ABC):
    """Environment contract shared by every registered game."""

    spec: GameSpec
    rules_summary: str = ""

    @property
    def name(self) -> str:
        return self.spec.name

    # Construction and chance

    def new_game(self, seed: int) -> GameState:
        return self.initial_state(self.deal_from_seed(seed), seed=seed)

    def deal_from_seed(self, seed: int) -> tuple[int, ...]:
        return ()

    def chance_deals(self) -> list[tuple[tuple[int, ...], float]]:
        """Every possible deal with its probability."""
        return [((), 1.0)]

    @abstractmethod
    def initial_state(self, deal: tuple[int, ...], seed: int = 0) -> GameState: ...

    # Moves

    @abstractmethod
    def legal_move_ids(self, state: GameState) -> list[int]: ...

    @abstractmethod
    def move_display(self, state: GameState, move_id: int) -> str: ...

    @abstractmethod
    def transition(self, state: GameState, move_id: int) -> GameState:
        """Successor without legality checks; solvers use it on their hot path."""

    def legal_moves(self, state: GameState) -> list[Move]:
        if state.terminal:
            return []
        return [
            Move(id=move_id, display=self.move_display(state, move_id))
            for move_id in self.legal_move_ids(state)
        ]

    def apply_move(self, state: GameState, move: Move | int) -> tuple[GameState, StepResult]:
        move_id = move.id if isinstance(move, Move) else move
        if state.terminal or move_id not in self.legal_move_ids(state):
            raise IllegalMove(f"{self.name}: move {move_id} is not legal here")
        successor = self.transition(state, move_id)
        rewards = (
            successor.cumulative[0] - state.cumulative[0],
            successor.cumulative[1] - state.cumulative[1],
        )
        observations = (
            self.observation_text(successor, PlayerRole.FIRST),
            self.observation_text(successor, PlayerRole.SECOND),
        )
        return successor, StepResult(
            rewards=rewards, terminal=successor.terminal, observations=observations
        )

    def parse_move(self, state: GameState, text: str) -> int | None:
        for move in self.legal_moves(state):
            if move.display == text:
                return move.id
        return None

    def returns(self, state: GameState) -> tuple[float, float]:
        if not state.terminal:
            raise NotTerminal(f"{self.name}: returns requested for a live state")
        return state.cumulative

    # Views

    @abstractmethod
    def observation_text(self, state: GameState, role: PlayerRole) -> str: ...

    @abstractmethod
    def information_state_key(self, state: GameState, role: PlayerRole) -> str: ...

    def chance_text(self, state: GameState) -> list[str]:
        return []

    def prediction_labels(self, state: GameState) -> tuple[str, ...]:
        """Candidate displays for the opponent's next move, public information only."""
        labels: set[str] = set()
        for move_id in self.legal_move_ids(state):
            successor = self.transition(state, move_id)
            if not successor.terminal:
                labels.update(m.display for m in self.legal_moves(successor))
        return tuple(sorted(labels)) or ("None",)

    def legal_moves_text(self, state: GameState) -> str:
        return ", ".join(m.display for m in self.legal_moves(state))

    # History

    def path(self, state: GameState) -> list[GameState]:
        """States visited from the initial deal up to ``state`` (inclusive)."""
        current = self.initial_state(state.deal, seed=state.seed)
        visited = [current]
        for move_id in state.moves:
            current = self.transition(current, move_id)
            visited.append(current)
        return visited

    def history(self, state: GameState) -> list[str]:
        entries = [f"chance:{text}" for text in self.chance_text(state)]
        for before, move_id in zip(self.path(state), state.moves):
            entries.append(self.move_display(before, move_id))
        return entries

    def serialize_history(self, state: GameState) -> str:
        path = self.path(state)
        return HISTORY_SEPARATOR.join(
            self.move_display(before, move_id) for before, move_id in zip(path, state.moves)
        )

    def replay(self, seed: int, history: str) -> GameState:
        state = self.new_game(seed)
        if not history:
            return state
        for display in history.split(HISTORY_SEPARATOR):
            move_id = self.parse_move(state, display)
            if move_id is None:
                raise IllegalMove(f"{self.name}: cannot replay '{display}'")
            state = self.transition(state, move_id)
        return state

    def _advance(self, state: GameState, move_id: int, **changes: Any) -> GameState:
        return replace(state, moves=state.moves + (move_id,), **changes)
