import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from src.core.exceptions import CorruptRecord, UnsupportedGame
from src.games.base import Game, GameState, PlayerRole
from src.solvers.policies import BotKind, Strategy, TabularBot, uniform

logger = logging.getLogger(__name__)

CFR_GAMES = ("kuhn_poker", "leduc_holdem")
# Games small enough to traverse every deal on every iteration.
EXHAUSTIVE_CHANCE = ("kuhn_poker",)


@dataclass
class CfrTable:
    game: str
    regrets: dict[str, dict[int, float]] = field(default_factory=dict)
    strategy_sums: dict[str, dict[int, float]] = field(default_factory=dict)
    iterations: int = 0

    def current_strategy(self, key: str, legal: list[int]) -> Strategy:
        """Regret matching over the positive part of the cumulative regrets."""
        regrets = self.regrets.get(key)
        if regrets is None:
            return uniform(legal)
        positive = {m: max(0.0, regrets.get(m, 0.0)) for m in legal}
        total = sum(positive.values())
        if total <= 0.0:
            return uniform(legal)
        return {m: r / total for m, r in positive.items()}

    def average_strategy(self) -> dict[str, Strategy]:
        average = {}
        for key, sums in self.strategy_sums.items():
            total = sum(sums.values())
            if total > 0.0:
                average[key] = {m: s / total for m, s in sums.items()}
            else:
                average[key] = uniform(sorted(sums))
        return average

    def policy(self) -> TabularBot:
        return TabularBot(BotKind.CFR_AVERAGE, self.average_strategy(), label=f"{self.game}@{self.iterations}")

    # Persistence

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"# cfr game={self.game} iterations={self.iterations}"]
        for key in sorted(self.regrets):
            regrets = ",".join(f"{m}={v!r}" for m, v in sorted(self.regrets[key].items()))
            sums = ",".join(f"{m}={v!r}" for m, v in sorted(self.strategy_sums.get(key, {}).items()))
            lines.append(f"{key}\t{regrets}\t{sums}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "CfrTable":
        path = Path(path)
        text = path.read_text(encoding="utf-8").splitlines()
        if not text or not text[0].startswith("# cfr "):
            raise CorruptRecord(str(path), 1, "missing cfr header")
        header = dict(part.split("=", 1) for part in text[0][len("# cfr ") :].split())
        table = cls(game=header.get("game", ""), iterations=int(header.get("iterations", 0)))
        for line_no, line in enumerate(text[1:], start=2):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorruptRecord(str(path), line_no, "expected key, regrets and strategy sums")
            try:
                table.regrets[parts[0]] = _parse_values(parts[1])
                table.strategy_sums[parts[0]] = _parse_values(parts[2])
            except ValueError as exc:
                raise CorruptRecord(str(path), line_no, str(exc)) from exc
        return table


def _parse_values(text: str) -> dict[int, float]:
    if not text:
        return {}
    values = {}
    for item in text.split(","):
        move_id, value = item.split("=", 1)
        values[int(move_id)] = float(value)
    return values


class CfrSolver:
    """
    Vanilla counterfactual regret minimization with simultaneous updates.
    Regret and strategy-sum increments of one iteration are accumulated
    against the strategy in force at its start and applied at its end.
    Kuhn traverses every deal; Leduc samples one deal per iteration.
    """

    def __init__(self, game: Game, seed: int = 0, table: CfrTable | None = None) -> None:
        if game.name not in CFR_GAMES:
            raise UnsupportedGame(f"CFR supports {', '.join(CFR_GAMES)}, not {game.name}")
        self.game = game
        self.table = table or CfrTable(game=game.name)
        self.rng = np.random.default_rng(seed)
        self._deals = game.chance_deals()

    def train(self, iterations: int, log_every: int = 0) -> CfrTable:
        for _ in range(iterations):
            self.iterate()
            if log_every and self.table.iterations % log_every == 0:
                logger.info(f"cfr {self.game.name}: iteration {self.table.iterations}")
        return self.table

    def iterate(self) -> None:
        regret_delta: dict[str, dict[int, float]] = defaultdict(lambda: defaultdict(float))
        sum_delta: dict[str, dict[int, float]] = defaultdict(lambda: defaultdict(float))
        strategies: dict[str, Strategy] = {}

        if self.game.name in EXHAUSTIVE_CHANCE:
            for deal, chance in self._deals:
                self._walk(self.game.initial_state(deal), (1.0, 1.0), chance, strategies, regret_delta, sum_delta)
        else:
            deal, _ = self._deals[int(self.rng.integers(len(self._deals)))]
            self._walk(self.game.initial_state(deal), (1.0, 1.0), 1.0, strategies, regret_delta, sum_delta)

        for key, deltas in regret_delta.items():
            regrets = self.table.regrets.setdefault(key, {})
            for move_id, delta in deltas.items():
                regrets[move_id] = regrets.get(move_id, 0.0) + delta
        for key, deltas in sum_delta.items():
            sums = self.table.strategy_sums.setdefault(key, {})
            for move_id, delta in deltas.items():
                sums[move_id] = sums.get(move_id, 0.0) + delta
        self.table.iterations += 1

    def _walk(
        self,
        state: GameState,
        reach: tuple[float, float],
        chance: float,
        strategies: dict[str, Strategy],
        regret_delta: dict[str, dict[int, float]],
        sum_delta: dict[str, dict[int, float]],
    ) -> tuple[float, float]:
        if state.terminal:
            return state.cumulative

        player = state.current
        legal = self.game.legal_move_ids(state)
        key = self.game.information_state_key(state, player)
        if key not in strategies:
            strategies[key] = self.table.current_strategy(key, legal)
        strategy = strategies[key]

        children: dict[int, tuple[float, float]] = {}
        node_value = [0.0, 0.0]
        for move_id in legal:
            p = strategy[move_id]
            child_reach = (reach[0] * p, reach[1]) if player is PlayerRole.FIRST else (reach[0], reach[1] * p)
            children[move_id] = self._walk(
                self.game.transition(state, move_id), child_reach, chance, strategies, regret_delta, sum_delta
            )
            node_value[0] += p * children[move_id][0]
            node_value[1] += p * children[move_id][1]

        counterfactual = chance * reach[player.other]
        for move_id in legal:
            regret_delta[key][move_id] += counterfactual * (children[move_id][player] - node_value[player])
            sum_delta[key][move_id] += reach[player] * strategy[move_id]
        return node_value[0], node_value[1]


def cfr_train(game: Game, iterations: int, seed: int = 0) -> CfrTable:
    return CfrSolver(game, seed=seed).train(iterations)
