import copy
import itertools
import logging
from pathlib import Path

import numpy as np

from src.agents.base import Agent, compose_response, result_from_text
from src.agents.schemas import ActContext, AgentKind, AgentResult
from src.agents.vocab import IntentVocabulary
from src.core.exceptions import CorruptRecord, UnknownOption
from src.games.base import PlayerRole

logger = logging.getLogger(__name__)

DEFAULT_OPTION_CAP = 256
DESCRIPTOR_SEPARATOR = " | "

# (opponent_intent, opponent_prediction, my_intent, my_action, my_prediction)
Option = tuple[str, str, str, str, str]


def option_space(vocabulary: IntentVocabulary, ctx: ActContext, cap: int = DEFAULT_OPTION_CAP) -> list[Option]:
    """
    Structured options available at a state, in a fixed order. When the full
    cross product exceeds ``cap`` the label fields are collapsed to their first
    label one at a time; the action field is never collapsed.
    """
    my_moves = tuple(move.display for move in ctx.legal)
    dims: list[tuple[str, ...]] = [
        vocabulary.intents,
        my_moves,
        vocabulary.intents,
        my_moves,
        tuple(ctx.prediction_labels) or ("None",),
    ]
    for index in (1, 0, 2, 4):
        if int(np.prod([len(d) for d in dims])) <= cap:
            break
        dims[index] = dims[index][:1]
    return list(itertools.product(*dims))


def log_softmax(logits: np.ndarray, temperature: float) -> np.ndarray:
    scaled = logits / temperature
    shifted = scaled - scaled.max()
    return shifted - np.log(np.exp(shifted).sum())


class TabularPolicy:
    """Softmax logits keyed by information-state key, one entry per structured option."""

    def __init__(self, role: PlayerRole, version: int = 0) -> None:
        self.role = role
        self.version = version
        self.logits: dict[str, np.ndarray] = {}
        self.descriptors: dict[str, list[str]] = {}

    def register(self, key: str, descriptors: list[str]) -> None:
        known = self.descriptors.get(key)
        if known is None:
            self.descriptors[key] = list(descriptors)
            self.logits[key] = np.zeros(len(descriptors))
        elif len(known) != len(descriptors):
            raise UnknownOption(f"{key}: option count changed from {len(known)} to {len(descriptors)}")

    def option_count(self, key: str) -> int:
        if key not in self.logits:
            raise UnknownOption(f"unknown state key {key!r}")
        return len(self.logits[key])

    def log_probabilities(self, key: str, temperature: float) -> np.ndarray:
        self.option_count(key)
        return log_softmax(self.logits[key], temperature)

    def probabilities(self, key: str, temperature: float) -> np.ndarray:
        return np.exp(self.log_probabilities(key, temperature))

    def logprob(self, key: str, option_id: int, temperature: float) -> float:
        count = self.option_count(key)
        if not 0 <= option_id < count:
            raise UnknownOption(f"{key}: option {option_id} outside 0..{count - 1}")
        return float(self.log_probabilities(key, temperature)[option_id])

    def snapshot(self) -> "TabularPolicy":
        return copy.deepcopy(self)

    # Checkpoints

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"# tabular role={self.role.name} version={self.version}"]
        for key in sorted(self.logits):
            for option_id, (descriptor, logit) in enumerate(zip(self.descriptors[key], self.logits[key])):
                lines.append(f"{key}\t{option_id}\t{descriptor}\t{float(logit)!r}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "TabularPolicy":
        path = Path(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith("# tabular "):
            raise CorruptRecord(str(path), 1, "missing tabular checkpoint header")
        header = dict(part.split("=", 1) for part in lines[0][len("# tabular ") :].split())
        policy = cls(PlayerRole[header["role"]], version=int(header.get("version", 0)))
        rows: dict[str, list[tuple[int, str, float]]] = {}
        for line_no, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            parts = line.split("\t")
            try:
                key, option_id, descriptor, logit = parts
                rows.setdefault(key, []).append((int(option_id), descriptor, float(logit)))
            except ValueError as exc:
                raise CorruptRecord(str(path), line_no, f"bad checkpoint row: {exc}") from exc
        for key, entries in rows.items():
            entries.sort()
            policy.descriptors[key] = [descriptor for _, descriptor, _ in entries]
            policy.logits[key] = np.array([logit for _, _, logit in entries])
        return policy


def logprob(policy: TabularPolicy, state_key: str, option_id: int, temperature: float) -> float:
    return policy.logprob(state_key, option_id, temperature)


class TabularAgent(Agent):
    kind = AgentKind.TABULAR
    learnable = True

    def __init__(
        self,
        role: PlayerRole,
        policy: TabularPolicy,
        vocabulary: IntentVocabulary,
        temperature: float = 0.5,
        option_cap: int = DEFAULT_OPTION_CAP,
    ) -> None:
        super().__init__(role)
        self.policy = policy
        self.vocabulary = vocabulary
        self.temperature = temperature
        self.option_cap = option_cap

    def options(self, ctx: ActContext) -> list[Option]:
        options = option_space(self.vocabulary, ctx, self.option_cap)
        self.policy.register(ctx.state_key, [DESCRIPTOR_SEPARATOR.join(o) for o in options])
        return options

    async def respond(self, ctx: ActContext, rng: np.random.Generator) -> AgentResult:
        options = self.options(ctx)
        log_probs = self.policy.log_probabilities(ctx.state_key, self.temperature)
        option_id = int(rng.choice(len(options), p=np.exp(log_probs)))
        opponent_intent, opponent_prediction, my_intent, action, my_prediction = options[option_id]
        raw = compose_response(
            ctx,
            opponent_intent=opponent_intent,
            opponent_prediction=opponent_prediction,
            my_intent=my_intent,
            action=action,
            my_prediction=my_prediction,
        )
        return result_from_text(
            ctx,
            raw,
            logprob=float(log_probs[option_id]),
            option_id=option_id,
        )

    @property
    def policy_version(self) -> int | None:
        return self.policy.version

    def describe(self) -> str:
        return f"tabular:{self.role.label}@v{self.policy.version}"
