import asyncio
import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

from src.agents.handlers import ChatCompletionHandler
from src.agents.schemas import SamplingParams
from src.core.config import settings
from src.core.exceptions import JudgeUnavailable, RemoteUnavailable
from src.core.instrumentators import judge_fallbacks_total
from src.db.caches import cache_deco
from src.judge.pairs import build_alignment_pairs, cot_score
from src.judge.prompts import render_judge_messages
from src.judge.schemas import AlignmentPair, ComponentScore, JudgeKind, TurnCotScore
from src.protocol.parser import normalize_text
from src.protocol.schemas import StructuredOutput
from src.rollout.schemas import Trajectory

logger = logging.getLogger(__name__)

SCORE_PATTERN = re.compile(r"<answer>\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*</answer>")

JUDGE_SAMPLING = SamplingParams(temperature=0.01, top_p=1.0, top_k=1, max_tokens=64)


def parse_judge_score(raw: str) -> float | None:
    """Last decimal inside answer tags, clamped to [0, 1]; None when absent."""
    matches = SCORE_PATTERN.findall(raw or "")
    if not matches:
        return None
    return min(1.0, max(0.0, float(matches[-1])))


class Judge(ABC):
    kind: JudgeKind

    @property
    def name(self) -> str:
        return str(self.kind)

    @abstractmethod
    async def score(self, pair: AlignmentPair, game: str) -> ComponentScore: ...


class ExactMatchJudge(Judge):
    kind = JudgeKind.EXACT_MATCH

    async def score(self, pair: AlignmentPair, game: str) -> ComponentScore:
        same = normalize_text(pair.prediction_text).casefold() == normalize_text(pair.ground_truth_text).casefold()
        return ComponentScore(kind=pair.kind, value=1.0 if same else 0.0, judge=self.name)


class LlmJudge(Judge):
    """Scores a pair by prompting a chat model with the game's rubric."""

    kind = JudgeKind.LLM
    _namespace = "judge"

    def __init__(
        self,
        handler: ChatCompletionHandler,
        params: SamplingParams = JUDGE_SAMPLING,
        parse_retries: int = 2,
        fallback: float = 0.0,
    ) -> None:
        self.handler = handler
        self.params = params
        self.parse_retries = parse_retries
        self.fallback = fallback

    @property
    def name(self) -> str:
        return f"llm:{self.handler.model}"

    async def score(self, pair: AlignmentPair, game: str) -> ComponentScore:
        result = await self._score_value(self.handler.model, game, pair.prediction_text, pair.ground_truth_text)
        if result is None:
            judge_fallbacks_total.labels(game=game).inc()
            logger.warning(
                f"Judge gave no parsable score after {self.parse_retries + 1} attempts, using {self.fallback}",
                extra={"game": game, "kind": str(pair.kind)},
            )
            return ComponentScore(kind=pair.kind, value=self.fallback, judge=self.name, fallback=True)
        return ComponentScore(kind=pair.kind, value=result["value"], judge=self.name, raw_text=result["raw"])

    @cache_deco(namespace=_namespace, expire_in_seconds=settings.cache_ttl_in_seconds)
    async def _score_value(self, model: str, game: str, prediction: str, ground_truth: str) -> dict | None:
        messages = render_judge_messages(game, prediction, ground_truth)
        for _ in range(self.parse_retries + 1):
            try:
                raw = await self.handler.complete(messages, self.params)
            except RemoteUnavailable as exc:
                raise JudgeUnavailable(f"judge endpoint {self.handler.endpoint}: {exc}", exc.attempts) from exc
            value = parse_judge_score(raw)
            if value is not None:
                return {"value": value, "raw": raw}
        return None


async def judge_similarity(judge: Judge, pair: AlignmentPair, game: str) -> ComponentScore:
    return await judge.score(pair, game)


async def score_sample(
    judge: Judge,
    trajectory: Trajectory,
    sample: StructuredOutput | None,
    turn: int,
    sample_id: int = 0,
) -> TurnCotScore:
    """Build the sample's pairs against the mainstream trajectory and average their scores."""
    role = trajectory.records[turn].role
    pairs = build_alignment_pairs(trajectory, sample, turn, role)
    components = await asyncio.gather(*(judge_similarity(judge, pair, trajectory.game) for pair in pairs))
    return cot_score(list(components), turn=turn, sample_id=sample_id)


@dataclass
class JudgeReport:
    judges: list[str]
    rows: list[tuple[AlignmentPair, dict[str, float | None]]] = field(default_factory=list)

    def render(self) -> str:
        headers = ["kind", "prediction", "ground truth", *self.judges]
        table = [
            [
                str(pair.kind),
                pair.prediction_text,
                pair.ground_truth_text,
                *("unavailable" if cells[j] is None else f"{cells[j]:.2f}" for j in self.judges),
            ]
            for pair, cells in self.rows
        ]
        widths = [max(len(row[i]) for row in [headers, *table]) for i in range(len(headers))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in [headers, *table]]
        return "\n".join(lines)


async def multi_judge_report(pairs: list[tuple[AlignmentPair, str]], judges: list[Judge]) -> JudgeReport:
    """Score every (pair, game) with every judge; an unavailable judge leaves its cell empty."""
    if not judges:
        raise ValueError("at least one judge is required")

    async def cell(judge: Judge, pair: AlignmentPair, game: str) -> float | None:
        try:
            return (await judge_similarity(judge, pair, game)).value
        except JudgeUnavailable as exc:
            logger.warning(f"{judge.name} unavailable for a {pair.kind} pair: {exc}")
            return None

    report = JudgeReport(judges=[j.name for j in judges])
    for pair, game in pairs:
        values = await asyncio.gather(*(cell(j, pair, game) for j in judges))
        report.rows.append((pair, dict(zip(report.judges, values))))
    return report
