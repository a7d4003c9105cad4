from src.core.exceptions import TurnNotOwnedByEgo
from src.games.base import PlayerRole
from src.judge.schemas import AlignmentPair, ComponentScore, PairKind, TurnCotScore
from src.protocol.schemas import StructuredOutput
from src.rollout.schemas import Trajectory


def build_alignment_pairs(
    trajectory: Trajectory,
    sample: StructuredOutput | None,
    turn: int,
    ego_role: PlayerRole,
) -> list[AlignmentPair]:
    """
    Pair one ego sample at ``turn`` against the opponent's mainstream turns:
    its belief fields against the opponent's block at ``turn - 1`` and its
    prediction against the opponent's action at ``turn + 1``.
    """
    records = trajectory.records
    if not 0 <= turn < len(records) or records[turn].role != ego_role:
        raise TurnNotOwnedByEgo(f"turn {turn} of {trajectory.trajectory_id} is not played by {ego_role.label}")
    if sample is None:
        return []

    pairs: list[AlignmentPair] = []

    def add(kind: PairKind, prediction: str | None, field: str, truth: str | None, truth_source: str) -> None:
        if prediction and truth:
            pairs.append(
                AlignmentPair(
                    kind=kind,
                    turn=turn,
                    ego_role=ego_role,
                    prediction_text=prediction,
                    ground_truth_text=truth,
                    prediction_source=f"sample:{turn}:{field}",
                    ground_truth_source=truth_source,
                )
            )

    previous = records[turn - 1] if turn > 0 else None
    if previous is not None and previous.role == ego_role.other and previous.output is not None:
        add(
            PairKind.PAST,
            sample.opponent_intent,
            "OpponentIntent",
            previous.output.my_intent,
            f"mainstream:{turn - 1}:MyIntent",
        )
        add(
            PairKind.RECURSIVE,
            sample.opponent_prediction,
            "OpponentPrediction",
            previous.output.my_prediction,
            f"mainstream:{turn - 1}:MyPrediction",
        )

    following = records[turn + 1] if turn + 1 < len(records) else None
    if following is not None and following.role == ego_role.other and following.move_id is not None:
        add(
            PairKind.FUTURE,
            sample.my_prediction,
            "MyPrediction",
            following.action_text,
            f"mainstream:{turn + 1}:action",
        )
    return pairs


def cot_score(components: list[ComponentScore], turn: int = 0, sample_id: int = 0) -> TurnCotScore:
    value = sum(c.value for c in components) / len(components) if components else None
    return TurnCotScore(turn=turn, sample_id=sample_id, components=components, value=value)
