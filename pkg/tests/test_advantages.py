import pytest

from src.games import PlayerRole
from src.judge.schemas import ComponentScore, PairKind, TurnCotScore
from src.protocol.schemas import OutcomeStatus
from src.rollout.schemas import GroupSample, MicroRolloutGroup, Trajectory, TurnRecord
from src.training.advantages import (
    compute_advantages,
    cot_advantage,
    hybrid_advantage,
    monte_carlo_returns,
    return_advantage,
)
from src.training.schemas import AdvantageMode, GrpoConfig


def record(turn, role, env_rewards=(0.0, 0.0), shaping=0.0, option_id=None, logprob=None):
    return TurnRecord(
        trajectory_id="t",
        turn=turn,
        role=role,
        state_key=f"k{turn}",
        prompt="p",
        raw_text="r",
        status=OutcomeStatus.PARSED,
        move_id=0,
        env_rewards=env_rewards,
        shaping_reward=shaping,
        option_id=option_id,
        logprob=logprob,
        policy_version=0,
    )


def single_turn(trajectory_id, first_return):
    first = record(0, PlayerRole.FIRST, (first_return, -first_return), 0.05, option_id=1, logprob=-1.0)
    return Trajectory(
        trajectory_id=trajectory_id,
        game="kuhn_poker",
        seed=0,
        records=[first.model_copy(update={"trajectory_id": trajectory_id})],
        returns=(first_return, -first_return),
    )


def sample(sample_id, value, components=(), option_id=None, logprob=None):
    return GroupSample(
        sample_id=sample_id,
        is_primary=sample_id == 0,
        raw_text="r",
        status=OutcomeStatus.PARSED,
        option_id=option_id,
        logprob=logprob,
        cot=TurnCotScore(turn=0, sample_id=sample_id, value=value, components=list(components)),
    )


def scored_group(trajectory_id, values, **kwargs):
    future = [ComponentScore(kind=PairKind.FUTURE, value=1.0, judge="exact_match")]
    samples = [sample(0, values[0], future, option_id=1, logprob=-1.0)]
    samples += [sample(i, v, option_id=2, logprob=-1.2) for i, v in enumerate(values[1:], start=1)]
    return MicroRolloutGroup(
        group_id=f"{trajectory_id}:0",
        trajectory_id=trajectory_id,
        turn=0,
        role=PlayerRole.FIRST,
        state_key="k0",
        samples=samples,
        scored=True,
        **kwargs,
    )


class TestCotAdvantage:
    """Tests for group-normalized CoT advantages"""

    def test_two_samples(self):
        """Test that two distinct scores normalize to plus and minus one"""
        assert cot_advantage([0.9, 0.3]) == pytest.approx([1.0, -1.0])

    @pytest.mark.parametrize("scores", [[0.5, 0.5, 0.5], [0.7], [None, 0.4], []])
    def test_degenerate_groups(self, scores):
        """Test that constant or undersized groups carry no signal"""
        assert cot_advantage(scores) == [0.0] * len(scores)

    def test_undefined_scores(self):
        """Test that undefined scores map to zero without skewing the rest"""
        assert cot_advantage([None, 0.2, 0.8]) == pytest.approx([0.0, -1.0, 1.0])


class TestReturns:
    """Tests for Monte Carlo returns and return advantages"""

    def test_rewards_accumulate_until_next_turn(self):
        """Test that the opponent's transition reward lands on the previous own turn"""
        trajectory = Trajectory(
            trajectory_id="t",
            game="kuhn_poker",
            seed=0,
            records=[
                record(0, PlayerRole.FIRST, shaping=0.05),
                record(1, PlayerRole.SECOND, shaping=0.05),
                record(2, PlayerRole.FIRST, (-1.0, 1.0), shaping=0.05),
            ],
        )

        assert monte_carlo_returns(trajectory, PlayerRole.FIRST) == pytest.approx([-0.9, -0.95])
        assert monte_carlo_returns(trajectory, PlayerRole.FIRST, gamma=0.5) == pytest.approx([-0.425, -0.95])
        assert monte_carlo_returns(trajectory, PlayerRole.SECOND) == pytest.approx([1.05])

    def test_return_advantage_centers(self):
        """Test subtraction of the batch mean"""
        assert return_advantage([1.0, 3.0]) == [-1.0, 1.0]
        assert return_advantage([]) == []

    def test_hybrid_is_linear(self):
        """Test the weighted sum of return and CoT advantages"""
        assert hybrid_advantage(1.0, 0.5, 0.2) == pytest.approx(1.1)
        assert hybrid_advantage(-2.0, 1.0, 0.0) == -2.0


class TestComputeAdvantages:
    """Tests for advantage records of a batch"""

    def test_hybrid_records(self):
        """Test return centering and the CoT term on the primary sample"""
        trajectories = [single_turn("a", 1.0), single_turn("b", -1.0)]
        groups = [scored_group("a", [0.9, 0.3])]

        records = compute_advantages(trajectories, groups, PlayerRole.FIRST, GrpoConfig(omega=0.2))

        assert len(records) == 2
        by_id = {r.trajectory_id: r for r in records}
        assert by_id["a"].batch_mean == pytest.approx(0.05)
        assert by_id["a"].a_return == pytest.approx(1.0)
        assert by_id["a"].a_cot == pytest.approx(1.0)
        assert by_id["a"].a_hybrid == pytest.approx(1.2)
        assert by_id["a"].s_cot == 0.9
        assert by_id["a"].future_correct is True
        assert by_id["b"].a_hybrid == pytest.approx(-1.0)
        assert by_id["b"].s_cot is None

    def test_return_only(self):
        """Test that the return-only mode ignores CoT scores"""
        trajectories = [single_turn("a", 1.0), single_turn("b", -1.0)]
        groups = [scored_group("a", [0.9, 0.3])]
        cfg = GrpoConfig(omega=0.2, advantage_mode=AdvantageMode.RETURN_ONLY)

        records = compute_advantages(trajectories, groups, PlayerRole.FIRST, cfg)

        assert [r.a_hybrid for r in records] == pytest.approx([1.0, -1.0])
        assert all(r.a_cot == 0.0 for r in records)

    def test_raw_mode(self):
        """Test that the raw mode adds the unnormalized score"""
        trajectories = [single_turn("a", 1.0), single_turn("b", -1.0)]
        groups = [scored_group("a", [0.9, 0.3])]
        cfg = GrpoConfig(omega=0.2, advantage_mode=AdvantageMode.RAW)

        records = compute_advantages(trajectories, groups, PlayerRole.FIRST, cfg)

        assert records[0].a_hybrid == pytest.approx(1.0 + 0.2 * 0.9)

    def test_micro_rollout_samples(self):
        """Test that extra samples train on their CoT term only"""
        trajectories = [single_turn("a", 1.0), single_turn("b", -1.0)]
        groups = [scored_group("a", [0.9, 0.3])]
        cfg = GrpoConfig(omega=0.2, train_on_micro_rollouts=True)

        records = compute_advantages(trajectories, groups, PlayerRole.FIRST, cfg)

        extra = [r for r in records if not r.is_primary]
        assert len(extra) == 1
        assert extra[0].sample_id == 1
        assert extra[0].option_id == 2
        assert extra[0].a_hybrid == pytest.approx(-0.2)
        primary = [r for r in records if r.is_primary]
        assert primary[0].batch_mean == pytest.approx(0.05)

    def test_unscored_group_ignored(self):
        """Test that a failed group contributes no CoT signal"""
        trajectories = [single_turn("a", 1.0), single_turn("b", -1.0)]
        groups = [scored_group("a", [0.9, 0.3]).model_copy(update={"scored": False, "failure": "judge down"})]

        records = compute_advantages(trajectories, groups, PlayerRole.FIRST, GrpoConfig(omega=0.2))

        assert records[0].a_cot == 0.0
        assert records[0].a_hybrid == pytest.approx(1.0)

    def test_bot_turns_skipped(self):
        """Test that turns without a log-probability are not trained on"""
        trajectories = [single_turn("a", 1.0)]

        assert compute_advantages(trajectories, [], PlayerRole.SECOND, GrpoConfig()) == []
