import asyncio
import tomllib
from pathlib import Path
from unittest.mock import AsyncMock, MagicMock, patch

import pytest

from src.agents.handlers import ChatCompletionHandler, RemoteAgent
from src.agents.schemas import AgentKind
from src.agents.scripted import BotAgent, RuleAgent
from src.agents.tabular import TabularAgent, TabularPolicy
from src.agents.vocab import get_vocabulary
from src.core.exceptions import (
    EXIT_CONFIGURATION_ERROR,
    EXIT_OK,
    EXIT_VERIFICATION_FAILURE,
    ConfigurationError,
    ReplayMismatch,
)
from src.games import GAME_NAMES, PlayerRole, get_game
from src.harness.cli import build_parser, run
from src.harness.config import AgentSpec, EndpointConfig, RunConfig, dump_run_config, load_run_config
from src.harness.evaluate import evaluate, scored_returns
from src.harness.factory import parse_judges, parse_opponent
from src.harness.replay import replay_files, verify_trajectory
from src.harness.seeds import EVALUATION_STREAM, TRAIN_STREAM, derive_seeds
from src.judge.schemas import JudgeKind
from src.protocol.schemas import ShapingConfig
from src.rollout.engine import collect_batch, collect_trajectory
from src.rollout.store import TrajectoryStore
from src.solvers.cfr import cfr_train
from src.solvers.kuhn_nash import kuhn_nash_bot
from src.solvers.mcts import MctsBot
from src.solvers.minimax import MinimaxBot
from src.solvers.policies import RandomBot

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "etc" / "configs"
FIXTURES = Path(__file__).resolve().parent / "fixtures"
REPLAY_GAMES = 1002

ILLEGAL_REPLY = (
    "<think>[state_summary: s]\n[OpponentIntent: a]\n[OpponentPrediction: b]\n"
    "[MyIntent: c]\n[MyAction: X(7,7)]\n[MyPrediction: d]</think><answer>X(7,7)</answer>"
)


def nash_agents():
    first, second = kuhn_nash_bot()
    return {
        PlayerRole.FIRST: BotAgent(PlayerRole.FIRST, first),
        PlayerRole.SECOND: BotAgent(PlayerRole.SECOND, second),
    }


async def stored_kuhn_batch(run_dir, seeds=(1, 2, 3)):
    game = get_game("kuhn_poker")
    agents = {
        PlayerRole.FIRST: TabularAgent(PlayerRole.FIRST, TabularPolicy(PlayerRole.FIRST), get_vocabulary(game.name)),
        PlayerRole.SECOND: BotAgent(PlayerRole.SECOND, kuhn_nash_bot()[1]),
    }
    trajectories = await collect_batch(game, agents, list(seeds), ShapingConfig())
    return TrajectoryStore(run_dir, game.name), trajectories


class TestRunConfig:
    """Tests for TOML run configs"""

    @pytest.mark.parametrize("name", ["kuhn.toml", "tic_tac_toe_remote.toml"])
    def test_shipped_configs_load(self, name):
        """Test that the example configs validate"""
        config = load_run_config(CONFIGS / name)

        assert config.game in ("kuhn_poker", "tic_tac_toe")

    def test_kuhn_config_values(self):
        """Test values read from the Kuhn example config"""
        config = load_run_config(CONFIGS / "kuhn.toml")

        assert config.first.kind is AgentKind.TABULAR
        assert config.agent_spec(PlayerRole.SECOND).bot == "kuhn_nash"
        assert config.grpo.omega == 0.2
        assert config.grpo.clip_eps == 0.2
        assert config.shaping.format_bonus == 0.05

    def test_dump_round_trip(self):
        """Test that a dumped config validates back to the same model"""
        config = RunConfig(game="leduc_holdem", second=AgentSpec(bot="mcts:50"), batch_size=16)

        assert RunConfig.model_validate(tomllib.loads(dump_run_config(config))) == config

    def test_missing_file(self, tmp_path):
        """Test that a missing config is a configuration error"""
        with pytest.raises(ConfigurationError):
            load_run_config(tmp_path / "absent.toml")

    @pytest.mark.parametrize(
        "body",
        [
            'game = "chess"\n',
            'game = "kuhn_poker"\n[first]\nkind = "scripted"\n',
            "game = \n",
            'game = "kuhn_poker"\n[grpo]\nclip_eps = -1.0\n',
        ],
    )
    def test_invalid_configs(self, tmp_path, body):
        """Test that bad values surface as configuration errors"""
        path = tmp_path / "bad.toml"
        path.write_text(body, encoding="utf-8")

        with pytest.raises(ConfigurationError):
            load_run_config(path)


class TestSeeds:
    """Tests for seed derivation"""

    def test_deterministic_and_split(self):
        """Test that streams differ and repeat"""
        train = derive_seeds(7, 5, TRAIN_STREAM, 1)

        assert train == derive_seeds(7, 5, TRAIN_STREAM, 1)
        assert train != derive_seeds(7, 5, TRAIN_STREAM, 2)
        assert train != derive_seeds(7, 5, EVALUATION_STREAM)
        assert len(set(train)) == 5
        assert all(isinstance(s, int) for s in train)


class TestFactory:
    """Tests for opponent and judge construction"""

    def test_mcts(self):
        """Test the simulation count of an MCTS opponent"""
        agent = parse_opponent("mcts:50", get_game("tic_tac_toe"), PlayerRole.SECOND)

        assert isinstance(agent.bot, MctsBot)
        assert agent.bot.simulations == 50
        assert agent.role is PlayerRole.SECOND

    def test_simple_opponents(self):
        """Test the argument-free opponent specs"""
        game = get_game("tic_tac_toe")

        assert isinstance(parse_opponent("minimax", game, PlayerRole.SECOND).bot, MinimaxBot)
        assert isinstance(parse_opponent("scripted", game, PlayerRole.SECOND), RuleAgent)
        assert isinstance(parse_opponent(" random ", game, PlayerRole.SECOND), BotAgent)

    def test_cfr_table(self, tmp_path):
        """Test loading a CFR table as an opponent"""
        game = get_game("kuhn_poker")
        path = cfr_train(game, 5).save(tmp_path / "kuhn.cfr")

        agent = parse_opponent(f"cfr:{path}", game, PlayerRole.SECOND)

        assert isinstance(agent, BotAgent)
        with pytest.raises(ConfigurationError):
            parse_opponent(f"cfr:{path}", get_game("leduc_holdem"), PlayerRole.SECOND)

    @pytest.mark.parametrize(
        "spec, game_name",
        [
            ("kuhn_nash", "tic_tac_toe"),
            ("kuhn_nash:0.9", "kuhn_poker"),
            ("mcts:many", "tic_tac_toe"),
            ("cfr", "kuhn_poker"),
            ("scripted", "kuhn_poker"),
            ("alphazero", "tic_tac_toe"),
        ],
    )
    def test_bad_specs(self, spec, game_name):
        """Test that unusable opponent specs are configuration errors"""
        with pytest.raises(ConfigurationError):
            parse_opponent(spec, get_game(game_name), PlayerRole.SECOND)

    def test_parse_judges(self):
        """Test the comma-separated judge list"""
        judges = parse_judges("exact_match, llm:judge-x", EndpointConfig(url="http://mock/v1"))

        assert [j.kind for j in judges] == [JudgeKind.EXACT_MATCH, JudgeKind.LLM]
        with pytest.raises(ConfigurationError):
            parse_judges("oracle", EndpointConfig())
        with pytest.raises(ConfigurationError):
            parse_judges(" , ", EndpointConfig())


class TestEvaluate:
    """Tests for fixed-opponent evaluation"""

    @pytest.mark.asyncio
    async def test_kuhn_nash_mirror(self):
        """Test the report of Nash against Nash"""
        game = get_game("kuhn_poker")

        report = await evaluate(game, nash_agents(), derive_seeds(0, 20, EVALUATION_STREAM), opponent="kuhn_nash")

        assert report.games == 20
        assert report.wins + report.losses == 20
        assert report.draws == 0
        assert sum(report.mean_returns) == pytest.approx(0.0)
        assert 0.0 <= report.normalized <= 100.0
        assert "opponent: kuhn_nash" in report.render()

    @pytest.mark.asyncio
    async def test_minimax_mirror_draws(self):
        """Test that perfect play from both seats always draws"""
        game = get_game("tic_tac_toe")
        agents = {role: BotAgent(role, MinimaxBot()) for role in PlayerRole}

        report = await evaluate(game, agents, [0, 1])

        assert report.draws == 2
        assert report.normalized == 50.0
        assert report.ci95 == 0.0
        assert report.opponent == "bot:minimax:Second"

    @pytest.mark.asyncio
    async def test_invalid_action_is_a_loss(self):
        """Test that an illegal move scores as the offender's loss"""
        game = get_game("tic_tac_toe")
        handler = MagicMock(spec=ChatCompletionHandler)
        handler.model = "test-model"
        handler.complete = AsyncMock(return_value=ILLEGAL_REPLY)
        agents = {
            PlayerRole.FIRST: RemoteAgent(PlayerRole.FIRST, handler, format_retries=0),
            PlayerRole.SECOND: RuleAgent(PlayerRole.SECOND),
        }

        report = await evaluate(game, agents, [0, 1, 2])

        assert report.losses == 3
        assert report.invalid_terminations == 3
        assert report.mean_returns == (-1.0, 1.0)
        assert report.normalized == 0.0
        assert "invalid terminations 3" in report.render()

    @pytest.mark.asyncio
    async def test_natural_returns_unchanged(self, tmp_path):
        """Test that completed games keep their stored returns"""
        game = get_game("kuhn_poker")
        _, trajectories = await stored_kuhn_batch(tmp_path, seeds=(4,))

        assert scored_returns(game, trajectories[0]) == trajectories[0].returns

    @pytest.mark.asyncio
    async def test_games_run_concurrently(self):
        """Test that games overlap up to the worker limit and keep seed order"""
        # Setup
        game = get_game("kuhn_poker")
        seeds = list(range(6))
        played = {seed: await collect_trajectory(game, nash_agents(), seed, ShapingConfig()) for seed in seeds}
        running, peak, order = 0, 0, []

        async def fake_collect(game, agents, seed, shaping, trajectory_id):
            nonlocal running, peak
            running += 1
            peak = max(peak, running)
            await asyncio.sleep(0.01)
            running -= 1
            order.append(seed)
            return played[seed]

        with patch("src.harness.evaluate.collect_trajectory", side_effect=fake_collect):
            report = await evaluate(game, nash_agents(), seeds, workers=2)

        assert peak == 2
        assert sorted(order) == seeds
        assert report.games == 6
        assert report.mean_returns[0] == pytest.approx(sum(t.returns[0] for t in played.values()) / 6)

    @pytest.mark.asyncio
    async def test_requires_games(self):
        """Test that an empty seed list is rejected"""
        with pytest.raises(ValueError):
            await evaluate(get_game("kuhn_poker"), nash_agents(), [])


class TestReplay:
    """Tests for trajectory re-simulation"""

    @pytest.mark.asyncio
    async def test_stored_batch_verifies(self, tmp_path):
        """Test that freshly stored trajectories replay cleanly"""
        store, trajectories = await stored_kuhn_batch(tmp_path)
        path = store.persist_trajectories(0, trajectories)

        summary = replay_files([path])

        assert summary.ok
        assert summary.verified == summary.trajectories == 3

    @pytest.mark.asyncio
    async def test_tampered_return(self, tmp_path):
        """Test that an edited return is reported"""
        _, trajectories = await stored_kuhn_batch(tmp_path, seeds=(1,))
        tampered = trajectories[0].model_copy(update={"returns": (5.0, -5.0)})

        with pytest.raises(ReplayMismatch):
            verify_trajectory(tampered)

    @pytest.mark.asyncio
    async def test_tampered_move(self, tmp_path):
        """Test that a stored move disagreeing with its response is reported"""
        _, trajectories = await stored_kuhn_batch(tmp_path, seeds=(1,))
        records = list(trajectories[0].records)
        records[0] = records[0].model_copy(update={"move_id": 1 - records[0].move_id})

        with pytest.raises(ReplayMismatch):
            verify_trajectory(trajectories[0].model_copy(update={"records": records}))

    @pytest.mark.slow
    @pytest.mark.asyncio
    async def test_thousand_trajectories_verify(self, tmp_path):
        """Test that 1000 collected trajectories over every game replay cleanly"""
        # Setup a stored batch per game; one in ten tic-tac-toe games ends on an illegal move
        handler = MagicMock(spec=ChatCompletionHandler)
        handler.model = "test-model"
        handler.complete = AsyncMock(return_value=ILLEGAL_REPLY)
        paths = []
        seeds = derive_seeds(3, REPLAY_GAMES, TRAIN_STREAM)
        per_game = REPLAY_GAMES // len(GAME_NAMES)
        for index, name in enumerate(GAME_NAMES):
            game = get_game(name)
            batch = seeds[index * per_game : (index + 1) * per_game]
            agents = nash_agents() if name == "kuhn_poker" else {role: BotAgent(role, RandomBot()) for role in PlayerRole}
            trajectories = await collect_batch(game, agents, batch, ShapingConfig())
            if name == "tic_tac_toe":
                agents[PlayerRole.FIRST] = RemoteAgent(PlayerRole.FIRST, handler, format_retries=0)
                invalid = await collect_batch(game, agents, batch[: per_game // 10], ShapingConfig(), prefix="illegal-")
                assert all(t.records[-1].shaping_reward == -10.0 for t in invalid)
                trajectories = trajectories[: len(trajectories) - len(invalid)] + invalid
            paths.append(TrajectoryStore(tmp_path, name).persist_trajectories(0, trajectories))

        summary = replay_files(paths)

        assert summary.failures == []
        assert summary.verified == summary.trajectories == per_game * len(GAME_NAMES)
        assert summary.trajectories >= 1000

    def test_corrupt_file(self, tmp_path):
        """Test that unreadable files count as failures"""
        path = tmp_path / "bad.traj"
        path.write_text("not json\n", encoding="utf-8")

        summary = replay_files([path])

        assert not summary.ok
        assert summary.trajectories == 0
        assert "MISMATCH" in summary.render()


class TestCli:
    """Tests for the command-line entry point"""

    def test_parser_requires_command(self):
        """Test that a subcommand is mandatory"""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_solve_ne(self, tmp_path, capsys):
        """Test that a Kuhn CFR table is written and its exploitability printed"""
        out = tmp_path / "kuhn.cfr"

        code = run(["solve-ne", "--game", "kuhn_poker", "--iters", "20", "--out", str(out)])

        assert code == EXIT_OK
        assert out.exists()
        printed = capsys.readouterr().out
        assert f"table: {out}" in printed
        assert "exploitability" in printed

    def test_solve_ne_unsupported_game(self):
        """Test that CFR refuses perfect-information games"""
        assert run(["solve-ne", "--game", "tic_tac_toe", "--iters", "1"]) == EXIT_CONFIGURATION_ERROR

    def test_evaluate(self, capsys):
        """Test a short evaluation from the Kuhn example config"""
        code = run(["evaluate", "--config", str(CONFIGS / "kuhn.toml"), "--opponent", "kuhn_nash", "--games", "5"])

        assert code == EXIT_OK
        assert "normalized score" in capsys.readouterr().out

    def test_evaluate_missing_config(self, tmp_path):
        """Test the exit code of a missing config"""
        code = run(["evaluate", "--config", str(tmp_path / "none.toml"), "--opponent", "random"])

        assert code == EXIT_CONFIGURATION_ERROR

    @pytest.mark.asyncio
    async def test_replay(self, tmp_path):
        """Test replay exit codes for clean and tampered files"""
        store, trajectories = await stored_kuhn_batch(tmp_path)
        clean = store.persist_trajectories("clean", trajectories)
        dirty = store.persist_trajectories("dirty", [trajectories[0].model_copy(update={"returns": (5.0, -5.0)})])

        assert run(["replay", str(clean)]) == EXIT_OK
        assert run(["replay", str(clean), str(dirty)]) == EXIT_VERIFICATION_FAILURE

    def test_judge_compare(self, capsys):
        """Test exact-match comparison over the fixture pairs"""
        code = run(["judge-compare", "--pairs", str(FIXTURES / "judge_pairs.jsonl")])

        assert code == EXIT_OK
        printed = capsys.readouterr().out
        assert "exact_match" in printed
        assert "note:" in printed
