import argparse
import logging
from collections.abc import Sequence
from pathlib import Path

import orjson
import uvicorn
import uvloop

from src.api.app import create_app
from src.api.v1.completions.schemas import MockScript
from src.api.v1.completions.services import load_script
from src.core.config import settings
from src.core.exception_handlers import cli_exception_handler
from src.core.exceptions import EXIT_OK, EXIT_VERIFICATION_FAILURE, GameTooLarge, UnsupportedGame
from src.core.logger import LOGGING
from src.db import caches
from src.games.base import PlayerRole
from src.games.registry import get_game
from src.harness.config import EndpointConfig, RunConfig, load_run_config
from src.harness.evaluate import evaluate
from src.harness.factory import build_agent, parse_judges, parse_opponent
from src.harness.replay import replay_files
from src.harness.seeds import EVALUATION_STREAM, derive_seeds
from src.judge.judges import multi_judge_report
from src.judge.schemas import JudgeKind, JudgePairRecord
from src.rollout.store import read_jsonl
from src.solvers.best_response import exploitability
from src.solvers.cfr import CFR_GAMES, cfr_train
from src.training.schemas import AdvantageMode
from src.training.trainer import train

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="turnwise", description="Two-player game harness for recursive-reasoning training")
    commands = parser.add_subparsers(dest="command", required=True)

    train_cmd = commands.add_parser("train", help="Run GRPO training from a TOML config")
    train_cmd.add_argument("--config", required=True)
    train_cmd.add_argument("--omega", type=float, help="CoT advantage weight override")
    train_cmd.add_argument("--micro-rollouts", type=int, help="Extra samples per learnable turn")
    train_cmd.add_argument("--advantage-mode", choices=[m.value for m in AdvantageMode])
    train_cmd.add_argument("--max-steps", type=int)

    eval_cmd = commands.add_parser("evaluate", help="Play a configured agent against a fixed opponent")
    eval_cmd.add_argument("--config", required=True)
    eval_cmd.add_argument("--games", type=int, default=None)
    eval_cmd.add_argument("--opponent", required=True, help="mcts:<sims>, kuhn_nash[:alpha], cfr:<file>, random, minimax, scripted")
    eval_cmd.add_argument("--role", choices=["first", "second"], default="first")
    eval_cmd.add_argument("--checkpoint", help="Tabular checkpoint for the evaluated role")

    solve_cmd = commands.add_parser("solve-ne", help="Train a CFR table and report its exploitability")
    solve_cmd.add_argument("--game", required=True)
    solve_cmd.add_argument("--iters", type=int, required=True)
    solve_cmd.add_argument("--out")
    solve_cmd.add_argument("--seed", type=int, default=0)

    judge_cmd = commands.add_parser("judge-compare", help="Score alignment pairs with several judges")
    judge_cmd.add_argument("--pairs", required=True)
    judge_cmd.add_argument("--judges", default="exact_match", help="Comma-separated: exact_match, llm, llm:<model>")

    replay_cmd = commands.add_parser("replay", help="Re-simulate stored trajectories")
    replay_cmd.add_argument("files", nargs="+")

    mock_cmd = commands.add_parser("serve-mock", help="Serve a scripted chat-completions endpoint")
    mock_cmd.add_argument("--script")
    mock_cmd.add_argument("--judge-score", type=float)
    mock_cmd.add_argument("--host", default=settings.listen_addr)
    mock_cmd.add_argument("--port", type=int, default=settings.listen_port)
    return parser


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    data = config.model_dump()
    if args.omega is not None:
        data["grpo"]["omega"] = args.omega
    if args.advantage_mode is not None:
        data["grpo"]["advantage_mode"] = args.advantage_mode
    if args.max_steps is not None:
        data["grpo"]["max_steps"] = args.max_steps
    if args.micro_rollouts is not None:
        data["micro_rollouts"] = args.micro_rollouts
    return RunConfig.model_validate(data)


async def train_command(args: argparse.Namespace) -> int:
    config = apply_overrides(load_run_config(args.config), args)
    run_dir = await train(config)
    print(run_dir)
    return EXIT_OK


async def evaluate_command(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    game = get_game(config.game)
    role = PlayerRole.parse(args.role)
    spec = config.agent_spec(role)
    if args.checkpoint:
        spec = spec.model_copy(update={"checkpoint": args.checkpoint})
    agents = {
        role: build_agent(spec, game, role, config),
        role.other: parse_opponent(args.opponent, game, role.other),
    }
    seeds = derive_seeds(config.master_seed, args.games or config.eval_games, EVALUATION_STREAM)
    report = await evaluate(game, agents, seeds, role=role, opponent=args.opponent, shaping=config.shaping)
    print(report.render())
    return EXIT_OK


def solve_ne_command(args: argparse.Namespace) -> int:
    game = get_game(args.game)
    if game.name not in CFR_GAMES:
        raise UnsupportedGame(f"solve-ne supports {', '.join(CFR_GAMES)}, not {game.name}")
    table = cfr_train(game, args.iters, seed=args.seed)
    out = table.save(args.out or Path(settings.run_root) / f"{game.name}.cfr")
    print(f"table: {out}")
    policy = table.policy()
    try:
        report = exploitability(game, policy, policy, iterations=table.iterations)
    except GameTooLarge as exc:
        logger.warning(f"Exploitability skipped: {exc}")
        return EXIT_OK
    print(orjson.dumps(report.as_dict(), option=orjson.OPT_INDENT_2).decode())
    return EXIT_OK


async def judge_compare_command(args: argparse.Namespace) -> int:
    records = read_jsonl(args.pairs, JudgePairRecord)
    judges = parse_judges(args.judges, EndpointConfig())
    report = await multi_judge_report([(r, r.game) for r in records], judges)
    print(report.render())
    if records and all(j.kind == JudgeKind.EXACT_MATCH for j in judges):
        print("note: exact match compares labels verbatim; free-text pairs need an llm judge")
    return EXIT_OK


def replay_command(args: argparse.Namespace) -> int:
    summary = replay_files(args.files)
    print(summary.render())
    return EXIT_OK if summary.ok else EXIT_VERIFICATION_FAILURE


def serve_mock_command(args: argparse.Namespace) -> int:
    script = load_script(args.script) if args.script else MockScript()
    if args.judge_score is not None:
        script = script.model_copy(update={"judge_score": args.judge_score})
    uvicorn.run(
        create_app(script),
        host=args.host,
        port=args.port,
        log_config=LOGGING,
        log_level=settings.log_level.lower(),
    )
    return EXIT_OK


async def _with_cache(coro) -> int:
    if settings.judge_cache_enabled:
        caches.cache = caches.open_cache()
    try:
        return await coro
    finally:
        if caches.cache is not None:
            await caches.cache.close()
            caches.cache = None


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        match args.command:
            case "train":
                return uvloop.run(_with_cache(train_command(args)))
            case "evaluate":
                return uvloop.run(evaluate_command(args))
            case "solve-ne":
                return solve_ne_command(args)
            case "judge-compare":
                return uvloop.run(_with_cache(judge_compare_command(args)))
            case "replay":
                return replay_command(args)
            case "serve-mock":
                return serve_mock_command(args)
    except Exception as exc:
        return cli_exception_handler(exc)
    return EXIT_OK
