"""
Command line interface: ``python -m memograph <command>``.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from memograph import settings
from memograph.constants import VERSION, ExitCode, PruneStrategy, ReportFormat, RunMode
from memograph.embedding import EmbeddingSpec, embed_text
from memograph.error_handler import (
    InvalidConfig,
    MemographError,
    StoreCorruption,
    StoreMismatch,
)
from memograph.graph_core import dumps_graph
from memograph.logger import configure_logging
from memograph.memo_engine import ReusePolicy
from memograph.repository import PruneConfig, Repository, TaskQuery
from memograph.similarity import SimilarityConfig
from memograph.workload_harness import (
    FamilyConfig,
    RunConfig,
    SweepGrid,
    generate_family,
    load_model,
    read_report,
    render,
    report,
    run_experiment,
    sweep,
)

logger = logging.getLogger(__name__)

MODES = {"cold": RunMode.COLD, "memo": RunMode.MEMOIZED, "memoized": RunMode.MEMOIZED}


def _format(args: argparse.Namespace, out: Path) -> ReportFormat:
    if args.format:
        return ReportFormat(args.format)
    return ReportFormat.JSON if out.suffix == ".json" else ReportFormat.CSV


def cmd_init(args: argparse.Namespace) -> int:
    store = Repository.init(args.store, EmbeddingSpec())
    print(f"Initialized store at {store.root} ({len(store)} entries)")
    return ExitCode.SUCCESS


def cmd_gen(args: argparse.Namespace) -> int:
    cfg = load_model(args.family, FamilyConfig)
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    spec = EmbeddingSpec()
    tasks, planner = generate_family(cfg, spec)
    out = Path(args.out)
    (out / "plans").mkdir(parents=True, exist_ok=True)
    with open(out / "tasks.jsonl", "w", encoding="utf-8") as handle:
        for task in tasks:
            handle.write(json.dumps(task.to_document(), sort_keys=True) + "\n")
    for task in tasks:
        (out / "plans" / f"{task.id}.json").write_text(dumps_graph(planner.plan(task)))
    print(f"Wrote {len(tasks)} tasks to {out}")
    return ExitCode.SUCCESS


def _run_config(args: argparse.Namespace) -> RunConfig:
    config = load_model(args.config, RunConfig) if args.config else RunConfig()
    if args.policy:
        config = config.model_copy(update={"policy": load_model(args.policy, ReusePolicy)})
    if args.seed is not None:
        config = config.with_seed(args.seed)
    return config


def cmd_run(args: argparse.Namespace) -> int:
    config = _run_config(args)
    mode = MODES[args.mode]
    store = Repository.init(args.store, config.embedding)
    tasks, planner = generate_family(config.family, config.embedding)
    reports = run_experiment(
        tasks,
        planner,
        store,
        config.policy,
        config.cost,
        mode,
        cfg=config.similarity,
        profile=config.executor,
        seed=config.seeds[0],
        workers=config.workers,
    )
    out = Path(args.out)
    report(reports, _format(args, out), out)
    print(f"Ran {len(reports)} tasks in {mode.value} mode, report at {out}")
    return ExitCode.SUCCESS


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = load_model(args.grid, SweepGrid)
    rows = sweep(grid, workers=args.workers)
    out = Path(args.out)
    report(rows, _format(args, out), out)
    print(f"Wrote {len(rows)} sweep rows to {out}")
    return ExitCode.SUCCESS


def cmd_query(args: argparse.Namespace) -> int:
    store = Repository.open(args.store)
    request = TaskQuery(tuple(float(value) for value in embed_text(store.spec, args.text)))
    results = store.query(request, top_k=args.top_k, tau_sim=args.tau_sim, cfg=SimilarityConfig())
    for result in results:
        print(
            json.dumps(
                {
                    "graph_id": result.graph_id,
                    "version": result.version,
                    "anchor": result.anchor,
                    "score": result.score,
                },
                sort_keys=True,
            )
        )
    return ExitCode.SUCCESS


def cmd_report(args: argparse.Namespace) -> int:
    rows = read_report(Path(args.input))
    fmt = ReportFormat(args.format)
    if args.out:
        report(rows, fmt, Path(args.out))
    else:
        sys.stdout.write(render(rows, fmt))
    return ExitCode.SUCCESS


def cmd_prune(args: argparse.Namespace) -> int:
    store = Repository.open(args.store)
    pruned = store.prune(
        PruneConfig(max_entries=args.max_entries, strategy=PruneStrategy(args.strategy))
    )
    print(f"Tombstoned {len(pruned)} entries, {len(store)} live")
    return ExitCode.SUCCESS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memograph", description="Graph memoization of reasoning workflows."
    )
    parser.add_argument("--version", action="version", version=f"memograph {VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    init = commands.add_parser("init", help="create an empty store")
    init.add_argument("store", nargs="?", default=settings.STORE_DIR)
    init.set_defaults(handler=cmd_init)

    gen = commands.add_parser("gen", help="generate a task family and its cold plans")
    gen.add_argument("--family", type=Path, required=True)
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--seed", type=int)
    gen.set_defaults(handler=cmd_gen)

    run = commands.add_parser("run", help="run a task family cold or memoized")
    run.add_argument("--store", type=Path, default=Path(settings.STORE_DIR))
    run.add_argument("--mode", choices=sorted(MODES), required=True)
    run.add_argument("--config", type=Path)
    run.add_argument("--policy", type=Path)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--format", choices=ReportFormat.choices())
    run.set_defaults(handler=cmd_run)

    grid = commands.add_parser("sweep", help="sweep policy values over seeded families")
    grid.add_argument("--grid", type=Path, required=True)
    grid.add_argument("--out", type=Path, required=True)
    grid.add_argument("--format", choices=ReportFormat.choices())
    grid.add_argument("--workers", type=int)
    grid.set_defaults(handler=cmd_sweep)

    query = commands.add_parser("query", help="rank stored graphs against a task description")
    query.add_argument("--store", type=Path, default=Path(settings.STORE_DIR))
    query.add_argument("--text", required=True)
    query.add_argument("--top-k", type=int, default=5)
    query.add_argument("--tau-sim", type=float, default=0.0)
    query.set_defaults(handler=cmd_query)

    convert = commands.add_parser("report", help="convert a report between csv and json")
    convert.add_argument("--in", dest="input", type=Path, required=True)
    convert.add_argument("--format", choices=ReportFormat.choices(), required=True)
    convert.add_argument("--out", type=Path)
    convert.set_defaults(handler=cmd_report)

    prune = commands.add_parser("prune", help="tombstone entries beyond a limit")
    prune.add_argument("--store", type=Path, default=Path(settings.STORE_DIR))
    prune.add_argument("--max-entries", type=int, required=True)
    prune.add_argument(
        "--strategy", choices=PruneStrategy.choices(), default=PruneStrategy.OLDEST_FIRST.value
    )
    prune.set_defaults(handler=cmd_prune)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command and map failures to exit codes: 2 for invalid configuration,
    3 for a corrupt or mismatched store, 4 for any other failure.
    """
    args = build_parser().parse_args(argv)
    configure_logging()
    try:
        return args.handler(args)
    except (ValidationError, InvalidConfig) as exc:
        logger.error(f"Invalid configuration: {exc}")
        return ExitCode.INVALID_CONFIG
    except (StoreCorruption, StoreMismatch) as exc:
        logger.error(f"Store error: {exc}")
        return ExitCode.STORE_CORRUPTION
    except (MemographError, OSError, ValueError) as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return ExitCode.RUNTIME_FAILURE
