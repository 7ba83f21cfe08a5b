"""
CapMap Command Line

Subcommands for every pipeline stage with file-based handoff:

    ingest  -> canonical results CSV
    embed   -> embedding JSON + Δ sidecar
    predict -> Δ̂ (and raw metric) for one pair
    place   -> embedding with one new model or task
    eval    -> holdout reports per geometry
    analyze -> dataset quality, centrality and 2D map

Exit codes: 0 success, 1 runtime or data error, 2 usage error.

Author: CapMap Project
License: MIT
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from ..config.config_loader import ConfigLoader
from ..config.schema import Config, FitConfig, GeometryKind, ProjectionMethod, SplitPlan
from ..core import pipeline
from ..core.manifest import RunTimer, new_manifest
from ..embedder.space import EmbeddingSpace, EntityKind
from ..geometry.metric_spaces import Geometry
from ..normalize.delta_matrix import normalize
from ..utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must not be negative, got {value}")
    return value


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def int_list(text: str) -> List[int]:
    return [positive_int(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capmap",
        description="Embed foundation models and downstream tasks so that distance predicts performance gaps",
    )
    parser.add_argument("--config", help="YAML config file (default: $CAPMAP_CONFIG or ./capmap.yaml)")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="Validate, aggregate and filter a results corpus")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--aggregate", action="store_true", help="Keep the best value per (model, task)")
    p.add_argument("--min-degree", type=non_negative_int, help="Drop models and tasks with fewer results")
    p.add_argument("--filter", action="store_true", help="Filter with the configured minimum degrees")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("embed", help="Fit an embedding to a results corpus")
    p.add_argument("--db", required=True, type=Path)
    p.add_argument("--geometry", choices=[k.value for k in GeometryKind])
    p.add_argument("--dim", type=positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=positive_int, help="Iteration cap")
    p.add_argument("--learning-rate", type=positive_float)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(handler=cmd_embed)

    p = sub.add_parser("predict", help="Predict Δ for a (model, task) pair")
    p.add_argument("--embedding", required=True, type=Path)
    p.add_argument("--model", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--raw", action="store_true", help="Also report the value in metric units")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("place", help="Add one model or task to an embedding")
    p.add_argument("--embedding", required=True, type=Path)
    p.add_argument("--kind", required=True, choices=[k.value for k in EntityKind])
    p.add_argument("--name", required=True)
    p.add_argument("--results", required=True, type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=positive_int, help="Iteration cap per restart")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(handler=cmd_place)

    p = sub.add_parser("eval", help="Compare geometries by repeated random holdout")
    p.add_argument("--db", required=True, type=Path)
    p.add_argument("--splits", type=positive_int)
    p.add_argument("--holdout", type=positive_int)
    p.add_argument("--geometries", default="all", help="'all' or a comma-separated list")
    p.add_argument("--dim", type=positive_int)
    p.add_argument("--dims", type=int_list, help="Also sweep these dimensions, e.g. 2,3,5,8")
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=positive_int)
    p.add_argument("--workers", type=positive_int)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("analyze", help="Dataset quality, model centrality and a 2D map")
    p.add_argument("--db", required=True, type=Path)
    p.add_argument("--embedding", required=True, type=Path)
    p.add_argument("--projection", choices=[m.value for m in ProjectionMethod])
    p.add_argument("--iterations", type=positive_int)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(handler=cmd_analyze)

    return parser


# -- helpers ----------------------------------------------------------------

def _fit_config(config: Config, args: argparse.Namespace) -> FitConfig:
    updates: Dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "iterations", None) is not None:
        updates["max_iterations"] = args.iterations
    if getattr(args, "learning_rate", None) is not None:
        updates["learning_rate"] = args.learning_rate
    return FitConfig(**{**config.fit.model_dump(), **updates})


def _arguments(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags for the manifest, with paths reduced to file names."""
    recorded = {}
    for key, value in sorted(vars(args).items()):
        if key in ("handler", "command", "config", "log_level"):
            continue
        recorded[key] = value.name if isinstance(value, Path) else value
    return recorded


def _finish(subcommand: str, args: argparse.Namespace, config: Config, timer: RunTimer,
            out_dir: Path, inputs: Dict[str, Path], seed: Optional[int]) -> None:
    manifest = new_manifest(subcommand, _arguments(args), config.model_dump(mode="json"), seed)
    for role, path in inputs.items():
        manifest.add_input(role, path)
    timer.stop(manifest).write(out_dir)


def _require(path: Path) -> None:
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")


# -- subcommands ------------------------------------------------------------

def cmd_ingest(args: argparse.Namespace, config: Config) -> int:
    timer = RunTimer()
    if args.min_degree is not None:
        min_model = min_task = args.min_degree
    elif args.filter:
        min_model, min_task = config.filtering.min_model_degree, config.filtering.min_task_degree
    else:
        min_model = min_task = 0
    outcome = pipeline.run_ingest(args.input, args.format, args.aggregate, min_model, min_task)
    for stage, summary in outcome.stages:
        print(f"{stage}: {summary.line()}")

    if len(outcome.db) == 0:
        logger.warning("No records left after filtering; writing an empty corpus")
    pipeline.export_corpus(outcome.db, args.out)
    _finish("ingest", args, config, timer, args.out.parent, {"input": args.input}, None)
    return EXIT_OK


def cmd_embed(args: argparse.Namespace, config: Config) -> int:
    timer = RunTimer()
    fit_config = _fit_config(config, args)
    geometry = Geometry(
        GeometryKind(args.geometry or config.geometry.kind),
        args.dim or config.geometry.dim,
        config.geometry.ball_epsilon,
    )
    db = pipeline.load_corpus(args.db)
    space, delta = pipeline.run_embed(db, geometry, fit_config)
    pipeline.write_embedding(space, delta.task_stats, args.out, delta)

    report = space.fit_report
    print(f"geometry: {geometry.kind.value} (dim {geometry.dim})")
    print(f"final loss: {report.loss!r}")
    print(f"iterations: {report.iterations} ({'converged' if report.converged else 'iteration cap reached'})")
    _finish("embed", args, config, timer, args.out.parent, {"db": args.db}, fit_config.seed)
    return EXIT_OK


def cmd_predict(args: argparse.Namespace, config: Config) -> int:
    _require(args.embedding)
    space = EmbeddingSpace.load(args.embedding)
    stats = pipeline.load_task_stats(args.embedding) if args.raw else None
    prediction = pipeline.run_predict(space, args.model, args.task, stats)

    print(f"model: {prediction.model.label}")
    print(f"task: {prediction.task.label}")
    print(f"delta_hat: {prediction.delta_hat!r}")
    if prediction.raw is not None:
        note = " (extrapolated)" if prediction.raw.extrapolated else ""
        print(f"raw: {prediction.raw.value!r}{note}")
    return EXIT_OK


def cmd_place(args: argparse.Namespace, config: Config) -> int:
    timer = RunTimer()
    _require(args.embedding)
    if args.out.resolve() == args.embedding.resolve():
        raise ValueError("--out must differ from --embedding; the input embedding is never modified")

    space = EmbeddingSpace.load(args.embedding)
    stats = pipeline.load_task_stats(args.embedding)
    results = pipeline.read_known_results(args.results)
    fit_config = _fit_config(config, args)

    outcome = pipeline.run_place(space, stats, EntityKind(args.kind), args.name, results, fit_config)
    pipeline.write_embedding(outcome.space, outcome.stats, args.out)
    pipeline.write_predictions(pipeline.predictions_path(args.out), outcome.predictions)

    print(f"placed {args.kind} {args.name}: loss {outcome.placement.loss!r} from {len(results)} results")
    print(f"predictions: {len(outcome.predictions)}")
    _finish("place", args, config, timer, args.out.parent,
            {"embedding": args.embedding, "results": args.results}, fit_config.seed)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, config: Config) -> int:
    timer = RunTimer()
    fit_config = _fit_config(config, args)
    plan = SplitPlan(**{**config.evaluation.model_dump(), **{
        k: v for k, v in {
            "n_splits": args.splits,
            "holdout_size": args.holdout,
            "seed": args.seed,
            "workers": args.workers,
        }.items() if v is not None
    }})
    kinds = pipeline.parse_geometries(args.geometries)

    delta = normalize(pipeline.load_corpus(args.db))
    outcome = pipeline.run_eval(
        delta, kinds, plan, fit_config,
        dim=args.dim or config.geometry.dim,
        ball_epsilon=config.geometry.ball_epsilon,
        bucket_edges=config.analysis.degree_bucket_edges,
        dims=args.dims or (),
    )
    pipeline.write_eval_outputs(args.out, outcome)

    for row in outcome.comparison.table():
        print(f"{row['geometry']}: holdout RMSE {row['rmse']!r}, train RMSE {row['train_rmse']!r}")
    _finish("eval", args, config, timer, args.out, {"db": args.db}, plan.seed)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace, config: Config) -> int:
    timer = RunTimer()
    _require(args.db)
    _require(args.embedding)
    fit_config = _fit_config(config, args)

    db = pipeline.load_corpus(args.db)
    space = EmbeddingSpace.load(args.embedding)
    method = ProjectionMethod(args.projection) if args.projection else None
    outcome = pipeline.run_analyze(db, space, config.analysis, fit_config, method)
    pipeline.write_analyze_outputs(args.out, outcome)

    print(f"tasks: {len(outcome.quality)} ({sum(r.saturated for r in outcome.quality)} saturated)")
    print(f"most central model: {outcome.centrality[0].model.label}" if outcome.centrality else "no models")
    print(f"2D {outcome.projection.method.value} stress: {outcome.projection.stress!r}")
    _finish("analyze", args, config, timer, args.out, {"db": args.db, "embedding": args.embedding}, None)
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def _error_message(error: BaseException) -> str:
    if isinstance(error, KeyError) and error.args:
        return str(error.args[0])
    return str(error)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    handler: Callable[[argparse.Namespace, Config], int] = args.handler
    try:
        config = ConfigLoader(args.config).load()
        if args.log_level:
            config.app.log_level = args.log_level
        setup_logging(
            log_level=config.app.log_level.value,
            log_to_file=config.app.log_to_file,
            log_file_path=config.app.log_file_path,
            log_rotation_size=config.app.log_rotation_size,
            log_retention_count=config.app.log_retention_count,
            json_format=config.app.json_logs,
        )
        return handler(args, config)
    except (ValueError, KeyError, ArithmeticError, OSError) as e:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {_error_message(e)}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
