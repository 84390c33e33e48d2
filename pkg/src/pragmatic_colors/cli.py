"""Command-line interface.

    pragmatic-colors synth    generate a synthetic corpus
    pragmatic-colors train    train a speaker or listener net
    pragmatic-colors predict  pragmatic prediction for one (reference, modifier)
    pragmatic-colors eval     multi-seed experiment with metric reports
    pragmatic-colors swatch   render colors as bars (PPM or SVG)

Results go to stdout, logs to stderr. Exit codes: 0 success, 1 usage or
configuration error, 2 data error, 3 numerical failure.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional, Sequence

import numpy as np

from pragmatic_colors.application.dataset import (
    SyntheticConfig,
    build_views,
    generate_synthetic,
    partition_all,
)
from pragmatic_colors.application.evaluation import ExperimentConfig, run_experiment
from pragmatic_colors.application.events import EventBus, ProgressLogger
from pragmatic_colors.application.net import Direction, TrainConfig, count_params, train
from pragmatic_colors.application.random_streams import Stream, rng_for
from pragmatic_colors.application.speakers import (
    PragmaticConfig,
    listener_scores,
    literal_candidates,
    literal_select,
    pragmatic_select,
)
from pragmatic_colors.config import Settings, load_settings
from pragmatic_colors.domain.exceptions import (
    PragmaticColorsError,
    UnknownLabelError,
)
from pragmatic_colors.domain.models import DistanceMetric, Partition, Rgb, RunManifest
from pragmatic_colors.infrastructure.data_files import (
    load_samples,
    load_triples,
    write_samples,
    write_triples,
)
from pragmatic_colors.infrastructure.embeddings import (
    embed_modifier,
    load_embeddings,
    write_embeddings,
)
from pragmatic_colors.infrastructure.logger import get_logger
from pragmatic_colors.infrastructure.logging_config import configure_logging
from pragmatic_colors.infrastructure.model_store import ModelArtifact, load_model, save_model
from pragmatic_colors.infrastructure.reports import (
    EvalReport,
    hash_files,
    utc_now,
    write_manifest,
    write_report_csv,
    write_report_json,
)
from pragmatic_colors.infrastructure.swatch import parse_color, write_swatch

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seeds(text: str) -> List[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed list {text!r}") from None
    if not seeds or any(s < 0 for s in seeds):
        raise argparse.ArgumentTypeError("seeds must be non-negative integers")
    return seeds


def _add_settings_flags(p: argparse.ArgumentParser) -> None:
    """Flags that override Settings fields; unset flags fall through."""
    p.add_argument("--embedding-dim", type=int, dest="embedding_dim")
    p.add_argument("--hidden-size", type=int, dest="hidden_size")
    p.add_argument("--activation", choices=["identity", "relu"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--optimizer", choices=["adam", "sgd"])
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--samples-per-triple", type=int, dest="samples_per_triple")
    p.add_argument("--k", type=int, dest="k_draws", help="draws per reference sample")
    p.add_argument("--n", type=int, dest="n_candidates", help="candidates per query")
    p.add_argument("--metric", choices=[m.value for m in DistanceMetric])
    p.add_argument("--temperature", type=float)
    p.add_argument("--oov-policy", choices=["zero", "error"], dest="oov_policy")
    p.add_argument("--partition-seed", type=int, dest="partition_seed")


SETTINGS_KEYS = (
    "embedding_dim",
    "hidden_size",
    "activation",
    "epochs",
    "learning_rate",
    "optimizer",
    "batch_size",
    "samples_per_triple",
    "k_draws",
    "n_candidates",
    "metric",
    "temperature",
    "oov_policy",
    "partition_seed",
    "log_level",
    "grid_objective",
    "workers",
    "validation_size",
    "strict_validation",
)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="pragmatic-colors",
        description="Pragmatic color generation: train, predict and evaluate.",
    )
    parser.add_argument("--config", type=Path, help="flat key=value settings file")
    parser.add_argument(
        "--log-level", dest="log_level", choices=["DEBUG", "INFO", "WARNING", "ERROR"]
    )
    parser.add_argument("--log-json", action="store_true", help="JSON log lines on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--synth-config", type=Path, help="key=value file of SyntheticConfig fields")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--noise-sd", type=float, dest="noise_sd")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("train", help="train a speaker or listener net")
    p.add_argument("--triples", type=Path, required=True)
    p.add_argument("--samples", type=Path, required=True)
    p.add_argument("--embeddings", type=Path, required=True)
    p.add_argument("--direction", choices=[d.value for d in Direction], default="speaker")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="model path (.npz or .json)")
    _add_settings_flags(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("predict", help="predict a target color for one query")
    p.add_argument("--speaker", type=Path, required=True)
    p.add_argument("--listener", type=Path, required=True)
    p.add_argument("--samples", type=Path, required=True)
    p.add_argument("--embeddings", type=Path, required=True)
    p.add_argument("--ref-label", required=True, dest="ref_label")
    p.add_argument("--modifier", required=True)
    p.add_argument("--lambda", type=float, dest="pragmatic_lambda")
    p.add_argument(
        "--partition",
        choices=[part.value for part in Partition],
        help="draw references from one partition (default: all vectors)",
    )
    p.add_argument("--seed", type=int, default=0)
    _add_settings_flags(p)
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("eval", help="multi-seed evaluation")
    p.add_argument("--triples", type=Path, required=True)
    p.add_argument("--samples", type=Path, required=True)
    p.add_argument("--embeddings", type=Path, required=True)
    p.add_argument("--seeds", type=_seeds, default=list(range(10)), help="comma-separated")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument(
        "--lambda",
        type=float,
        dest="pragmatic_lambda",
        help="fixed lambda; disables the validation grid search",
    )
    p.add_argument("--grid-objective", choices=["cosine", "delta_e"], dest="grid_objective")
    p.add_argument("--workers", type=int)
    p.add_argument("--validation-size", type=int, dest="validation_size")
    p.add_argument(
        "--strict-validation", action="store_true", default=None, dest="strict_validation"
    )
    _add_settings_flags(p)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("swatch", help="render colors as adjacent bars")
    p.add_argument("--colors", nargs="+", required=True, help="#rrggbb or r,g,b")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--format", choices=["ppm", "svg"], dest="fmt")
    p.add_argument("--bar-width", type=int, default=64, dest="bar_width")
    p.add_argument("--height", type=int, default=64)
    p.set_defaults(handler=cmd_swatch)
    return parser


def _settings_from(args: argparse.Namespace) -> Settings:
    keys = (*SETTINGS_KEYS, "pragmatic_lambda")
    overrides: Dict[str, Any] = {k: getattr(args, k, None) for k in keys}
    return load_settings(args.config, overrides)


# ============================================================================
# Commands
# ============================================================================


def cmd_synth(args: argparse.Namespace, settings: Settings) -> int:
    """Write triples.csv, samples.csv and embeddings.txt into --out."""
    config = SyntheticConfig.from_file(args.synth_config) if args.synth_config else SyntheticConfig()
    updates = {k: v for k, v in (("seed", args.seed), ("noise_sd", args.noise_sd)) if v is not None}
    if updates:
        config = SyntheticConfig.model_validate({**config.model_dump(), **updates})
    corpus = generate_synthetic(config)

    args.out.mkdir(parents=True, exist_ok=True)
    paths = {
        "triples": args.out / "triples.csv",
        "samples": args.out / "samples.csv",
        "embeddings": args.out / "embeddings.txt",
    }
    write_triples(paths["triples"], corpus.triples)
    write_samples(paths["samples"], corpus.samples)
    write_embeddings(paths["embeddings"], corpus.embeddings)
    for path in paths.values():
        print(path)
    return EXIT_OK


def cmd_train(args: argparse.Namespace, settings: Settings) -> int:
    started = utc_now()
    triples = load_triples(args.triples)
    samples = partition_all(load_samples(args.samples), settings.fractions, settings.partition_seed)
    table = load_embeddings(args.embeddings, settings.embedding_dim)
    views = build_views(
        triples, samples, args.seed, settings.validation_size, settings.strict_validation
    )

    bus = EventBus()
    bus.subscribe_all(ProgressLogger())
    config = TrainConfig.from_settings(settings, seed=args.seed)
    result = train(views.train, table, Direction(args.direction), config, bus)
    save_model(args.out, ModelArtifact.from_result(result))

    manifest = RunManifest(
        command="train",
        config=settings.model_dump(mode="json"),
        seeds=[args.seed],
        datasets=hash_files([args.triples, args.samples, args.embeddings]),
        artifacts=hash_files([args.out]),
        started_at=started,
        finished_at=utc_now(),
    )
    write_manifest(args.out.with_suffix(".manifest.json"), manifest)
    print(f"model: {args.out}")
    print(f"params: {count_params(result.net)}")
    print(f"final_loss: {result.loss_trace[-1]!r}")
    return EXIT_OK


def _fmt_rgb(values: Sequence[float]) -> str:
    return " ".join(f"{float(v):8.3f}" for v in values)


def cmd_predict(args: argparse.Namespace, settings: Settings) -> int:
    speaker = load_model(args.speaker).net
    listener = load_model(args.listener).net
    samples = load_samples(args.samples)
    partition: Optional[Partition] = None
    if args.partition:
        partition = Partition(args.partition)
        samples = partition_all(samples, settings.fractions, settings.partition_seed)
    if args.ref_label not in samples:
        raise UnknownLabelError(args.ref_label)
    table = load_embeddings(args.embeddings, speaker.embedding_dim)

    cfg = PragmaticConfig.from_settings(settings)
    m = embed_modifier(table, args.modifier, cfg.oov_policy)
    rng = rng_for(args.seed, Stream.PREDICT)
    cs = literal_candidates(speaker, samples[args.ref_label], m, cfg, rng, partition)
    cs = listener_scores(listener, cs, m, cfg)
    chosen, cs = pragmatic_select(cs, cfg.lam)
    literal = literal_select(cs)

    assert cs.s0_logprob is not None and cs.l1r_logprob is not None
    assert cs.s2r_logprob is not None
    print(f"chosen:  {_fmt_rgb(chosen)}  {Rgb.clamped(chosen).to_hex()}")
    print(f"literal: {_fmt_rgb(literal)}  {Rgb.clamped(literal).to_hex()}")
    print(f"lambda:  {cfg.lam}")
    print(f"{'idx':>3} {'r':>8} {'g':>8} {'b':>8} {'s0':>10} {'l1r':>10} {'s2r':>10}")
    for i in range(len(cs)):
        probs = (np.exp(cs.s0_logprob[i]), np.exp(cs.l1r_logprob[i]), np.exp(cs.s2r_logprob[i]))
        print(f"{i:>3} {_fmt_rgb(cs.candidates[i])} " + " ".join(f"{p:10.6f}" for p in probs))
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    started = utc_now()
    triples = load_triples(args.triples)
    samples = load_samples(args.samples)
    table = load_embeddings(args.embeddings, settings.embedding_dim)

    bus = EventBus()
    bus.subscribe_all(ProgressLogger())
    config = ExperimentConfig.from_settings(settings, fit_lambda=args.pragmatic_lambda is None)
    experiment = run_experiment(triples, samples, table, config, args.seeds, bus)

    report = EvalReport.from_experiment(experiment, settings.metric, settings.grid_objective)
    args.out.mkdir(parents=True, exist_ok=True)
    json_path = args.out / "metrics.json"
    csv_path = args.out / "metrics.csv"
    write_report_json(json_path, report)
    write_report_csv(csv_path, report.rows)
    write_manifest(
        args.out / "manifest.json",
        RunManifest(
            command="eval",
            config=settings.model_dump(mode="json"),
            seeds=list(args.seeds),
            datasets=hash_files([args.triples, args.samples, args.embeddings]),
            artifacts=hash_files([json_path, csv_path]),
            started_at=started,
            finished_at=utc_now(),
        ),
    )

    print(f"{'model':<10} {'split':<4} {'n':>5} {'cosine':>16} {'delta_e':>16}")
    for r in experiment.results:
        print(
            f"{r.model:<10} {r.split:<4} {r.n_triples:>5} "
            f"{r.cosine_mean:7.3f} ± {r.cosine_sd:6.3f} {r.delta_e_mean:7.3f} ± {r.delta_e_sd:6.3f}"
        )
    print(f"lambdas: {experiment.lambdas}")
    print(f"metrics: {json_path} {csv_path}")
    return EXIT_OK


def cmd_swatch(args: argparse.Namespace, settings: Settings) -> int:
    colors = [parse_color(c) for c in args.colors]
    fmt = args.fmt or ("svg" if args.out.suffix.lower() == ".svg" else "ppm")
    write_swatch(args.out, colors, fmt, args.bar_width, args.height)
    print(args.out)
    return EXIT_OK


# ============================================================================
# Entry point
# ============================================================================


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _settings_from(args)
        configure_logging(settings.log_level, json_format=args.log_json or settings.log_format == "json")
        return int(args.handler(args, settings))
    except PragmaticColorsError as e:
        logger.error("Command failed", command=args.command, error=str(e), code=e.code)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ValueError as e:
        logger.error("Invalid input", command=args.command, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        logger.error("I/O failure", command=args.command, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
