"""Multi-seed experiment harness and metric aggregation.

One run per seed: train the speaker and listener, grid-search lambda on
the validation view, then score every test triple with both the literal
(S0) and pragmatic (S2R) choice. Per-run split means are aggregated into
across-run means and population standard deviations.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from pragmatic_colors.application.dataset import (
    TrainingVocabulary,
    build_views,
    partition_all,
)
from pragmatic_colors.application.events import DomainEvent, EventBus, Events
from pragmatic_colors.application.metrics import cosine_scores, eval_cosine, eval_delta_e
from pragmatic_colors.application.net import Direction, TrainConfig, train
from pragmatic_colors.application.random_streams import Stream
from pragmatic_colors.application.speakers import (
    GridObjective,
    PragmaticConfig,
    grid_search_lambda,
    literal_select,
    pragmatic_select,
    prepare_queries,
)
from pragmatic_colors.config import Settings
from pragmatic_colors.domain.exceptions import ExperimentRunError, PragmaticColorsError
from pragmatic_colors.domain.models import (
    OVERALL,
    EvalResult,
    FloatArray,
    LabelSamples,
    SplitName,
    Triple,
)
from pragmatic_colors.infrastructure.colorspace import rgb_delta_e
from pragmatic_colors.infrastructure.embeddings import EmbeddingTable
from pragmatic_colors.infrastructure.logger import get_logger

logger = get_logger(__name__)

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "RunResult",
    "aggregate_runs",
    "eval_cosine",
    "eval_delta_e",
    "evaluate_run",
    "run_experiment",
]

MODELS = ("literal", "pragmatic")
SPLIT_ORDER = tuple(s.value for s in SplitName) + (OVERALL,)
SD_CONVENTION = "population"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs besides data and seed.

    Attributes:
        train: Training hyper-parameters; the seed is replaced per run
        pragmatic: Inference parameters; ``lam`` is used when fit_lambda is off
        lambda_grid: Grid for the validation search
        grid_objective: Validation metric optimized by the search
        fit_lambda: Search lambda per run instead of using ``pragmatic.lam``
        fractions: Per-label train/validation/test vector fractions
        partition_seed: Seed of the vector partition, shared by all runs
        validation_size: Validation triples drawn from the train triples
        strict_validation: Drop validation triples from training
        workers: Runs executed concurrently
    """

    train: TrainConfig = field(default_factory=TrainConfig)
    pragmatic: PragmaticConfig = field(default_factory=PragmaticConfig)
    lambda_grid: Tuple[float, ...] = tuple(round(i / 100, 10) for i in range(101))
    grid_objective: GridObjective = "cosine"
    fit_lambda: bool = True
    fractions: Tuple[float, float, float] = (0.6, 0.2, 0.2)
    partition_seed: int = 0
    validation_size: int = 100
    strict_validation: bool = False
    workers: int = 1

    @classmethod
    def from_settings(cls, settings: Settings, fit_lambda: bool = True) -> "ExperimentConfig":
        return cls(
            train=TrainConfig.from_settings(settings, seed=0),
            pragmatic=PragmaticConfig.from_settings(settings),
            lambda_grid=settings.lambda_grid(),
            grid_objective=settings.grid_objective,
            fit_lambda=fit_lambda,
            fractions=settings.fractions,
            partition_seed=settings.partition_seed,
            validation_size=settings.validation_size,
            strict_validation=settings.strict_validation,
            workers=settings.workers,
        )


@dataclass
class RunResult:
    """Per-triple scores of one seeded run.

    Attributes:
        seed: Run seed
        lam: Lambda used for S2R
        splits: Split of each test triple, in triple order
        cosine: Model -> per-triple cosine similarity
        delta_e: Model -> per-triple Delta-E 2000
        degenerate: Model -> count of zero-norm cosine cases
        final_loss: Direction -> last epoch's training loss
    """

    seed: int
    lam: float
    splits: List[str]
    cosine: Dict[str, FloatArray]
    delta_e: Dict[str, FloatArray]
    degenerate: Dict[str, int]
    final_loss: Dict[str, float] = field(default_factory=dict)

    def split_means(self, model: str, split: str) -> Tuple[float, float, int]:
        """(cosine mean, Delta-E mean, triple count) of one model on one split."""
        if split == OVERALL:
            mask = np.ones(len(self.splits), dtype=bool)
        else:
            mask = np.array([s == split for s in self.splits], dtype=bool)
        n = int(mask.sum())
        if n == 0:
            return math.nan, math.nan, 0
        return (
            math.fsum(self.cosine[model][mask]) / n,
            math.fsum(self.delta_e[model][mask]) / n,
            n,
        )


@dataclass
class ExperimentReport:
    """Aggregated experiment output.

    Attributes:
        results: One EvalResult per (model, non-empty split), fixed order
        runs: Per-seed results in seed order
        split_counts: Test triples per split
    """

    results: List[EvalResult]
    runs: List[RunResult]
    split_counts: Dict[str, int]

    @property
    def lambdas(self) -> List[float]:
        return [r.lam for r in self.runs]

    @property
    def seeds(self) -> List[int]:
        return [r.seed for r in self.runs]

    def degenerate_cosine(self) -> Dict[str, int]:
        return {m: sum(r.degenerate[m] for r in self.runs) for m in MODELS}

    def result(self, model: str, split: str) -> EvalResult:
        for r in self.results:
            if r.model == model and r.split == split:
                return r
        raise KeyError((model, split))


def evaluate_run(
    seed: int,
    triples: Sequence[Triple],
    samples: Mapping[str, LabelSamples],
    table: EmbeddingTable,
    config: ExperimentConfig,
    event_bus: Optional[EventBus] = None,
) -> RunResult:
    """Train, tune and test for a single seed.

    Args:
        seed: Run seed
        triples: All triples; train-tagged ones drive training
        samples: Partition-tagged samples
        table: Embedding table
        config: Experiment configuration
        event_bus: Optional progress bus

    Returns:
        Per-triple scores for both models
    """
    log = logger.bind(seed=seed)
    log.info("Run started", triples=len(triples))
    if event_bus:
        event_bus.emit(DomainEvent(Events.RUN_STARTED, {"seed": seed}))

    views = build_views(
        triples, samples, seed, config.validation_size, config.strict_validation
    )
    train_cfg = replace(config.train, seed=seed)
    speaker = train(views.train, table, Direction.SPEAKER, train_cfg, event_bus)
    listener = train(views.train, table, Direction.LISTENER, train_cfg, event_bus)

    lam = config.pragmatic.lam
    if config.fit_lambda:
        validation = prepare_queries(
            speaker.net, listener.net, views.validation, table, config.pragmatic, seed,
            Stream.VALIDATION_QUERY,
        )
        lam = grid_search_lambda(validation, config.lambda_grid, config.grid_objective).best
    log.info("Lambda selected", lam=lam, fitted=config.fit_lambda)
    if event_bus:
        event_bus.emit(DomainEvent(Events.LAMBDA_SELECTED, {"seed": seed, "lambda": lam}))

    queries = prepare_queries(
        speaker.net, listener.net, views.test, table, config.pragmatic, seed, Stream.TEST_QUERY
    )
    vocab = TrainingVocabulary.from_triples(triples)
    targets = np.array([q.target_mean for q in queries])
    refs = np.array([q.ref_mean for q in queries])
    chosen = {
        "literal": np.array([literal_select(q.candidates) for q in queries]),
        "pragmatic": np.array([pragmatic_select(q.candidates, lam)[0] for q in queries]),
    }

    cosine: Dict[str, FloatArray] = {}
    delta_e: Dict[str, FloatArray] = {}
    degenerate: Dict[str, int] = {}
    for model in MODELS:
        scores, flags = cosine_scores(targets, refs, chosen[model])
        cosine[model] = scores
        degenerate[model] = int(flags.sum())
        delta_e[model] = np.asarray(rgb_delta_e(targets, chosen[model]), dtype=np.float64)

    result = RunResult(
        seed=seed,
        lam=lam,
        splits=[vocab.classify(q.triple).value for q in queries],
        cosine=cosine,
        delta_e=delta_e,
        degenerate=degenerate,
        final_loss={
            Direction.SPEAKER.value: speaker.loss_trace[-1],
            Direction.LISTENER.value: listener.loss_trace[-1],
        },
    )
    overall_cos, overall_de, _ = result.split_means("pragmatic", OVERALL)
    log.info("Run completed", cosine=overall_cos, delta_e=overall_de)
    if event_bus:
        event_bus.emit(
            DomainEvent(
                Events.RUN_COMPLETED,
                {"seed": seed, "cosine": overall_cos, "delta_e": overall_de},
            )
        )
    return result


def _mean_sd(values: Sequence[float]) -> Tuple[float, float]:
    """Order-independent mean and population standard deviation."""
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


def aggregate_runs(runs: Sequence[RunResult]) -> List[EvalResult]:
    """Across-run means and population sds of per-run split means.

    Splits with no triples are omitted.

    Raises:
        ValueError: If ``runs`` is empty
    """
    if not runs:
        raise ValueError("no runs to aggregate")
    results: List[EvalResult] = []
    for model in MODELS:
        for split in SPLIT_ORDER:
            per_run = [r.split_means(model, split) for r in runs]
            n_triples = per_run[0][2]
            if n_triples == 0:
                continue
            cos_mean, cos_sd = _mean_sd([p[0] for p in per_run])
            de_mean, de_sd = _mean_sd([p[1] for p in per_run])
            results.append(
                EvalResult(
                    model=model,
                    split=split,
                    cosine_mean=cos_mean,
                    cosine_sd=cos_sd,
                    delta_e_mean=de_mean,
                    delta_e_sd=de_sd,
                    n_triples=n_triples,
                    n_runs=len(runs),
                )
            )
    return results


def run_experiment(
    triples: Sequence[Triple],
    samples: Mapping[str, LabelSamples],
    table: EmbeddingTable,
    config: ExperimentConfig,
    seeds: Sequence[int],
    event_bus: Optional[EventBus] = None,
) -> ExperimentReport:
    """Run the full protocol once per seed and aggregate.

    Samples are partitioned once with ``config.partition_seed``; run seeds
    drive initialization, sampling and validation choice. Runs may execute
    concurrently; results are reduced in seed-list order.

    Raises:
        ValueError: If no seeds are given
        ExperimentRunError: If a run fails, naming its seed
    """
    if not seeds:
        raise ValueError("at least one seed is required")

    partitioned = partition_all(samples, config.fractions, config.partition_seed)
    logger.info(
        "Experiment started",
        seeds=list(seeds),
        triples=len(triples),
        workers=config.workers,
        metric=config.pragmatic.metric.value,
    )

    def run_one(seed: int) -> RunResult:
        try:
            return evaluate_run(seed, triples, partitioned, table, config, event_bus)
        except (PragmaticColorsError, ValueError) as e:
            raise ExperimentRunError(seed, e) from e

    if config.workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            runs = list(pool.map(run_one, seeds))
    else:
        runs = [run_one(seed) for seed in seeds]

    counts = {name: 0 for name in SPLIT_ORDER[:-1]}
    for split in runs[0].splits:
        counts[split] += 1
    counts[OVERALL] = len(runs[0].splits)

    results = aggregate_runs(runs)
    logger.info("Experiment completed", runs=len(runs), lambdas=[r.lam for r in runs])
    return ExperimentReport(results=results, runs=runs, split_counts=counts)
