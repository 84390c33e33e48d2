"""Pragmatic re-ranking of speaker candidates.

The literal speaker S0 proposes ``n`` candidates from sampled reference
colors and prefers those that move furthest from the reference mean. The
reconstructor-based listener L1R maps each candidate back through the
listener net and prefers faithful reconstructions. The pragmatic speaker
S2R combines both in log space:

    log S2R = lam * log L1R + (1 - lam) * log S0   (renormalized)

All distributions are log-softmaxes with max subtraction, so distances of
any finite size are safe.
"""

from dataclasses import dataclass, replace
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from pragmatic_colors.application.dataset import DatasetView, mean_rgb, sample_reference
from pragmatic_colors.application.metrics import cosine_scores
from pragmatic_colors.application.net import SpeakerNet, forward
from pragmatic_colors.application.random_streams import Stream, rng_for
from pragmatic_colors.config import Settings
from pragmatic_colors.domain.exceptions import EmptyGridError
from pragmatic_colors.domain.models import (
    RGB_MAX,
    CandidateSet,
    DistanceMetric,
    EmbeddedModifier,
    FloatArray,
    LabelSamples,
    Partition,
    Triple,
)
from pragmatic_colors.infrastructure.colorspace import cosine_distance_rgb, rgb_delta_e
from pragmatic_colors.infrastructure.embeddings import EmbeddingTable, OovPolicy, embed_modifier
from pragmatic_colors.infrastructure.logger import get_logger

logger = get_logger(__name__)

GridObjective = Literal["cosine", "delta_e"]


@dataclass(frozen=True)
class PragmaticConfig:
    """Inference parameters.

    Attributes:
        lam: Listener weight in [0, 1]
        n: Candidates per query
        k: Draws averaged into each reference sample
        metric: Distance inside S0 and L1R
        temperature: Divisor applied to distances before the softmax
        oov_policy: Handling of modifier tokens without embeddings
    """

    lam: float = 0.33
    n: int = 10
    k: int = 100
    metric: DistanceMetric = DistanceMetric.DELTA_E_2000_LAB
    temperature: float = 1.0
    oov_policy: OovPolicy = "zero"

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must be in [0, 1], got {self.lam}")
        if self.n < 1 or self.k < 1:
            raise ValueError("n and k must be >= 1")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")

    @classmethod
    def from_settings(cls, settings: Settings) -> "PragmaticConfig":
        return cls(
            lam=settings.pragmatic_lambda,
            n=settings.n_candidates,
            k=settings.k_draws,
            metric=DistanceMetric(settings.metric),
            temperature=settings.temperature,
            oov_policy=settings.oov_policy,
        )


def distance(metric: DistanceMetric, x: FloatArray, y: FloatArray) -> FloatArray:
    """Row-wise distance between 0-255 RGB colors under ``metric``."""
    if metric is DistanceMetric.COSINE_RGB:
        return np.asarray(cosine_distance_rgb(x, y), dtype=np.float64)
    return np.asarray(rgb_delta_e(x, y), dtype=np.float64)


def log_softmax(scores: FloatArray) -> FloatArray:
    """Normalized log-probabilities, stable for large magnitudes."""
    shifted = scores - np.max(scores)
    return np.asarray(shifted - np.log(np.sum(np.exp(shifted))), dtype=np.float64)


def literal_candidates(
    net: SpeakerNet,
    samples: LabelSamples,
    m: EmbeddedModifier,
    cfg: PragmaticConfig,
    rng: np.random.Generator,
    partition: Optional[Partition] = None,
) -> CandidateSet:
    """Propose candidates from the literal speaker and score them under S0.

    Args:
        net: Trained speaker
        samples: Reference label samples
        m: Embedded modifier
        cfg: Inference parameters
        rng: Generator for reference sampling
        partition: Partition supplying reference vectors; all when None

    Returns:
        CandidateSet with ``s0_logprob`` filled
    """
    refs = sample_reference(samples, partition, cfg.n, cfg.k, rng)
    candidates = forward(net, refs, m)
    ref_mean = mean_rgb(samples, partition)
    s0 = log_softmax(distance(cfg.metric, candidates, ref_mean) / cfg.temperature)
    return CandidateSet(candidates=candidates, ref_mean=ref_mean, s0_logprob=s0)


def listener_scores(
    listener: SpeakerNet,
    cs: CandidateSet,
    m: EmbeddedModifier,
    cfg: PragmaticConfig,
) -> CandidateSet:
    """Score candidates by how closely the listener reconstructs the reference."""
    reconstructions = forward(listener, cs.candidates, m)
    errors = distance(cfg.metric, reconstructions, cs.ref_mean)
    l1r = log_softmax(-errors / cfg.temperature)
    return replace(cs, reconstructions=reconstructions, l1r_logprob=l1r)


def pragmatic_select(cs: CandidateSet, lam: float) -> Tuple[FloatArray, CandidateSet]:
    """Pick the S2R-best candidate.

    The argmax is taken over the unnormalized combination so lam = 0 and
    lam = 1 reproduce the S0 and L1R choices exactly. Ties go to the
    lowest index.

    Returns:
        (chosen color clamped to [0, 255], cs with ``s2r_logprob`` filled)

    Raises:
        ValueError: If lam is outside [0, 1] or scores are missing
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    if cs.s0_logprob is None or cs.l1r_logprob is None:
        raise ValueError("candidate set needs S0 and L1R scores")
    combined = lam * cs.l1r_logprob + (1.0 - lam) * cs.s0_logprob
    best = int(np.argmax(combined))
    chosen = np.clip(cs.candidates[best], 0.0, RGB_MAX)
    return chosen, replace(cs, s2r_logprob=log_softmax(combined))


def literal_select(cs: CandidateSet) -> FloatArray:
    """The S0-best candidate, clamped."""
    if cs.s0_logprob is None:
        raise ValueError("candidate set needs S0 scores")
    return np.clip(cs.candidates[int(np.argmax(cs.s0_logprob))], 0.0, RGB_MAX)


# ============================================================================
# Query preparation and lambda search
# ============================================================================


@dataclass(frozen=True)
class PreparedQuery:
    """A triple with its scored candidates and the gold colors of its partition."""

    triple: Triple
    candidates: CandidateSet
    ref_mean: FloatArray
    target_mean: FloatArray


def prepare_queries(
    speaker: SpeakerNet,
    listener: SpeakerNet,
    view: DatasetView,
    table: EmbeddingTable,
    cfg: PragmaticConfig,
    seed: int,
    stream: Stream,
) -> List[PreparedQuery]:
    """Generate and score candidates for every triple of a view.

    Triple ``i`` draws from ``rng_for(seed, stream, i)``, so results do not
    depend on evaluation order.
    """
    embedded: Dict[str, EmbeddedModifier] = {}
    prepared: List[PreparedQuery] = []
    for i, t in enumerate(view.triples):
        if t.modifier not in embedded:
            embedded[t.modifier] = embed_modifier(table, t.modifier, cfg.oov_policy)
        m = embedded[t.modifier]
        ref = view.label_samples(t.ref_label)
        target = view.label_samples(t.target_label)
        cs = literal_candidates(speaker, ref, m, cfg, rng_for(seed, stream, i), view.partition)
        cs = listener_scores(listener, cs, m, cfg)
        prepared.append(
            PreparedQuery(t, cs, cs.ref_mean, mean_rgb(target, view.partition))
        )
    return prepared


@dataclass(frozen=True)
class LambdaSearchResult:
    """Outcome of a lambda grid search.

    Attributes:
        best: Selected lambda
        scores: Lambda -> mean validation objective, in grid order
        objective: Metric optimized
    """

    best: float
    scores: Dict[float, float]
    objective: GridObjective


def score_lambda(queries: Sequence[PreparedQuery], lam: float, objective: GridObjective) -> float:
    """Mean validation objective when selecting with ``lam``."""
    chosen = np.array([pragmatic_select(q.candidates, lam)[0] for q in queries])
    targets = np.array([q.target_mean for q in queries])
    if objective == "delta_e":
        return float(np.mean(rgb_delta_e(targets, chosen)))
    refs = np.array([q.ref_mean for q in queries])
    scores, _ = cosine_scores(targets, refs, chosen)
    return float(np.mean(scores))


def grid_search_lambda(
    queries: Sequence[PreparedQuery],
    grid: Sequence[float],
    objective: GridObjective = "cosine",
) -> LambdaSearchResult:
    """Pick the lambda with the best mean validation score.

    Cosine is maximized and Delta-E minimized. Ties go to the smaller lambda.

    Args:
        queries: Prepared validation queries (candidates are reused across the grid)
        grid: Lambda values in [0, 1]
        objective: ``cosine`` or ``delta_e``

    Raises:
        EmptyGridError: If ``grid`` is empty
        ValueError: If there are no queries
    """
    if not grid:
        raise EmptyGridError()
    if not queries:
        raise ValueError("validation view has no triples")

    sign = -1.0 if objective == "delta_e" else 1.0
    scores: Dict[float, float] = {}
    best: Optional[float] = None
    for lam in sorted(grid):
        scores[lam] = score_lambda(queries, lam, objective)
        if best is None or sign * scores[lam] > sign * scores[best]:
            best = lam
    assert best is not None
    logger.debug("Lambda grid evaluated", points=len(scores), best=best, objective=objective)
    return LambdaSearchResult(best=best, scores=scores, objective=objective)
