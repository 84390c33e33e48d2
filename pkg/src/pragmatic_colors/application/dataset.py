"""Dataset assembly: partitioning, split taxonomy, sampling and synthetic corpora."""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from pragmatic_colors.application.random_streams import Stream, rng_for
from pragmatic_colors.domain.exceptions import (
    ConfigurationError,
    EmptyPartitionError,
    InsufficientSamplesError,
    UnknownLabelError,
)
from pragmatic_colors.domain.models import (
    RGB_MAX,
    FloatArray,
    LabelSamples,
    Partition,
    SplitName,
    Triple,
    TripleTag,
)
from pragmatic_colors.infrastructure.embeddings import EmbeddingTable
from pragmatic_colors.infrastructure.logger import get_logger

logger = get_logger(__name__)

PARTITION_ORDER = (Partition.TRAIN, Partition.VALIDATION, Partition.TEST)


# ============================================================================
# Partitioning
# ============================================================================


def partition_counts(n_vectors: int, fractions: Tuple[float, float, float]) -> Tuple[int, int, int]:
    """Vector counts per partition; validation and test are rounded, train takes the rest."""
    _, f_val, f_test = fractions
    n_val = int(round(n_vectors * f_val))
    n_test = int(round(n_vectors * f_test))
    return n_vectors - n_val - n_test, n_val, n_test


def partition_samples(
    samples: LabelSamples,
    fractions: Tuple[float, float, float] = (0.6, 0.2, 0.2),
    seed: int = 0,
    label_index: int = 0,
) -> LabelSamples:
    """Tag every vector of a label with exactly one partition.

    Args:
        samples: Untagged (or previously tagged) samples
        fractions: Train, validation and test fractions summing to 1
        seed: Partition seed
        label_index: Keys the permutation so each label is shuffled independently

    Returns:
        A copy of ``samples`` with ``tags`` set

    Raises:
        ValueError: If fractions are negative or do not sum to 1
        InsufficientSamplesError: If any partition would be empty
    """
    if any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must be non-negative and sum to 1, got {fractions}")
    n = len(samples)
    counts = partition_counts(n, fractions)
    if min(counts) < 1:
        raise InsufficientSamplesError(samples.label, n, len(PARTITION_ORDER))

    order = rng_for(seed, Stream.PARTITION, label_index).permutation(n)
    tags: List[Optional[Partition]] = [None] * n
    start = 0
    for partition, count in zip(PARTITION_ORDER, counts):
        for i in order[start : start + count]:
            tags[int(i)] = partition
        start += count
    return replace(samples, tags=tuple(t for t in tags if t is not None))


def partition_all(
    samples: Mapping[str, LabelSamples],
    fractions: Tuple[float, float, float],
    seed: int,
) -> Dict[str, LabelSamples]:
    """Partition every label with the same fractions and seed.

    Labels are keyed by their position in sorted order, so the tagging does
    not depend on mapping order.
    """
    index = {label: i for i, label in enumerate(sorted(samples))}
    return {
        label: partition_samples(s, fractions, seed, index[label]) for label, s in samples.items()
    }


# ============================================================================
# Split taxonomy
# ============================================================================


def classify_triple(
    t: Triple,
    train_refs: FrozenSet[str],
    train_mods: FrozenSet[str],
    train_pairs: FrozenSet[Tuple[str, str]],
) -> SplitName:
    """Assign a test triple to its generalization stratum."""
    if t.pair in train_pairs:
        return SplitName.SP
    ref_seen = t.ref_label in train_refs
    mod_seen = t.modifier in train_mods
    if ref_seen and mod_seen:
        return SplitName.UP
    if mod_seen:
        return SplitName.URC
    if ref_seen:
        return SplitName.UM
    return SplitName.FUN


@dataclass(frozen=True)
class TrainingVocabulary:
    """Reference labels, modifiers and pairs seen in training triples."""

    refs: FrozenSet[str]
    mods: FrozenSet[str]
    pairs: FrozenSet[Tuple[str, str]]

    @classmethod
    def from_triples(cls, triples: Sequence[Triple]) -> "TrainingVocabulary":
        train = [t for t in triples if t.tag is TripleTag.TRAIN]
        return cls(
            refs=frozenset(t.ref_label for t in train),
            mods=frozenset(t.modifier for t in train),
            pairs=frozenset(t.pair for t in train),
        )

    def classify(self, t: Triple) -> SplitName:
        return classify_triple(t, self.refs, self.mods, self.pairs)


def split_counts(triples: Sequence[Triple]) -> Dict[SplitName, int]:
    """Number of triples per split, every split present (possibly 0)."""
    vocab = TrainingVocabulary.from_triples(triples)
    counts = {name: 0 for name in SplitName}
    for t in triples:
        counts[vocab.classify(t)] += 1
    return counts


# ============================================================================
# Sampling
# ============================================================================


def _partition_vectors(samples: LabelSamples, partition: Optional[Partition]) -> FloatArray:
    vectors = samples.vectors_in(partition)
    if vectors.shape[0] == 0:
        raise EmptyPartitionError(samples.label, partition.value if partition else "all")
    return vectors


def sample_reference(
    samples: LabelSamples,
    partition: Optional[Partition],
    n: int,
    k: int,
    rng: np.random.Generator,
) -> FloatArray:
    """Draw ``n`` reference colors, each the mean of ``k`` draws with replacement.

    Returns:
        Array (n, 3) on the 0-255 scale

    Raises:
        ValueError: If n or k is below 1
        EmptyPartitionError: If the partition holds no vectors
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    vectors = _partition_vectors(samples, partition)
    idx = rng.integers(0, vectors.shape[0], size=(n, k))
    return np.asarray(vectors[idx].mean(axis=1), dtype=np.float64)


def mean_rgb(samples: LabelSamples, partition: Optional[Partition]) -> FloatArray:
    """Channel-wise mean over a partition's vectors, shape (3,)."""
    return np.asarray(_partition_vectors(samples, partition).mean(axis=0), dtype=np.float64)


# ============================================================================
# Views
# ============================================================================


@dataclass(frozen=True)
class DatasetView:
    """Triples paired with the partition whose vectors serve them.

    Attributes:
        triples: Triples in this view
        samples: Label -> partition-tagged samples
        partition: Partition that supplies vectors
    """

    triples: Sequence[Triple]
    samples: Mapping[str, LabelSamples]
    partition: Partition = Partition.TRAIN

    def label_samples(self, label: str) -> LabelSamples:
        try:
            return self.samples[label]
        except KeyError:
            raise UnknownLabelError(label) from None


@dataclass(frozen=True)
class ExperimentViews:
    """Train, validation and test views for one seeded run."""

    train: DatasetView
    validation: DatasetView
    test: DatasetView


def build_views(
    triples: Sequence[Triple],
    samples: Mapping[str, LabelSamples],
    seed: int,
    validation_size: int = 100,
    strict_validation: bool = False,
) -> ExperimentViews:
    """Split triples into the three evaluation views for one run.

    Validation triples are a seeded subset of the train triples read on
    validation-partition vectors. They stay in training unless
    ``strict_validation`` is set. The test view is every triple, read on
    test-partition vectors.

    Raises:
        ValueError: If there are no train triples, or strict mode would
            leave training empty
    """
    train = [t for t in triples if t.tag is TripleTag.TRAIN]
    if not train:
        raise ValueError("no triples are tagged for training")
    size = min(validation_size, len(train))
    rng = rng_for(seed, Stream.VALIDATION_CHOICE)
    chosen = sorted(int(i) for i in rng.choice(len(train), size=size, replace=False))
    validation = [train[i] for i in chosen]
    if strict_validation:
        picked = set(chosen)
        train = [t for i, t in enumerate(train) if i not in picked]
        if not train:
            raise ValueError("strict validation leaves no training triples")
    return ExperimentViews(
        train=DatasetView(train, samples, Partition.TRAIN),
        validation=DatasetView(validation, samples, Partition.VALIDATION),
        test=DatasetView(list(triples), samples, Partition.TEST),
    )


# ============================================================================
# Synthetic corpora
# ============================================================================


class SyntheticConfig(BaseModel):
    """Shape of a generated corpus.

    Reference labels are ``ref00``.. and modifiers ``mod00``..; odd-indexed
    modifiers get a leading ``more`` token so bigrams are exercised. The
    last ``held_out_refs`` references and ``held_out_mods`` modifiers never
    appear in training, and ``held_out_pairs`` seen pairs on the diagonal
    are kept out of training too, so all five splits are populated.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    num_refs: int = Field(default=8, ge=1)
    num_mods: int = Field(default=6, ge=1)
    vectors_per_label: int = Field(default=30, ge=3)
    noise_sd: float = Field(default=0.0, ge=0)
    spread_sd: float = Field(default=4.0, ge=0)
    min_displacement: float = Field(default=20.0, ge=0)
    max_displacement: float = Field(default=40.0, gt=0)
    embedding_dim: int = Field(default=16, ge=1)
    held_out_refs: int = Field(default=1, ge=0)
    held_out_mods: int = Field(default=1, ge=0)
    held_out_pairs: int = Field(default=1, ge=0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_held_out(self) -> "SyntheticConfig":
        seen_refs = self.num_refs - self.held_out_refs
        seen_mods = self.num_mods - self.held_out_mods
        if seen_refs < 1 or seen_mods < 1:
            raise ValueError("at least one reference and one modifier must be seen in training")
        if self.held_out_pairs and self.held_out_pairs >= min(seen_refs, seen_mods):
            raise ValueError("held_out_pairs must be smaller than the seen refs and mods")
        if self.min_displacement > self.max_displacement:
            raise ValueError("min_displacement exceeds max_displacement")
        return self

    @classmethod
    def from_file(cls, path: Path) -> "SyntheticConfig":
        """Read a flat key=value file.

        Raises:
            ConfigurationError: If the file is missing or a value is invalid
        """
        if not path.is_file():
            raise ConfigurationError(f"Config file not found: {path}")
        values = {k.strip().lower(): v for k, v in dotenv_values(path).items() if v is not None}
        try:
            return cls.model_validate(values)
        except ValidationError as e:
            raise ConfigurationError(str(e)) from e


@dataclass
class SyntheticCorpus:
    """A generated corpus with its ground truth.

    Attributes:
        triples: Train-tagged and test-only triples
        samples: Label -> untagged samples
        embeddings: Token table covering every modifier token
        displacements: Modifier -> RGB displacement
    """

    triples: List[Triple]
    samples: Dict[str, LabelSamples]
    embeddings: EmbeddingTable
    displacements: Dict[str, FloatArray] = field(default_factory=dict)


def _modifier_name(j: int) -> str:
    return f"more mod{j:02d}" if j % 2 else f"mod{j:02d}"


def generate_synthetic(config: SyntheticConfig) -> SyntheticCorpus:
    """Generate a corpus where every modifier is a fixed RGB displacement.

    Target vectors are the reference vectors shifted by the modifier's
    displacement plus Gaussian noise, so with zero noise every target mean
    equals its reference mean plus the displacement.
    """
    rng = rng_for(config.seed, Stream.SYNTHETIC)
    refs = [f"ref{i:02d}" for i in range(config.num_refs)]
    mods = [_modifier_name(j) for j in range(config.num_mods)]

    centers = rng.uniform(64.0, 192.0, size=(config.num_refs, 3))
    directions = rng.normal(size=(config.num_mods, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    norms = rng.uniform(config.min_displacement, config.max_displacement, size=config.num_mods)
    displacements = {m: directions[j] * norms[j] for j, m in enumerate(mods)}

    tokens = sorted({tok for m in mods for tok in m.split()})
    raw = rng.normal(size=(len(tokens), config.embedding_dim))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    embeddings = EmbeddingTable.from_dict(config.embedding_dim, dict(zip(tokens, raw)))

    samples: Dict[str, LabelSamples] = {}
    ref_vectors: Dict[str, FloatArray] = {}
    shape = (config.vectors_per_label, 3)
    for i, ref in enumerate(refs):
        vectors = np.clip(centers[i] + rng.normal(0.0, config.spread_sd, size=shape), 0.0, RGB_MAX)
        ref_vectors[ref] = vectors
        samples[ref] = LabelSamples(ref, vectors)

    seen_refs = config.num_refs - config.held_out_refs
    seen_mods = config.num_mods - config.held_out_mods
    held_pairs = {(refs[d], mods[d]) for d in range(config.held_out_pairs)}

    triples: List[Triple] = []
    for i, ref in enumerate(refs):
        for j, mod in enumerate(mods):
            target = f"{mod} {ref}"
            noise = rng.normal(0.0, config.noise_sd, size=shape) if config.noise_sd else 0.0
            vectors = np.clip(ref_vectors[ref] + displacements[mod] + noise, 0.0, RGB_MAX)
            samples[target] = LabelSamples(target, vectors)
            trained = i < seen_refs and j < seen_mods and (ref, mod) not in held_pairs
            tag = TripleTag.TRAIN if trained else TripleTag.TEST
            triples.append(Triple(ref, mod, target, tag))

    logger.info(
        "Synthetic corpus generated",
        triples=len(triples),
        labels=len(samples),
        tokens=len(tokens),
        seed=config.seed,
    )
    return SyntheticCorpus(triples, samples, embeddings, displacements)
