"""Pytest configuration and fixtures.

Provides shared fixtures for all test types (unit, integration, e2e).
"""

from pathlib import Path
from typing import Dict

import numpy as np
import pytest

from pragmatic_colors.application.dataset import (
    SyntheticConfig,
    SyntheticCorpus,
    generate_synthetic,
    partition_all,
)
from pragmatic_colors.application.net import SpeakerNet
from pragmatic_colors.domain.models import LabelSamples, Triple, TripleTag
from pragmatic_colors.infrastructure.data_files import write_samples, write_triples
from pragmatic_colors.infrastructure.embeddings import EmbeddingTable, write_embeddings


# ============================================================================
# Embedding Fixtures
# ============================================================================


@pytest.fixture
def tiny_table() -> EmbeddingTable:
    """Two-dimensional embeddings for a handful of modifier tokens."""
    return EmbeddingTable.from_dict(
        2,
        {
            "lighter": np.array([1.0, 0.0]),
            "darker": np.array([-1.0, 0.0]),
            "more": np.array([0.0, 1.0]),
            "vibrant": np.array([0.6, 0.8]),
        },
    )


# ============================================================================
# Sample Fixtures
# ============================================================================


def constant_label(label: str, rgb, count: int = 10) -> LabelSamples:
    """Label whose every vector is the same color."""
    return LabelSamples(label, np.tile(np.asarray(rgb, dtype=np.float64), (count, 1)))


@pytest.fixture
def constant_samples() -> Dict[str, LabelSamples]:
    """Partitioned single-color labels: a reference and its lighter target."""
    samples = {
        "grey": constant_label("grey", [100.0, 100.0, 100.0]),
        "lighter grey": constant_label("lighter grey", [140.0, 140.0, 140.0]),
        "darker grey": constant_label("darker grey", [60.0, 60.0, 60.0]),
    }
    return partition_all(samples, (0.6, 0.2, 0.2), seed=0)


@pytest.fixture
def constant_triples():
    return [
        Triple("grey", "lighter", "lighter grey", TripleTag.TRAIN),
        Triple("grey", "darker", "darker grey", TripleTag.TRAIN),
    ]


# ============================================================================
# Network Fixtures
# ============================================================================


@pytest.fixture
def random_net() -> SpeakerNet:
    """Small randomly initialized network over 2-d embeddings."""
    return SpeakerNet.initialize(2, 5, np.random.default_rng(7))


def constant_net(output_rgb, embedding_dim: int = 2, hidden_size: int = 3) -> SpeakerNet:
    """Network that ignores its input and always predicts ``output_rgb``."""
    net = SpeakerNet.zeros(embedding_dim, hidden_size)
    net.b2[:] = np.asarray(output_rgb, dtype=np.float64) / 255.0
    return net


# ============================================================================
# Synthetic Corpus Fixtures
# ============================================================================


SMALL_SYNTH = SyntheticConfig(
    num_refs=4,
    num_mods=4,
    vectors_per_label=10,
    embedding_dim=4,
    spread_sd=2.0,
    seed=3,
)


@pytest.fixture(scope="session")
def small_corpus() -> SyntheticCorpus:
    """4 x 4 synthetic corpus covering all five splits."""
    return generate_synthetic(SMALL_SYNTH)


@pytest.fixture
def corpus_files(tmp_path: Path, small_corpus: SyntheticCorpus) -> Dict[str, Path]:
    """The small corpus written to disk in the CLI file formats."""
    paths = {
        "triples": tmp_path / "triples.csv",
        "samples": tmp_path / "samples.csv",
        "embeddings": tmp_path / "embeddings.txt",
    }
    write_triples(paths["triples"], small_corpus.triples)
    write_samples(paths["samples"], small_corpus.samples)
    write_embeddings(paths["embeddings"], small_corpus.embeddings)
    return paths
