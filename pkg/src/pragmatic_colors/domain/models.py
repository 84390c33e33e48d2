"""Domain models for pragmatic-colors.

Colors travel through the numeric code as numpy arrays; the dataclasses
here are the typed forms used at module boundaries, in files and in
reports.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

RGB_MAX = 255.0


class Partition(str, Enum):
    """Which evaluation set a survey RGB vector belongs to."""

    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


class TripleTag(str, Enum):
    """Whether a triple is used for training or only for testing."""

    TRAIN = "train"
    TEST = "test"


class SplitName(str, Enum):
    """Generalization stratum of a test triple."""

    SP = "SP"  # seen pairing
    UP = "UP"  # both seen, pairing unseen
    URC = "URC"  # unseen reference color
    UM = "UM"  # unseen modifier
    FUN = "FUN"  # fully unseen


OVERALL = "OR"


class DistanceMetric(str, Enum):
    """Distance used inside the speaker and listener distributions."""

    DELTA_E_2000_LAB = "delta_e_2000_lab"
    COSINE_RGB = "cosine_rgb"


@dataclass(frozen=True)
class Rgb:
    """An sRGB color with channels in [0, 255].

    Attributes:
        r: Red channel
        g: Green channel
        b: Blue channel
    """

    r: float
    g: float
    b: float

    def __post_init__(self) -> None:
        if not all(np.isfinite(v) for v in (self.r, self.g, self.b)):
            raise ValueError(f"RGB channels must be finite: {self}")

    @classmethod
    def clamped(cls, values: Any) -> "Rgb":
        """Build a color from any 3-vector, clipping channels into [0, 255]."""
        arr = np.clip(np.asarray(values, dtype=np.float64).reshape(3), 0.0, RGB_MAX)
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    def as_array(self) -> FloatArray:
        return np.array([self.r, self.g, self.b], dtype=np.float64)

    def to_hex(self) -> str:
        """Render as ``#rrggbb`` after rounding to the nearest integer."""
        r, g, b = (int(round(v)) for v in (self.r, self.g, self.b))
        return f"#{r:02x}{g:02x}{b:02x}"


@dataclass(frozen=True)
class Lab:
    """A CIELAB color (D65 white point).

    Attributes:
        L: Lightness in [0, 100]
        a: Green-red opponent axis
        b: Blue-yellow opponent axis
    """

    L: float  # noqa: N815
    a: float
    b: float

    def as_array(self) -> FloatArray:
        return np.array([self.L, self.a, self.b], dtype=np.float64)


@dataclass(frozen=True)
class Triple:
    """One dataset unit: (reference label, modifier, target label).

    Attributes:
        ref_label: Reference color label, e.g. ``green``
        modifier: One or two token comparative, e.g. ``more vibrant``
        target_label: Target color label, e.g. ``more vibrant green``
        tag: Training or test-only membership
    """

    ref_label: str
    modifier: str
    target_label: str
    tag: TripleTag = TripleTag.TEST

    def __post_init__(self) -> None:
        for name in ("ref_label", "modifier", "target_label"):
            if not getattr(self, name).strip():
                raise ValueError(f"{name} must be non-empty")
        if len(self.modifier.split()) > 2:
            raise ValueError(f"modifier has more than two tokens: {self.modifier!r}")

    @property
    def pair(self) -> Tuple[str, str]:
        return (self.ref_label, self.modifier)


@dataclass(frozen=True, eq=False)
class LabelSamples:
    """Survey RGB draws for one color label, optionally partition-tagged.

    Attributes:
        label: Color label
        vectors: Array of shape (N, 3), channels in [0, 255]
        tags: One Partition per vector, or None before partitioning
    """

    label: str
    vectors: FloatArray
    tags: Optional[Tuple[Partition, ...]] = None

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[1] != 3:
            raise ValueError(f"vectors for {self.label!r} must have shape (N, 3)")
        if self.tags is not None and len(self.tags) != len(self.vectors):
            raise ValueError(f"tags for {self.label!r} must match vector count")

    def __len__(self) -> int:
        return int(self.vectors.shape[0])

    def vectors_in(self, partition: Optional[Partition]) -> FloatArray:
        """Vectors tagged with ``partition``; all vectors when it is None."""
        if partition is None or self.tags is None:
            return self.vectors
        mask = np.array([t is partition for t in self.tags], dtype=bool)
        return self.vectors[mask]


@dataclass(frozen=True, eq=False)
class EmbeddedModifier:
    """Bigram modifier representation of length 2 x dim.

    Attributes:
        modifier: Normalized modifier text
        vector: Slot 1 then slot 2; slot 2 is zero for one-token modifiers
        missing_tokens: Tokens that had no embedding and were zero-filled
    """

    modifier: str
    vector: FloatArray
    missing_tokens: Tuple[str, ...] = ()


@dataclass(eq=False)
class CandidateSet:
    """Generated target candidates and their scores under S0, L1R and S2R.

    Attributes:
        candidates: Array (n, 3) of predicted target colors, 0-255 scale
        ref_mean: Mean RGB of the reference label (distance anchor)
        s0_logprob: Literal speaker log-probabilities
        reconstructions: Listener reconstructions of the reference, (n, 3)
        l1r_logprob: Reconstructor-based listener log-probabilities
        s2r_logprob: Pragmatic speaker log-probabilities
    """

    candidates: FloatArray
    ref_mean: FloatArray
    s0_logprob: Optional[FloatArray] = None
    reconstructions: Optional[FloatArray] = None
    l1r_logprob: Optional[FloatArray] = None
    s2r_logprob: Optional[FloatArray] = None

    def __len__(self) -> int:
        return int(self.candidates.shape[0])


@dataclass(frozen=True)
class EvalResult:
    """Across-run aggregate of one model's metrics on one split.

    Attributes:
        model: ``literal`` (S0) or ``pragmatic`` (S2R)
        split: SplitName value or ``OR`` for overall
        cosine_mean / cosine_sd: Cosine similarity across runs
        delta_e_mean / delta_e_sd: Delta-E 2000 across runs
        n_triples: Test triples in the split
        n_runs: Number of seeded runs aggregated
    """

    model: str
    split: str
    cosine_mean: float
    cosine_sd: float
    delta_e_mean: float
    delta_e_sd: float
    n_triples: int
    n_runs: int


@dataclass
class RunManifest:
    """Provenance record written next to training and evaluation outputs.

    Attributes:
        command: CLI command that produced the outputs
        config: Settings snapshot
        seeds: Seeds used
        datasets: Input path -> SHA-256 digest
        artifacts: Output path -> SHA-256 digest
        started_at / finished_at: UTC ISO timestamps
    """

    command: str
    config: Dict[str, Any]
    seeds: List[int]
    datasets: Dict[str, str] = field(default_factory=dict)
    artifacts: Dict[str, str] = field(default_factory=dict)
    started_at: str = ""
    finished_at: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "config": self.config,
            "seeds": list(self.seeds),
            "datasets": dict(self.datasets),
            "artifacts": dict(self.artifacts),
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }
