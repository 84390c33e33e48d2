"""Two-affine-layer color network with analytic gradients and its trainer.

    o1   = act(W1 [c_in, m] + b1)
    pred = W2 [o1, c_in] + b2

The same architecture serves as the speaker ((c_r, m) -> c_t) and the
listener ((c_t, m) -> c_r). Colors enter the network scaled to [0, 1];
``forward`` takes and returns the 0-255 scale and never clamps.
"""

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, List, Literal, Mapping, Optional, Tuple, Union

import numpy as np

from pragmatic_colors.application.dataset import DatasetView, mean_rgb, sample_reference
from pragmatic_colors.application.events import DomainEvent, EventBus, Events
from pragmatic_colors.application.random_streams import Stream, rng_for
from pragmatic_colors.config import Settings
from pragmatic_colors.domain.exceptions import NonFiniteLossError, ShapeMismatchError
from pragmatic_colors.domain.models import RGB_MAX, EmbeddedModifier, FloatArray
from pragmatic_colors.infrastructure.embeddings import (
    EmbeddingTable,
    OovPolicy,
    embed_modifier,
)
from pragmatic_colors.infrastructure.logger import get_logger

logger = get_logger(__name__)

Activation = Literal["identity", "relu"]
COLOR_DIM = 3
_NORM_EPS = 1e-12


class Direction(str, Enum):
    """Which way a network maps colors."""

    SPEAKER = "speaker"  # (c_r, m) -> c_t
    LISTENER = "listener"  # (c_t, m) -> c_r


PARAM_NAMES = ("W1", "b1", "W2", "b2")


@dataclass(eq=False)
class SpeakerNet:
    """Parameters of the two-layer network.

    Attributes:
        W1: (hidden, 3 + 2*dim) first-layer weights
        b1: (hidden,) first-layer bias
        W2: (3, hidden + 3) output weights over [o1, c_in]
        b2: (3,) output bias
        activation: Hidden activation, identity by default
    """

    W1: FloatArray  # noqa: N815
    b1: FloatArray
    W2: FloatArray  # noqa: N815
    b2: FloatArray
    activation: Activation = "identity"

    def __post_init__(self) -> None:
        hidden, width = self.W1.shape
        if width <= COLOR_DIM or (width - COLOR_DIM) % 2:
            raise ShapeMismatchError("W1 input width must be 3 + 2*dim", COLOR_DIM + 2, width)
        if self.b1.shape != (hidden,):
            raise ShapeMismatchError("b1 length", hidden, int(self.b1.size))
        if self.W2.shape != (COLOR_DIM, hidden + COLOR_DIM):
            raise ShapeMismatchError("W2 input width", hidden + COLOR_DIM, int(self.W2.shape[1]))
        if self.b2.shape != (COLOR_DIM,):
            raise ShapeMismatchError("b2 length", COLOR_DIM, int(self.b2.size))

    @property
    def hidden_size(self) -> int:
        return int(self.W1.shape[0])

    @property
    def embedding_dim(self) -> int:
        return int((self.W1.shape[1] - COLOR_DIM) // 2)

    @property
    def modifier_width(self) -> int:
        return 2 * self.embedding_dim

    @classmethod
    def initialize(
        cls,
        embedding_dim: int,
        hidden_size: int,
        rng: np.random.Generator,
        activation: Activation = "identity",
    ) -> "SpeakerNet":
        """Glorot-uniform weights, zero biases."""
        fan_in1 = COLOR_DIM + 2 * embedding_dim
        fan_in2 = hidden_size + COLOR_DIM
        lim1 = np.sqrt(6.0 / (fan_in1 + hidden_size))
        lim2 = np.sqrt(6.0 / (fan_in2 + COLOR_DIM))
        return cls(
            W1=rng.uniform(-lim1, lim1, size=(hidden_size, fan_in1)),
            b1=np.zeros(hidden_size),
            W2=rng.uniform(-lim2, lim2, size=(COLOR_DIM, fan_in2)),
            b2=np.zeros(COLOR_DIM),
            activation=activation,
        )

    @classmethod
    def zeros(
        cls, embedding_dim: int, hidden_size: int, activation: Activation = "identity"
    ) -> "SpeakerNet":
        return cls(
            W1=np.zeros((hidden_size, COLOR_DIM + 2 * embedding_dim)),
            b1=np.zeros(hidden_size),
            W2=np.zeros((COLOR_DIM, hidden_size + COLOR_DIM)),
            b2=np.zeros(COLOR_DIM),
            activation=activation,
        )

    def parameters(self) -> Dict[str, FloatArray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}

    def copy(self) -> "SpeakerNet":
        return SpeakerNet(
            **{k: v.copy() for k, v in self.parameters().items()}, activation=self.activation
        )

    def freeze(self) -> "SpeakerNet":
        """Mark parameter arrays read-only so the net can be shared."""
        for arr in self.parameters().values():
            arr.setflags(write=False)
        return self

    def same_parameters(self, other: "SpeakerNet") -> bool:
        """Bitwise equality of shapes, values and activation."""
        return self.activation == other.activation and all(
            a.shape == b.shape and a.tobytes() == b.tobytes()
            for a, b in zip(self.parameters().values(), other.parameters().values())
        )


def count_params(net: SpeakerNet) -> int:
    """Number of trainable scalars in the network."""
    return int(sum(p.size for p in net.parameters().values()))


def expected_param_count(embedding_dim: int, hidden_size: int) -> int:
    """hidden*(3+2*dim) + hidden + 3*(hidden+3) + 3."""
    return hidden_size * (COLOR_DIM + 2 * embedding_dim) + hidden_size + 3 * (hidden_size + 3) + 3


# ============================================================================
# Forward / backward
# ============================================================================


def _as_modifier_block(net: SpeakerNet, m: Union[EmbeddedModifier, FloatArray], rows: int) -> FloatArray:
    vec = m.vector if isinstance(m, EmbeddedModifier) else np.asarray(m, dtype=np.float64)
    if vec.shape[-1] != net.modifier_width:
        raise ShapeMismatchError("modifier width", net.modifier_width, int(vec.shape[-1]))
    if vec.ndim == 1:
        return np.broadcast_to(vec, (rows, vec.shape[0]))
    if vec.shape[0] != rows:
        raise ShapeMismatchError("modifier rows", rows, int(vec.shape[0]))
    return vec


def _forward_unit(
    net: SpeakerNet, colors: FloatArray, m: FloatArray
) -> Tuple[FloatArray, Tuple[FloatArray, FloatArray, FloatArray]]:
    """Forward pass on unit-scale colors (N, 3); returns outputs and the cache."""
    x = np.concatenate([colors, m], axis=1)
    z1 = x @ net.W1.T + net.b1
    o1 = np.maximum(z1, 0.0) if net.activation == "relu" else z1
    h = np.concatenate([o1, colors], axis=1)
    return h @ net.W2.T + net.b2, (x, z1, h)


def forward(net: SpeakerNet, c_in: FloatArray, m: Union[EmbeddedModifier, FloatArray]) -> FloatArray:
    """Predict output colors on the 0-255 scale.

    Args:
        net: Network
        c_in: Input color(s), shape (3,) or (N, 3), 0-255 scale
        m: Embedded modifier(s), shape (2*dim,) or (N, 2*dim)

    Returns:
        Predictions with the leading shape of ``c_in``; not clamped

    Raises:
        ShapeMismatchError: If the modifier width does not match the net
    """
    colors = np.asarray(c_in, dtype=np.float64)
    single = colors.ndim == 1
    colors2d = colors.reshape(-1, COLOR_DIM) / RGB_MAX
    out, _ = _forward_unit(net, colors2d, _as_modifier_block(net, m, colors2d.shape[0]))
    out = out * RGB_MAX
    return out[0] if single else out


def loss(
    c_t: FloatArray,
    c_r: FloatArray,
    pred: FloatArray,
    weights: Tuple[float, float] = (1.0, 1.0),
) -> Tuple[float, FloatArray]:
    """Dual objective and its gradient with respect to ``pred``.

    w_cos * (1 - cos(c_t - c_r, pred - c_r)) + w_mse * mean((pred - c_t)^2),
    averaged over rows when inputs are (N, 3). The cosine term is 0, with
    zero gradient, when either difference vector has zero norm.

    Args:
        c_t: Target color(s)
        c_r: Anchor color(s) the modification is measured from
        pred: Predicted color(s)
        weights: (w_cos, w_mse)

    Returns:
        (loss value, gradient shaped like ``pred``)
    """
    w_cos, w_mse = weights
    t = np.atleast_2d(np.asarray(c_t, dtype=np.float64))
    r = np.atleast_2d(np.asarray(c_r, dtype=np.float64))
    p = np.atleast_2d(np.asarray(pred, dtype=np.float64))
    rows = p.shape[0]

    u = t - r
    v = p - r
    nu = np.linalg.norm(u, axis=1)
    nv = np.linalg.norm(v, axis=1)
    ok = (nu > _NORM_EPS) & (nv > _NORM_EPS)
    nu_s = np.where(ok, nu, 1.0)[:, None]
    nv_s = np.where(ok, nv, 1.0)[:, None]
    cos = np.where(ok, np.sum(u * v, axis=1) / (nu_s[:, 0] * nv_s[:, 0]), 1.0)
    cos_grad = -(u / (nu_s * nv_s) - cos[:, None] * v / nv_s**2)
    cos_grad = np.where(ok[:, None], cos_grad, 0.0)

    diff = p - t
    per_row = w_cos * (1.0 - cos) + w_mse * np.mean(diff**2, axis=1)
    grad = (w_cos * cos_grad + w_mse * 2.0 * diff / COLOR_DIM) / rows

    value = float(np.mean(per_row))
    grad = grad.reshape(np.shape(pred))
    return value, grad


def loss_and_gradients(
    net: SpeakerNet,
    colors: FloatArray,
    m: FloatArray,
    targets: FloatArray,
    weights: Tuple[float, float] = (1.0, 1.0),
) -> Tuple[float, Dict[str, FloatArray]]:
    """Batch loss and parameter gradients on unit-scale colors.

    The cosine term is anchored at the input color, so for the speaker it
    compares (c_t - c_r) with (pred - c_r) and for the listener
    (c_r - c_t) with (pred - c_t).

    Args:
        net: Network
        colors: Input colors (N, 3) in [0, 1]
        m: Modifier block (N, 2*dim)
        targets: Target colors (N, 3) in [0, 1]
        weights: (w_cos, w_mse)

    Returns:
        (mean loss, gradients keyed like ``SpeakerNet.parameters()``)
    """
    pred, (x, z1, h) = _forward_unit(net, colors, m)
    value, d_pred = loss(targets, colors, pred, weights)

    d_w2 = d_pred.T @ h
    d_b2 = d_pred.sum(axis=0)
    d_o1 = d_pred @ net.W2[:, : net.hidden_size]
    d_z1 = d_o1 * (z1 > 0.0) if net.activation == "relu" else d_o1
    d_w1 = d_z1.T @ x
    d_b1 = d_z1.sum(axis=0)
    return value, {"W1": d_w1, "b1": d_b1, "W2": d_w2, "b2": d_b2}


# ============================================================================
# Optimizers
# ============================================================================


class Sgd:
    """Plain gradient descent."""

    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, params: Mapping[str, FloatArray], grads: Mapping[str, FloatArray]) -> None:
        for name, p in params.items():
            p -= self.learning_rate * grads[name]


class Adam:
    """Adam with bias correction."""

    def __init__(
        self,
        params: Mapping[str, FloatArray],
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._m = {k: np.zeros_like(v) for k, v in params.items()}
        self._v = {k: np.zeros_like(v) for k, v in params.items()}
        self._t = 0

    def step(self, params: Mapping[str, FloatArray], grads: Mapping[str, FloatArray]) -> None:
        self._t += 1
        c1 = 1.0 - self.beta1**self._t
        c2 = 1.0 - self.beta2**self._t
        for name, p in params.items():
            g = grads[name]
            m = self._m[name]
            v = self._v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.eps)


# ============================================================================
# Training
# ============================================================================


@dataclass(frozen=True)
class TrainConfig:
    """Training hyper-parameters.

    Attributes:
        epochs: Passes over the training examples
        learning_rate: Optimizer step size
        batch_size: Examples per update; 0 means full batch
        seed: Seed for initialization, reference sampling and shuffling
        loss_weights: (w_cos, w_mse)
        optimizer: ``adam`` or ``sgd``
        activation: Hidden activation
        hidden_size: Hidden layer width
        samples_per_triple: Reference samples drawn per training triple
        k_draws: Draws averaged into each reference sample
        oov_policy: Handling of modifier tokens without embeddings
    """

    epochs: int = 500
    learning_rate: float = 1e-3
    batch_size: int = 0
    seed: int = 0
    loss_weights: Tuple[float, float] = (1.0, 1.0)
    optimizer: Literal["adam", "sgd"] = "adam"
    activation: Activation = "identity"
    hidden_size: int = 30
    samples_per_triple: int = 10
    k_draws: int = 100
    oov_policy: OovPolicy = "zero"

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 0:
            raise ValueError("batch_size must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        w_cos, w_mse = self.loss_weights
        if w_cos < 0 or w_mse < 0 or w_cos + w_mse <= 0:
            raise ValueError("loss weights must be non-negative with a positive sum")
        if self.hidden_size < 1 or self.samples_per_triple < 1 or self.k_draws < 1:
            raise ValueError("hidden_size, samples_per_triple and k_draws must be >= 1")

    @classmethod
    def from_settings(cls, settings: Settings, seed: int) -> "TrainConfig":
        return cls(
            epochs=settings.epochs,
            learning_rate=settings.learning_rate,
            batch_size=settings.batch_size,
            seed=seed,
            loss_weights=(settings.loss_weight_cosine, settings.loss_weight_mse),
            optimizer=settings.optimizer,
            activation=settings.activation,
            hidden_size=settings.hidden_size,
            samples_per_triple=settings.samples_per_triple,
            k_draws=settings.k_draws,
            oov_policy=settings.oov_policy,
        )

    def to_dict(self) -> Dict[str, object]:
        d = asdict(self)
        d["loss_weights"] = list(self.loss_weights)
        return d


@dataclass
class TrainResult:
    """A trained network and its per-epoch mean training loss."""

    net: SpeakerNet
    direction: Direction
    config: TrainConfig
    loss_trace: List[float] = field(default_factory=list)


def build_examples(
    view: DatasetView,
    table: EmbeddingTable,
    direction: Direction,
    config: TrainConfig,
    rng: np.random.Generator,
) -> Tuple[FloatArray, FloatArray, FloatArray]:
    """Assemble (inputs, modifiers, targets) on the 0-255 scale.

    Each triple contributes ``samples_per_triple`` rows. For the speaker an
    input is a reference sample (mean of ``k_draws`` draws) and the target is
    the target label's mean; the listener reverses the roles.

    Raises:
        UnknownLabelError: If a triple names a label without samples
    """
    inputs: List[FloatArray] = []
    modifiers: List[FloatArray] = []
    targets: List[FloatArray] = []
    embedded: Dict[str, EmbeddedModifier] = {}
    for t in view.triples:
        ref, tgt = view.label_samples(t.ref_label), view.label_samples(t.target_label)
        src, dst = (ref, tgt) if direction is Direction.SPEAKER else (tgt, ref)
        if t.modifier not in embedded:
            embedded[t.modifier] = embed_modifier(table, t.modifier, config.oov_policy)
        n = config.samples_per_triple
        inputs.append(sample_reference(src, view.partition, n, config.k_draws, rng))
        targets.append(np.tile(mean_rgb(dst, view.partition), (n, 1)))
        modifiers.append(np.tile(embedded[t.modifier].vector, (n, 1)))
    return np.vstack(inputs), np.vstack(modifiers), np.vstack(targets)


def train(
    view: DatasetView,
    table: EmbeddingTable,
    direction: Direction,
    config: TrainConfig,
    event_bus: Optional[EventBus] = None,
) -> TrainResult:
    """Train a speaker or listener network.

    Deterministic for a given config seed.

    Args:
        view: Training triples and samples
        table: Embedding table
        direction: Speaker or listener mapping
        config: Hyper-parameters
        event_bus: Optional bus receiving progress events

    Returns:
        Frozen trained net with its loss trace

    Raises:
        ValueError: If the view has no triples
        NonFiniteLossError: If a batch loss is NaN or infinite
    """
    if not view.triples:
        raise ValueError("training view has no triples")

    speaker = direction is Direction.SPEAKER
    init_rng = rng_for(config.seed, Stream.SPEAKER_INIT if speaker else Stream.LISTENER_INIT)
    data_rng = rng_for(config.seed, Stream.SPEAKER_DATA if speaker else Stream.LISTENER_DATA)

    c_in, mods, c_out = build_examples(view, table, direction, config, data_rng)
    colors = c_in / RGB_MAX
    targets = c_out / RGB_MAX
    n_rows = colors.shape[0]
    batch = config.batch_size or n_rows

    net = SpeakerNet.initialize(table.dim, config.hidden_size, init_rng, config.activation)
    params = net.parameters()
    optimizer: Union[Adam, Sgd] = (
        Adam(params, config.learning_rate)
        if config.optimizer == "adam"
        else Sgd(config.learning_rate)
    )

    log = logger.bind(direction=direction.value, seed=config.seed)
    log.info("Training started", examples=n_rows, epochs=config.epochs, dim=table.dim)
    if event_bus:
        event_bus.emit(
            DomainEvent(Events.TRAINING_STARTED, {"direction": direction.value, "examples": n_rows})
        )

    trace: List[float] = []
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, config.epochs + 1):
            order = data_rng.permutation(n_rows) if batch < n_rows else np.arange(n_rows)
            total = 0.0
            for b, start in enumerate(range(0, n_rows, batch)):
                idx = order[start : start + batch]
                value, grads = loss_and_gradients(
                    net, colors[idx], mods[idx], targets[idx], config.loss_weights
                )
                if not np.isfinite(value):
                    log.error("Non-finite loss", epoch=epoch, batch=b)
                    raise NonFiniteLossError(epoch, b, value)
                total += value * len(idx)
                optimizer.step(params, grads)
            trace.append(total / n_rows)
            if event_bus:
                event_bus.emit(
                    DomainEvent(
                        Events.EPOCH_COMPLETED,
                        {
                            "direction": direction.value,
                            "epoch": epoch,
                            "epochs": config.epochs,
                            "loss": trace[-1],
                        },
                    )
                )

    log.info("Training completed", final_loss=trace[-1])
    if event_bus:
        event_bus.emit(
            DomainEvent(Events.TRAINING_COMPLETED, {"direction": direction.value, "loss": trace[-1]})
        )
    return TrainResult(net=net.freeze(), direction=direction, config=config, loss_trace=trace)
