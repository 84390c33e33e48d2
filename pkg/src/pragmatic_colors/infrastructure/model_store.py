"""Model artifact persistence.

Two formats, chosen by suffix:

* ``.npz``  parameter arrays plus a JSON ``meta`` string; loads bitwise-exact
* ``.json`` parameters as nested lists of Python floats; exact via float repr
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from pragmatic_colors.application.net import (
    PARAM_NAMES,
    Direction,
    SpeakerNet,
    TrainConfig,
    TrainResult,
)
from pragmatic_colors.domain.exceptions import ArtifactError, PragmaticColorsError
from pragmatic_colors.infrastructure.logger import get_logger

logger = get_logger(__name__)

FORMAT_VERSION = 1
SUFFIXES = (".npz", ".json")


@dataclass
class ModelArtifact:
    """A trained net with the metadata needed to reuse it.

    Attributes:
        net: Network parameters
        direction: Speaker or listener
        config: Training configuration it was trained with
        loss_trace: Per-epoch training loss
    """

    net: SpeakerNet
    direction: Direction
    config: Optional[TrainConfig] = None
    loss_trace: Optional[List[float]] = None

    @classmethod
    def from_result(cls, result: TrainResult) -> "ModelArtifact":
        return cls(result.net, result.direction, result.config, list(result.loss_trace))

    def meta(self) -> Dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "direction": self.direction.value,
            "activation": self.net.activation,
            "embedding_dim": self.net.embedding_dim,
            "hidden_size": self.net.hidden_size,
            "config": self.config.to_dict() if self.config else None,
            "loss_trace": self.loss_trace,
        }


def _check_suffix(path: Path) -> str:
    if path.suffix not in SUFFIXES:
        raise ArtifactError(f"Unsupported model format {path.suffix!r}; use .npz or .json")
    return path.suffix


def save_model(path: Path, artifact: ModelArtifact) -> None:
    """Write an artifact; parent directories are created."""
    suffix = _check_suffix(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    params = artifact.net.parameters()
    meta = json.dumps(artifact.meta(), sort_keys=True)
    if suffix == ".npz":
        with path.open("wb") as f:
            np.savez(f, meta=np.array(meta), **params)
    else:
        payload = {"meta": json.loads(meta), "params": {k: v.tolist() for k, v in params.items()}}
        path.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
    logger.info("Model saved", path=str(path), direction=artifact.direction.value)


def _config_from(meta: Dict[str, Any]) -> Optional[TrainConfig]:
    raw = meta.get("config")
    if raw is None:
        return None
    raw = dict(raw)
    raw["loss_weights"] = tuple(raw["loss_weights"])
    return TrainConfig(**raw)


def load_model(path: Path) -> ModelArtifact:
    """Read an artifact written by ``save_model``.

    Raises:
        ArtifactError: If the file is missing, unreadable, of another
            format version or holds inconsistent arrays
    """
    suffix = _check_suffix(path)
    if not path.is_file():
        raise ArtifactError(f"Model file not found: {path}")
    try:
        if suffix == ".npz":
            with np.load(path, allow_pickle=False) as data:
                meta = json.loads(str(data["meta"]))
                params = {name: np.array(data[name], dtype=np.float64) for name in PARAM_NAMES}
        else:
            payload = json.loads(path.read_text(encoding="utf-8"))
            meta = payload["meta"]
            params = {
                name: np.array(payload["params"][name], dtype=np.float64) for name in PARAM_NAMES
            }
    except (OSError, KeyError, ValueError) as e:
        raise ArtifactError(f"Cannot read model {path}: {e}") from e

    if meta.get("format_version") != FORMAT_VERSION:
        raise ArtifactError(f"Unsupported artifact version {meta.get('format_version')!r}")
    try:
        net = SpeakerNet(**params, activation=meta["activation"])
        artifact = ModelArtifact(
            net=net.freeze(),
            direction=Direction(meta["direction"]),
            config=_config_from(meta),
            loss_trace=meta.get("loss_trace"),
        )
    except PragmaticColorsError as e:
        raise ArtifactError(f"Inconsistent model {path}: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise ArtifactError(f"Invalid model metadata in {path}: {e}") from e
    logger.debug("Model loaded", path=str(path), direction=artifact.direction.value)
    return artifact
