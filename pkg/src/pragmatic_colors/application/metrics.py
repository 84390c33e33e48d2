"""Evaluation metrics for predicted target colors."""

from typing import Tuple

import numpy as np

from pragmatic_colors.domain.models import FloatArray
from pragmatic_colors.infrastructure.colorspace import ArrayLike, rgb_delta_e

_NORM_EPS = 1e-12


def cosine_scores(c_t: ArrayLike, c_r: ArrayLike, pred: ArrayLike) -> Tuple[FloatArray, FloatArray]:
    """Cosine similarity of (c_t - c_r) and (pred - c_r), row-wise.

    Returns:
        (scores, degenerate) where ``degenerate`` flags rows in which either
        difference vector has zero norm; those rows score 0
    """
    u = np.asarray(c_t, dtype=np.float64) - np.asarray(c_r, dtype=np.float64)
    v = np.asarray(pred, dtype=np.float64) - np.asarray(c_r, dtype=np.float64)
    denom = np.linalg.norm(u, axis=-1) * np.linalg.norm(v, axis=-1)
    degenerate = ~(denom > _NORM_EPS)
    safe = np.where(degenerate, 1.0, denom)
    scores = np.where(degenerate, 0.0, np.sum(u * v, axis=-1) / safe)
    return np.clip(scores, -1.0, 1.0), degenerate


def eval_cosine(c_t: ArrayLike, c_r: ArrayLike, pred: ArrayLike) -> float:
    """Cosine similarity between the gold and predicted modification vectors."""
    scores, _ = cosine_scores(c_t, c_r, pred)
    return float(scores)


def eval_delta_e(c_t: ArrayLike, pred: ArrayLike) -> float:
    """CIEDE2000 distance between gold and predicted target colors."""
    return float(rgb_delta_e(c_t, pred))
