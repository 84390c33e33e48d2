"""Color-space conversions and the CIEDE2000 color difference.

sRGB (D65, standard transfer curve) -> CIE XYZ -> CIELAB, and Delta-E 2000,
are delegated to colour-science. Inputs are clamped to [0, 255] before
conversion. All functions accept single colors or stacked (..., 3) arrays
and are pure.
"""

from typing import Any, Union

import colour
import numpy as np

from pragmatic_colors.domain.models import RGB_MAX, FloatArray, Lab, Rgb

# Matrix derived from the primaries so that white maps exactly onto D65.
SRGB = colour.RGB_COLOURSPACES["sRGB"].copy()
SRGB.use_derived_matrix_RGB_to_XYZ = True

ArrayLike = Union[FloatArray, Any]


def srgb_to_lab_array(rgb: ArrayLike) -> FloatArray:
    """Convert sRGB colors in [0, 255] to CIELAB.

    Args:
        rgb: Array of shape (..., 3); out-of-range channels are clamped

    Returns:
        Array of shape (..., 3) with L in [0, 100]
    """
    arr = np.clip(np.asarray(rgb, dtype=np.float64), 0.0, RGB_MAX) / RGB_MAX
    xyz = colour.RGB_to_XYZ(arr, SRGB, apply_cctf_decoding=True)
    return np.asarray(colour.XYZ_to_Lab(xyz, SRGB.whitepoint), dtype=np.float64)


def delta_e_2000_array(x: ArrayLike, y: ArrayLike) -> FloatArray:
    """CIEDE2000 difference between CIELAB colors, broadcasting over (..., 3)."""
    return np.asarray(
        colour.difference.delta_E_CIE2000(
            np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
        ),
        dtype=np.float64,
    )


def srgb_to_lab(c: Rgb) -> Lab:
    """Convert one sRGB color to CIELAB."""
    L, a, b = srgb_to_lab_array(c.as_array())  # noqa: N806
    return Lab(float(L), float(a), float(b))


def delta_e_2000(x: Lab, y: Lab) -> float:
    """CIEDE2000 difference between two CIELAB colors."""
    return float(delta_e_2000_array(x.as_array(), y.as_array()))


def rgb_delta_e(x: ArrayLike, y: ArrayLike) -> FloatArray:
    """Delta-E 2000 between sRGB colors given on the 0-255 scale."""
    return delta_e_2000_array(srgb_to_lab_array(x), srgb_to_lab_array(y))


def cosine_distance_rgb(x: ArrayLike, y: ArrayLike) -> FloatArray:
    """One minus the cosine similarity of RGB vectors measured from the origin.

    Pairs where either vector is zero have distance 0.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    nx = np.linalg.norm(xa, axis=-1)
    ny = np.linalg.norm(ya, axis=-1)
    denom = nx * ny
    dot = np.sum(xa * ya, axis=-1)
    safe = np.where(denom > 0, denom, 1.0)
    return np.where(denom > 0, 1.0 - dot / safe, 0.0)
