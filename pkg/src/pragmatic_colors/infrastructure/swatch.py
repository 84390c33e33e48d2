"""Swatch rendering: colors as adjacent vertical bars, left to right.

PPM output is binary P6 written through Pillow; SVG output is plain text
with integer geometry, so both are byte-stable for the same inputs.
"""

import re
from pathlib import Path
from typing import List, Literal, Sequence

import numpy as np
from PIL import Image

from pragmatic_colors.domain.exceptions import InvalidColorError
from pragmatic_colors.domain.models import Rgb
from pragmatic_colors.infrastructure.logger import get_logger

logger = get_logger(__name__)

SwatchFormat = Literal["ppm", "svg"]

_HEX = re.compile(r"^#?([0-9a-fA-F]{6})$")


def parse_color(text: str) -> Rgb:
    """Parse ``#rrggbb``, ``rrggbb`` or ``r,g,b`` (0-255, decimals allowed).

    Raises:
        InvalidColorError: If the text matches neither form or a channel is
            outside [0, 255]
    """
    s = text.strip()
    match = _HEX.match(s)
    if match:
        h = match.group(1)
        return Rgb(*(float(int(h[i : i + 2], 16)) for i in (0, 2, 4)))
    parts = s.split(",")
    if len(parts) != 3:
        raise InvalidColorError(text)
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise InvalidColorError(text) from None
    if not all(np.isfinite(v) and 0.0 <= v <= 255.0 for v in values):
        raise InvalidColorError(text)
    return Rgb(*values)


def _bytes(color: Rgb) -> List[int]:
    return [int(np.clip(round(v), 0, 255)) for v in (color.r, color.g, color.b)]


def render_pixels(colors: Sequence[Rgb], bar_width: int = 64, height: int = 64) -> np.ndarray:
    """Pixel array (height, bar_width * len(colors), 3) of uint8."""
    if not colors:
        raise ValueError("at least one color is required")
    if bar_width < 1 or height < 1:
        raise ValueError("bar_width and height must be positive")
    row = np.repeat(np.array([_bytes(c) for c in colors], dtype=np.uint8), bar_width, axis=0)
    return np.ascontiguousarray(np.broadcast_to(row, (height, row.shape[0], 3)))


def write_ppm(path: Path, colors: Sequence[Rgb], bar_width: int = 64, height: int = 64) -> None:
    image = Image.fromarray(render_pixels(colors, bar_width, height))
    image.save(path, format="PPM")


def svg_text(colors: Sequence[Rgb], bar_width: int = 64, height: int = 64) -> str:
    if not colors:
        raise ValueError("at least one color is required")
    width = bar_width * len(colors)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    for i, c in enumerate(colors):
        r, g, b = _bytes(c)
        lines.append(
            f'  <rect x="{i * bar_width}" y="0" width="{bar_width}" height="{height}" '
            f'fill="#{r:02x}{g:02x}{b:02x}"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_swatch(
    path: Path,
    colors: Sequence[Rgb],
    fmt: SwatchFormat = "ppm",
    bar_width: int = 64,
    height: int = 64,
) -> None:
    """Render ``colors`` to ``path`` in the requested format."""
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "svg":
        path.write_text(svg_text(colors, bar_width, height), encoding="utf-8")
    else:
        write_ppm(path, colors, bar_width, height)
    logger.info("Swatch written", path=str(path), colors=len(colors), format=fmt)
