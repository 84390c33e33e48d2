"""Word-vector loading and the bigram modifier representation.

Files use the GloVe text layout, one ``token v1 ... vD`` entry per line,
optionally gzip-compressed (``.gz`` suffix).
"""

import gzip
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import IO, Dict, List, Literal, Mapping, Optional

import numpy as np

from pragmatic_colors.domain.exceptions import (
    EmbeddingFormatError,
    InvalidModifierError,
    OutOfVocabularyError,
)
from pragmatic_colors.domain.models import EmbeddedModifier, FloatArray
from pragmatic_colors.infrastructure.logger import get_logger

logger = get_logger(__name__)

OovPolicy = Literal["zero", "error"]


def normalize_token(token: str) -> str:
    """Lowercase and trim; no stemming."""
    return token.strip().lower()


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Immutable token -> vector map with a uniform dimension.

    Attributes:
        dim: Vector length
        entries: Read-only mapping of normalized token to vector
    """

    dim: int
    entries: Mapping[str, FloatArray]

    def __contains__(self, token: object) -> bool:
        return isinstance(token, str) and normalize_token(token) in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, token: str) -> Optional[FloatArray]:
        return self.entries.get(normalize_token(token))

    @classmethod
    def from_dict(cls, dim: int, vectors: Mapping[str, FloatArray]) -> "EmbeddingTable":
        """Build a table, keeping the first vector seen for each token."""
        entries: Dict[str, FloatArray] = {}
        for token, vec in vectors.items():
            key = normalize_token(token)
            if key in entries:
                continue
            arr = np.array(vec, dtype=np.float64)
            if arr.shape != (dim,) or not np.all(np.isfinite(arr)):
                raise ValueError(f"vector for {token!r} must be {dim} finite values")
            arr.setflags(write=False)
            entries[key] = arr
        return cls(dim=dim, entries=MappingProxyType(entries))


def _open_text(path: Path) -> IO[str]:
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return path.open("r", encoding="utf-8")


def load_embeddings(path: Path, expected_dim: int) -> EmbeddingTable:
    """Load a word-vector text file.

    Args:
        path: Text file, gzip-compressed when the suffix is ``.gz``
        expected_dim: Number of components every vector must have

    Returns:
        Table with duplicate tokens resolved to their first occurrence

    Raises:
        EmbeddingFormatError: On a line with the wrong number of components
            or non-numeric / non-finite values
        OSError: If the file cannot be read
    """
    entries: Dict[str, FloatArray] = {}
    with _open_text(path) as f:
        for line_no, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            token, values = normalize_token(parts[0]), parts[1:]
            if len(values) != expected_dim:
                raise EmbeddingFormatError(
                    f"expected {expected_dim} components, found {len(values)}", line_no
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as e:
                raise EmbeddingFormatError(f"non-numeric component ({e})", line_no) from e
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError("non-finite component", line_no)
            if token in entries:
                continue
            vec.setflags(write=False)
            entries[token] = vec

    logger.info("Embeddings loaded", path=str(path), entries=len(entries), dim=expected_dim)
    return EmbeddingTable(dim=expected_dim, entries=MappingProxyType(entries))


def write_embeddings(path: Path, table: EmbeddingTable) -> None:
    """Write a table in the GloVe text layout, tokens in insertion order."""
    lines: List[str] = []
    for token, vec in table.entries.items():
        lines.append(" ".join([token, *(repr(float(v)) for v in vec)]))
    text = "\n".join(lines) + ("\n" if lines else "")
    if path.suffix == ".gz":
        # no file name or mtime in the header; identical tables give identical bytes
        with path.open("wb") as f, gzip.GzipFile(filename="", fileobj=f, mode="wb", mtime=0) as gz:
            gz.write(text.encode("utf-8"))
    else:
        path.write_text(text, encoding="utf-8")


def embed_modifier(
    table: EmbeddingTable, modifier: str, oov_policy: OovPolicy = "zero"
) -> EmbeddedModifier:
    """Build the 2 x dim bigram vector for a modifier.

    Args:
        table: Embedding table
        modifier: One or two whitespace-separated tokens
        oov_policy: ``zero`` fills unknown tokens with zeros and logs a
            warning; ``error`` raises

    Returns:
        Embedded modifier; one-token modifiers leave slot 2 all-zero

    Raises:
        InvalidModifierError: If the modifier has zero or more than two tokens
        OutOfVocabularyError: If a token is unknown and oov_policy is ``error``
    """
    tokens = [normalize_token(t) for t in modifier.split()]
    if not 1 <= len(tokens) <= 2:
        raise InvalidModifierError(modifier)

    vector = np.zeros(2 * table.dim, dtype=np.float64)
    missing: List[str] = []
    for slot, token in enumerate(tokens):
        vec = table.entries.get(token)
        if vec is None:
            if oov_policy == "error":
                raise OutOfVocabularyError(token)
            missing.append(token)
            continue
        vector[slot * table.dim : (slot + 1) * table.dim] = vec

    if missing:
        logger.warning("Out-of-vocabulary modifier tokens", modifier=modifier, tokens=missing)
    vector.setflags(write=False)
    return EmbeddedModifier(" ".join(tokens), vector, tuple(missing))
