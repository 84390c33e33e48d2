"""CSV readers and writers for triples and per-label RGB samples.

Formats:
    triples.csv  ref_label,modifier,target_label[,split]
    samples.csv  label,r,g,b   (one row per survey draw)
"""

import csv
import hashlib
from pathlib import Path
from typing import Dict, Iterable, List, Mapping

import numpy as np

from pragmatic_colors.domain.exceptions import DataFormatError
from pragmatic_colors.domain.models import RGB_MAX, LabelSamples, Triple, TripleTag

TRIPLE_COLUMNS = ["ref_label", "modifier", "target_label"]
SAMPLE_COLUMNS = ["label", "r", "g", "b"]


def file_sha256(path: Path) -> str:
    """Hex SHA-256 digest of a file's bytes."""
    digest = hashlib.sha256()
    with path.open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_triples(path: Path) -> List[Triple]:
    """Parse a triples CSV, preserving row order.

    Args:
        path: CSV with header ``ref_label,modifier,target_label`` and an
            optional fourth ``split`` column (``train`` or ``test``)

    Returns:
        Triples in file order; rows without a split are test-only

    Raises:
        DataFormatError: On a bad header or malformed row, naming its line
    """
    with path.open("r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            return []
        header = [h.strip() for h in header]
        has_split = header == TRIPLE_COLUMNS + ["split"]
        if header != TRIPLE_COLUMNS and not has_split:
            raise DataFormatError(f"unexpected header {header}", line_number=1)
        width = len(header)

        triples: List[Triple] = []
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            line = reader.line_num
            if len(row) != width:
                raise DataFormatError(f"expected {width} fields, found {len(row)}", line)
            ref, modifier, target = (cell.strip() for cell in row[:3])
            tag = TripleTag.TEST
            if has_split:
                try:
                    tag = TripleTag(row[3].strip().lower())
                except ValueError as e:
                    raise DataFormatError(f"invalid split {row[3]!r}", line) from e
            try:
                triples.append(Triple(ref, " ".join(modifier.split()), target, tag))
            except ValueError as e:
                raise DataFormatError(str(e), line) from e
    return triples


def write_triples(path: Path, triples: Iterable[Triple]) -> None:
    """Write triples with the ``split`` column."""
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRIPLE_COLUMNS + ["split"])
        for t in triples:
            writer.writerow([t.ref_label, t.modifier, t.target_label, t.tag.value])


def load_samples(path: Path) -> Dict[str, LabelSamples]:
    """Parse a samples CSV into per-label sample sets.

    Channels outside [0, 255] are clamped.

    Returns:
        Label -> samples, labels in first-seen order

    Raises:
        DataFormatError: On a bad header, wrong field count or non-finite value
    """
    rows: Dict[str, List[List[float]]] = {}
    with path.open("r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            return {}
        if [h.strip() for h in header] != SAMPLE_COLUMNS:
            raise DataFormatError(f"unexpected header {header}", line_number=1)
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            line = reader.line_num
            if len(row) != 4:
                raise DataFormatError(f"expected 4 fields, found {len(row)}", line)
            label = row[0].strip()
            if not label:
                raise DataFormatError("empty label", line)
            try:
                rgb = [float(v) for v in row[1:]]
            except ValueError as e:
                raise DataFormatError(f"non-numeric channel ({e})", line) from e
            if not all(np.isfinite(rgb)):
                raise DataFormatError("non-finite channel", line)
            rows.setdefault(label, []).append(rgb)

    return {
        label: LabelSamples(label, np.clip(np.array(vs, dtype=np.float64), 0.0, RGB_MAX))
        for label, vs in rows.items()
    }


def write_samples(path: Path, samples: Mapping[str, LabelSamples]) -> None:
    """Write one ``label,r,g,b`` row per vector, labels in mapping order."""
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SAMPLE_COLUMNS)
        for label, s in samples.items():
            for r, g, b in s.vectors:
                writer.writerow([label, repr(float(r)), repr(float(g)), repr(float(b))])
