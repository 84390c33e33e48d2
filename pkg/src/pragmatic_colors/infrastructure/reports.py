"""Metric reports and run manifests.

Metric files are byte-stable for identical inputs: fixed row order, float
repr, sorted JSON keys and no timestamps. Timestamps live only in the
manifest.
"""

import csv
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Mapping

from pydantic import BaseModel, ConfigDict, Field

from pragmatic_colors.application.evaluation import SD_CONVENTION, ExperimentReport
from pragmatic_colors.domain.exceptions import ArtifactError
from pragmatic_colors.domain.models import RunManifest
from pragmatic_colors.infrastructure.data_files import file_sha256
from pragmatic_colors.infrastructure.logger import get_logger

logger = get_logger(__name__)

REPORT_SCHEMA_VERSION = 1
CSV_COLUMNS = ["split", "metric", "mean", "sd", "n_triples", "n_runs"]


class MetricRow(BaseModel):
    """One aggregated metric for one model on one split."""

    model_config = ConfigDict(frozen=True)

    split: str
    metric: str
    mean: float
    sd: float = Field(ge=0)
    n_triples: int = Field(ge=1)
    n_runs: int = Field(ge=1)


class RunSummary(BaseModel):
    """Per-seed details kept alongside the aggregates."""

    seed: int
    lam: float = Field(ge=0, le=1)
    final_loss: Dict[str, float]
    degenerate_cosine: Dict[str, int]


class EvalReport(BaseModel):
    """Serialized output of an evaluation."""

    schema_version: int = REPORT_SCHEMA_VERSION
    distance_metric: str
    grid_objective: Literal["cosine", "delta_e"]
    sd_convention: str = SD_CONVENTION
    seeds: List[int]
    lambdas: List[float]
    split_counts: Dict[str, int]
    degenerate_cosine: Dict[str, int]
    rows: List[MetricRow]
    runs: List[RunSummary]

    @classmethod
    def from_experiment(
        cls, report: ExperimentReport, distance_metric: str, grid_objective: str
    ) -> "EvalReport":
        rows: List[MetricRow] = []
        for r in report.results:
            for name, mean, sd in (
                ("cosine", r.cosine_mean, r.cosine_sd),
                ("delta_e", r.delta_e_mean, r.delta_e_sd),
            ):
                rows.append(
                    MetricRow(
                        split=r.split,
                        metric=f"{r.model}.{name}",
                        mean=mean,
                        sd=sd,
                        n_triples=r.n_triples,
                        n_runs=r.n_runs,
                    )
                )
        return cls(
            distance_metric=distance_metric,
            grid_objective=grid_objective,  # type: ignore[arg-type]
            seeds=report.seeds,
            lambdas=report.lambdas,
            split_counts=report.split_counts,
            degenerate_cosine=report.degenerate_cosine(),
            rows=rows,
            runs=[
                RunSummary(
                    seed=run.seed,
                    lam=run.lam,
                    final_loss=run.final_loss,
                    degenerate_cosine=run.degenerate,
                )
                for run in report.runs
            ],
        )


def write_report_json(path: Path, report: EvalReport) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2)
    path.write_text(text + "\n", encoding="utf-8")


def write_report_csv(path: Path, rows: Iterable[MetricRow]) -> None:
    """Write rows with the fixed column order ``split,metric,mean,sd,n_triples,n_runs``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [row.split, row.metric, repr(row.mean), repr(row.sd), row.n_triples, row.n_runs]
            )


def read_report_json(path: Path) -> EvalReport:
    try:
        return EvalReport.model_validate_json(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise ArtifactError(f"Cannot read report {path}: {e}") from e


# ============================================================================
# Manifests
# ============================================================================


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def hash_files(paths: Iterable[Path]) -> Dict[str, str]:
    """Path string -> SHA-256 for every existing file."""
    return {str(p): file_sha256(p) for p in paths if p.is_file()}


def write_manifest(path: Path, manifest: RunManifest) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    logger.info("Manifest written", path=str(path), artifacts=len(manifest.artifacts))


def read_manifest(path: Path) -> RunManifest:
    """Parse a manifest file.

    Raises:
        ArtifactError: If the file is missing or malformed
    """
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        return RunManifest(
            command=raw["command"],
            config=raw["config"],
            seeds=list(raw["seeds"]),
            datasets=dict(raw.get("datasets", {})),
            artifacts=dict(raw.get("artifacts", {})),
            started_at=raw.get("started_at", ""),
            finished_at=raw.get("finished_at", ""),
        )
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ArtifactError(f"Cannot read manifest {path}: {e}") from e


def verify_manifest(manifest: RunManifest) -> List[str]:
    """Problems found when re-hashing a manifest's files; empty when it checks out."""
    problems: List[str] = []
    recorded: Mapping[str, str] = {**manifest.datasets, **manifest.artifacts}
    for name, digest in sorted(recorded.items()):
        p = Path(name)
        if not p.is_file():
            problems.append(f"missing: {name}")
        elif file_sha256(p) != digest:
            problems.append(f"hash mismatch: {name}")
    return problems
