#!/usr/bin/env python3
"""
Manifest Verification Script for pragmatic-colors.

Re-hashes every dataset and artifact recorded in a run manifest written by
``train`` or ``eval``. Can be used for:
- Checking that published metrics still match their inputs
- CI gates after an evaluation job
"""

import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from pragmatic_colors.domain.exceptions import ArtifactError  # noqa: E402
from pragmatic_colors.infrastructure.reports import read_manifest, verify_manifest  # noqa: E402


@dataclass
class VerificationStatus:
    """Verification result."""

    status: str  # "ok", "failed"
    manifest: str
    command: str
    files_checked: int
    issues: List[str]


def check(path: Path) -> VerificationStatus:
    """Verify one manifest file."""
    try:
        manifest = read_manifest(path)
    except ArtifactError as e:
        return VerificationStatus("failed", str(path), "", 0, [str(e)])
    issues = verify_manifest(manifest)
    return VerificationStatus(
        status="failed" if issues else "ok",
        manifest=str(path),
        command=manifest.command,
        files_checked=len(manifest.datasets) + len(manifest.artifacts),
        issues=issues,
    )


def main() -> None:
    """Main entry point."""
    import argparse

    parser = argparse.ArgumentParser(description="Verify pragmatic-colors run manifests")
    parser.add_argument("manifests", nargs="+", type=Path, help="manifest JSON files")
    parser.add_argument("--json", action="store_true", help="Output as JSON")
    args = parser.parse_args()

    results = [check(p) for p in args.manifests]

    if args.json:
        print(json.dumps([asdict(r) for r in results], indent=2))
    else:
        for r in results:
            print(f"{r.status.upper():<7} {r.manifest} ({r.command or '?'}, {r.files_checked} files)")
            for issue in r.issues:
                print(f"  - {issue}")

    sys.exit(0 if all(r.status == "ok" for r in results) else 2)


if __name__ == "__main__":
    main()
