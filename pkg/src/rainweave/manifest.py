"""Run manifests: config echo, input/output digests, stage timings.

A manifest plus the original input files is enough to reproduce a run
bit-exactly (same tool version, same seed, same config).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def sha256_file(path) -> str:
    """Hex SHA-256 of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def file_entry(path, role: str | None = None) -> dict:
    entry = {"path": str(path), "sha256": sha256_file(path)}
    if role is not None:
        entry = {"role": role, **entry}
    return entry


def build_manifest(
    tool_version: str,
    seed: int,
    config: dict,
    inputs: list[dict],
    outputs: list[dict],
    timing_ms: dict,
) -> dict:
    return {
        "tool_version": tool_version,
        "seed": seed,
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "timing_ms": timing_ms,
    }


def write_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")
