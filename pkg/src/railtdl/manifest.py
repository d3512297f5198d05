"""Run manifests: every CLI command records what it read and wrote.

A manifest echoes the full configuration, the seeds, the artifact version
and a SHA-256 digest per input/output file, so a run can be re-executed and
checked for bit-identical results.
"""

import hashlib
import json

from .traceio import atomic_write_bytes
from .version import GENERATOR_TAG

__all__ = ["sha256_file", "manifest_path_for", "write_manifest", "verify_manifest"]

MANIFEST_SUFFIX = ".manifest.json"


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def manifest_path_for(output_path: str) -> str:
    return output_path + MANIFEST_SUFFIX


def write_manifest(path: str, command: str, config: dict, seeds: list[int],
                   inputs: list[str], outputs: list[str]) -> dict:
    doc = {
        "command": command,
        "config": config,
        "seeds": seeds,
        "artifact_version": GENERATOR_TAG,
        "inputs": {p: sha256_file(p) for p in inputs},
        "outputs": {p: sha256_file(p) for p in outputs},
    }
    atomic_write_bytes(path, (json.dumps(doc, indent=2) + "\n").encode())
    return doc


def verify_manifest(path: str) -> list[str]:
    """Re-derive every digest; returns mismatch descriptions ([] when ok)."""
    with open(path) as fh:
        doc = json.load(fh)
    problems = []
    for section in ("inputs", "outputs"):
        for p, digest in doc.get(section, {}).items():
            try:
                actual = sha256_file(p)
            except OSError as exc:
                problems.append(f"{section} {p}: unreadable ({exc})")
                continue
            if actual != digest:
                problems.append(
                    f"{section} {p}: digest {actual} != recorded {digest}"
                )
    return problems
