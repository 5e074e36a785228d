"""Deterministic result emission.

Result files must be byte-identical across reruns with the same seed and
config, so nothing time- or host-dependent is ever written; wall-clock
timings go to the log stream only. Numbers are formatted with repr-exact
precision.
"""

from __future__ import annotations

import hashlib
import json


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()[:16]


def format_float(x) -> str:
    return format(float(x), ".17g")


def write_table(path, title: str, config: dict, columns, rows) -> None:
    """CSV with a '#' metadata header block embedding the config and its hash."""
    lines = [
        f"# qcorr {title} v1",
        f"# config: {canonical_json(config)}",
        f"# config_sha256: {config_hash(config)}",
        ",".join(columns),
    ]
    for row in rows:
        cells = [format_float(c) if isinstance(c, float) else str(c) for c in row]
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json_report(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2))
        fh.write("\n")
