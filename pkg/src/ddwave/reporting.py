"""CSV and JSON artifact writers shared by the harness and the CLI.

CSV is the source of truth for every emitted result; JSON mirrors it for
machine consumption. Each artifact embeds a short manifest hash derived
from the generating configuration, and nothing here depends on wall
clock or filesystem state, so identical configurations produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

__all__ = [
    "manifest_hash",
    "format_value",
    "write_heatmap_csv",
    "read_heatmap_csv",
    "write_rows_csv",
    "read_rows_csv",
    "write_json",
]


def manifest_hash(config: dict) -> str:
    """Short stable digest of a configuration mapping."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def format_value(value) -> str:
    """Shortest-round-trip text for floats, plain text otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        z = complex(value)
        return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}j"
    return str(value)


def write_heatmap_csv(
    path: str | Path,
    values: np.ndarray,
    axis1: str,
    axis2: str,
    manifest: str = "",
) -> Path:
    """Row-major grid dump with the one-line key=value comment header."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError("heatmap values must be 2-D")
    path = Path(path)
    rows, cols = values.shape
    lines = [f"# axis1={axis1} axis2={axis2} N={rows}x{cols} manifest={manifest}"]
    for r in range(rows):
        lines.append(",".join(format_value(v) for v in values[r]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_heatmap_csv(path: str | Path) -> tuple[np.ndarray, dict]:
    """Inverse of :func:`write_heatmap_csv`: (values, header metadata)."""
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not text or not text[0].startswith("#"):
        raise ValueError(f"{path} is missing the heatmap header line")
    meta = {}
    for token in text[0].lstrip("#").split():
        if "=" in token:
            key, _, val = token.partition("=")
            meta[key] = val
    values = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    return values, meta


def write_rows_csv(
    path: str | Path,
    columns: list[str],
    rows: list[tuple],
    manifest: str = "",
) -> Path:
    """Tabular CSV with a manifest comment line and a header row."""
    path = Path(path)
    lines = [f"# manifest={manifest}", ",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row width {len(row)} does not match {len(columns)} columns")
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_rows_csv(path: str | Path) -> tuple[list[str], list[list[str]], dict]:
    """Inverse of :func:`write_rows_csv`: (columns, rows-as-text, metadata)."""
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    meta = {}
    if text and text[0].startswith("#"):
        for token in text[0].lstrip("#").split():
            if "=" in token:
                key, _, val = token.partition("=")
                meta[key] = val
        text = text[1:]
    if not text:
        raise ValueError(f"{path} has no header row")
    columns = text[0].split(",")
    rows = [line.split(",") for line in text[1:]]
    return columns, rows, meta


def write_json(path: str | Path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n", "utf-8")
    return path
