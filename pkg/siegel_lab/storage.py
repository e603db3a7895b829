"""
Storage utilities: report files and the binary window cache.

Reports are written as JSON (pydantic ``model_dump_json``) or CSV with a
header row, named ``{command}_{slug}_{timestamp}_{suffix}`` under the
configured output directory unless an explicit path is given. Run timings go
to a ``.meta.json`` sidecar so the report itself depends only on its inputs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import re
import struct
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
from pydantic import BaseModel

from .arith_tables import ArithTable, build_window
from .config import get_settings

logger = logging.getLogger(__name__)

CACHE_MAGIC = b"SGL1"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sIqqq")
_ARRAYS: tuple[tuple[str, str], ...] = (
    ("liouville", "<i1"),
    ("mangoldt", "<f8"),
    ("mu", "<i1"),
    ("tau", "<i8"),
    ("spf", "<i8"),
)


def _slugify(text: str, max_length: int = 60) -> str:
    text = text.strip().lower()
    text = re.sub(r"[^a-z0-9]+", "-", text)
    text = re.sub(r"-+", "-", text).strip("-")
    if len(text) <= max_length:
        return text or "run"
    cut = text.rfind("-", 0, max_length)
    if cut == -1:
        cut = max_length
    return text[:cut] or text[:max_length]


def _unique_suffix(source: str) -> str:
    digest = hashlib.sha1(source.encode("utf-8")).hexdigest()  # nosec - non-crypto use
    return digest[:8]


def _target_path(command: str, slug_source: str, ext: str, out: str | None, base_dir: str | None) -> Path:
    if out:
        path = Path(out)
    else:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        root = Path.cwd() / (base_dir or get_settings().SIEGEL_LAB_OUTPUT_DIR)
        name = f"{command}_{_slugify(slug_source)}_{timestamp}_{_unique_suffix(slug_source)}.{ext}"
        path = root / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_json_report(
    command: str,
    slug_source: str,
    report: BaseModel,
    out: str | None = None,
    base_dir: str | None = None,
    meta: Mapping[str, Any] | None = None,
) -> str:
    """Persist a report as JSON.

    Args:
        command: Subcommand name, used as the file prefix
        slug_source: Free text turned into the filename slug
        report: The pydantic report to serialize
        out: Explicit output path, or '-' for stdout
        base_dir: Directory for timestamped files (default: settings)
        meta: Run metadata such as timings, written beside the report

    Returns:
        The absolute path of the written file, or '-' for stdout.
    """
    text = report.model_dump_json(indent=2)
    if out == "-":
        sys.stdout.write(text + "\n")
        return "-"
    path = _target_path(command, slug_source, "json", out, base_dir)
    path.write_text(text + "\n", encoding="utf-8")
    if meta:
        try:
            path.with_suffix(".meta.json").write_text(
                json.dumps(dict(meta), indent=2, ensure_ascii=False), encoding="utf-8"
            )
        except (OSError, TypeError) as err:
            logger.exception("Failed to write report metadata: %s", err, exc_info=True)
    return str(path.resolve())


def write_csv_report(
    command: str,
    slug_source: str,
    rows: Iterable[Mapping[str, Any]],
    out: str | None = None,
    base_dir: str | None = None,
) -> str:
    rows = list(rows)
    buffer = io.StringIO()
    fieldnames: list[str] = []
    for row in rows:
        fieldnames.extend(k for k in row if k not in fieldnames)
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if out == "-":
        sys.stdout.write(buffer.getvalue())
        return "-"
    path = _target_path(command, slug_source, "csv", out, base_dir)
    path.write_text(buffer.getvalue(), encoding="utf-8")
    return str(path.resolve())


def _cache_path(cache_dir: Path, lo: int, hi: int) -> Path:
    return cache_dir / f"window_{lo}_{hi}_v{CACHE_VERSION}.sgl"


def save_window(table: ArithTable, cache_dir: Path) -> Path:
    """Write a window as SGL1: little-endian header, then the raw arrays."""
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = _cache_path(cache_dir, table.lo, table.hi)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, table.lo, table.hi, len(table)))
        for name, dtype in _ARRAYS:
            fh.write(np.ascontiguousarray(getattr(table, name), dtype=dtype).tobytes())
    return path


def load_window(path: Path) -> ArithTable:
    data = path.read_bytes()
    magic, version, lo, hi, length = _HEADER.unpack_from(data, 0)
    if magic != CACHE_MAGIC or version != CACHE_VERSION or length != hi - lo + 1:
        raise ValueError(f"{path} is not a version {CACHE_VERSION} window cache")
    offset = _HEADER.size
    arrays: dict[str, np.ndarray] = {}
    for name, dtype in _ARRAYS:
        arr = np.frombuffer(data, dtype=dtype, count=length, offset=offset)
        arrays[name] = arr.astype(np.dtype(dtype).newbyteorder("="))
        offset += arr.nbytes
    if offset != len(data):
        raise ValueError(f"{path} has {len(data) - offset} trailing bytes")
    return ArithTable(lo=lo, hi=hi, **arrays)


def load_or_build_window(lo: int, hi: int, cache_dir: Path | None = None) -> ArithTable:
    """build_window with an optional on-disk cache keyed by (lo, hi, version)."""
    cache_dir = cache_dir or get_settings().SIEGEL_LAB_CACHE_DIR
    if cache_dir is None:
        return build_window(lo, hi)
    path = _cache_path(Path(cache_dir), lo, hi)
    if path.exists():
        try:
            return load_window(path)
        except (OSError, ValueError, struct.error) as err:
            logger.warning("Ignoring unreadable window cache %s: %s", path, err)
    table = build_window(lo, hi)
    try:
        save_window(table, Path(cache_dir))
    except OSError as err:
        logger.exception("Failed to write window cache: %s", err, exc_info=True)
    return table
