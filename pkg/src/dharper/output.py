"""CSV and metadata output conventions.

Every CSV has a header row and a sibling <name>.meta.json; files are
written atomically (temp file in the target directory, then rename).
Floats are printed with 17 significant digits so values round-trip
exactly and reruns are bitwise comparable.
"""

from __future__ import annotations

import json
import os
import subprocess
import tempfile
from dataclasses import asdict, is_dataclass


def format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.17g}"
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return format_value(v.item())
    return str(v)


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes, int, float, bool)):
        return obj.item()
    return obj


def git_describe() -> str:
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.run(
            ["git", "-C", here, "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=5)
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"


def write_csv(path: str, columns, rows, meta: dict) -> None:
    """CSV plus sibling .meta.json describing schema and full configuration."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("utf-8"))
    meta = dict(meta)
    meta["columns"] = list(columns)
    write_meta(meta_path(path), meta)


def meta_path(csv_path: str) -> str:
    base = csv_path[:-4] if csv_path.endswith(".csv") else csv_path
    return base + ".meta.json"


def write_meta(path: str, meta: dict) -> None:
    atomic_write_bytes(
        path, json.dumps(_jsonable(meta), indent=2, sort_keys=True).encode("utf-8"))
