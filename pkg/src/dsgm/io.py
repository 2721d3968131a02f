"""CSV vectors/matrices and flat ``key=value`` config files."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import DomainError

__all__ = ["read_vector", "write_vector", "read_matrix", "write_matrix", "read_config", "write_config"]


def _rows(path):
    text = Path(path).read_text()
    rows = []
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        rows.append([c.strip() for c in next(csv.reader([s]))])
    return rows


def _floats(cells, path):
    try:
        return [float(c) for c in cells if c != ""]
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from None


def read_vector(path) -> np.ndarray:
    """One value per line; a single comma-separated row is accepted too."""
    rows = _rows(path)
    vals = [v for r in rows for v in _floats(r, path)]
    if not vals:
        raise DomainError(f"{path}: no values")
    return np.array(vals, dtype=float)


def read_matrix(path) -> np.ndarray:
    """Row-major CSV; a leading non-numeric header row is skipped."""
    rows = _rows(path)
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    mat = [_floats(r, path) for r in rows]
    if not mat or len({len(r) for r in mat}) != 1:
        raise DomainError(f"{path}: rows must be non-empty and of equal length")
    return np.array(mat, dtype=float)


def write_vector(path, x, header: str | None = None) -> None:
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    for v in np.asarray(x, dtype=float):
        buf.write(f"{float(v)!r}\n")
    Path(path).write_text(buf.getvalue())


def write_matrix(path, rows, header=None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    Path(path).write_text(buf.getvalue())


def read_config(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment, keys are case-folded and use underscores."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise DomainError(f"{path}:{n}: expected key = value, got {line!r}")
        k, v = s.split("=", 1)
        out[normalize_key(k)] = v.strip()
    return out


def normalize_key(k: str) -> str:
    return k.strip().lower().replace("-", "_")


def write_config(path, cfg: dict) -> None:
    Path(path).write_text("".join(f"{k} = {v}\n" for k, v in cfg.items()))
