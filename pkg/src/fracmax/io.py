"""File formats: sampled-function CSV, field CSV, binary fields and gnuplot triplets.

Binary field layout (little-endian)::

    magic     8 bytes   b"FRACMAX1"
    ndim      uint64    number of axes (1 or 2)
    sizes     uint64 x ndim
    bounds    float64 x 2*ndim   (lo, hi) per axis
    values    float64 x prod(sizes), row-major

All writes go to a temporary file in the target directory and are renamed
into place, so readers never see a partial file.
"""

from __future__ import annotations

import csv
import io
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import UsageError
from .fracops import Grid1D, SampledFn

MAGIC = b"FRACMAX1"


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def _fmt(v: float) -> str:
    # repr round-trips a double exactly
    return repr(float(v))


def write_sampled_csv(f: SampledFn, path: str | os.PathLike) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "value"])
    for t, v in zip(f.nodes, f.values):
        w.writerow([_fmt(t), _fmt(v)])
    return atomic_write_text(path, buf.getvalue())


def read_sampled_csv(path: str | os.PathLike, label: str = "") -> SampledFn:
    """Read a ``t,value`` file; nodes must be strictly increasing and uniformly spaced."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["t", "value"]:
        raise UsageError(f"{path}: header must be 't,value'")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=np.float64)
    except ValueError as exc:
        raise UsageError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 3:
        raise UsageError(f"{path}: need at least 3 rows of two columns")
    t = data[:, 0]
    if np.any(np.diff(t) <= 0):
        raise UsageError(f"{path}: t must be strictly increasing")
    grid = Grid1D(float(t[0]), float(t[-1]), len(t) - 1)
    if np.max(np.abs(t - grid.nodes)) > 1e-9 * max(1.0, abs(grid.b - grid.a)):
        raise UsageError(f"{path}: t must be uniformly spaced")
    return SampledFn(grid, data[:, 1], label=label or Path(path).stem)


def _axes(field) -> tuple[list[str], list[np.ndarray]]:
    """Axis names and node arrays of a solution object, slowest axis first."""
    if hasattr(field, "tgrid"):
        return ["t", "x"], [field.tgrid.nodes, field.xgrid.nodes]
    names = ["x", "y"][: len(field.grids)]
    return names, [g.nodes for g in field.grids]


def field_rows(field) -> np.ndarray:
    """``(coord..., value)`` rows in row-major order."""
    _, nodes = _axes(field)
    values = np.asarray(field.values)
    if values.size == 0:
        return np.empty((0, len(nodes) + 1))
    mesh = np.meshgrid(*nodes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh] + [values.ravel()])


def write_field_csv(field, path: str | os.PathLike) -> Path:
    names, _ = _axes(field)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names + ["u"])
    for row in field_rows(field):
        w.writerow([_fmt(v) for v in row])
    return atomic_write_text(path, buf.getvalue())


def write_field_binary(field, path: str | os.PathLike) -> Path:
    _, nodes = _axes(field)
    values = np.ascontiguousarray(field.values, dtype="<f8")
    header = MAGIC + struct.pack("<Q", len(nodes))
    header += struct.pack(f"<{len(nodes)}Q", *values.shape)
    for n in nodes:
        header += struct.pack("<2d", float(n[0]), float(n[-1]))
    return atomic_write_bytes(path, header + values.tobytes())


def read_field_binary(path: str | os.PathLike) -> tuple[list[tuple[float, float]], np.ndarray]:
    """Returns per-axis ``(lo, hi)`` bounds and the value array."""
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise UsageError(f"{path}: not a fracmax binary field")
    pos = len(MAGIC)
    (ndim,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    if ndim not in (1, 2):
        raise UsageError(f"{path}: unsupported number of axes {ndim}")
    shape = struct.unpack_from(f"<{ndim}Q", data, pos)
    pos += 8 * ndim
    bounds = [struct.unpack_from("<2d", data, pos + 16 * k) for k in range(ndim)]
    pos += 16 * ndim
    count = int(np.prod(shape))
    if len(data) - pos != 8 * count:
        raise UsageError(f"{path}: truncated payload")
    values = np.frombuffer(data, dtype="<f8", count=count, offset=pos).reshape(shape)
    return [tuple(b) for b in bounds], values.astype(np.float64)


class _Field:
    """Minimal field rebuilt from a binary file."""

    def __init__(self, bounds, values: np.ndarray, names: list[str]):
        self.values = values
        self.grids = () if values.size == 0 else tuple(
            Grid1D(lo, hi, n - 1) for (lo, hi), n in zip(bounds, values.shape)
        )
        self.names = names


def load_field_binary(path: str | os.PathLike, names: list[str] | None = None):
    bounds, values = read_field_binary(path)
    return _Field(bounds, values, names or ["t", "x"][: values.ndim])


def emit_plot_data(field, path: str | os.PathLike, metadata: dict | None = None) -> tuple[Path, Path]:
    """Whitespace-separated coordinate/value rows plus a ``.json`` sidecar.

    Rows of one slow-axis block are followed by a blank line, the layout
    gnuplot's ``splot`` expects.
    """
    names = getattr(field, "names", None) or _axes(field)[0]
    rows = field_rows(field)
    lines = ["# " + " ".join(names + ["u"])]
    if rows.size:
        block = np.asarray(field.values).shape[-1] if np.asarray(field.values).ndim > 1 else rows.shape[0]
        for k, row in enumerate(rows):
            lines.append(" ".join(_fmt(v) for v in row))
            if (k + 1) % block == 0 and k + 1 < rows.shape[0]:
                lines.append("")
    path = atomic_write_text(path, "\n".join(lines) + "\n")
    meta = {"columns": names + ["u"], "shape": list(np.asarray(field.values).shape)}
    grids = getattr(field, "grids", None)
    if grids is None and hasattr(field, "tgrid"):
        grids = (field.tgrid, field.xgrid)
    meta["grids"] = [{"axis": nm, "lo": g.a, "hi": g.b, "intervals": g.n} for nm, g in zip(names, grids or ())]
    if getattr(field, "scheme_meta", ""):
        meta["scheme"] = field.scheme_meta
    meta.update(metadata or {})
    side = atomic_write_text(str(path) + ".json", json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return path, side


def read_plot_data(path: str | os.PathLike) -> np.ndarray:
    rows = [line.split() for line in Path(path).read_text().splitlines() if line.strip() and not line.startswith("#")]
    if not rows:
        return np.empty((0, 0))
    return np.array([[float(v) for v in r] for r in rows])
