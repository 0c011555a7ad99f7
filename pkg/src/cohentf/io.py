"""File formats: JSON signals and sets, header+CSV TF functions and operators,
16-bit PGM magnitude images.

Every writer goes through a temporary file in the target directory followed
by ``os.replace`` so readers never see a partial file.  Floats are written
with 17 significant digits and read back bitwise.
"""

from __future__ import annotations

import io as _io
import json
import math
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .grid import Grid, MeasurableSet, Signal, interval_set
from .operators import OperatorMatrix
from .transforms import TFFunction

__all__ = [
    "atomic_write",
    "to_jsonable",
    "write_signal",
    "read_signal",
    "write_set",
    "read_set",
    "write_tf",
    "read_tf",
    "write_operator",
    "read_operator",
    "write_json",
    "render_pgm",
    "read_pgm",
]

PathLike = Union[str, os.PathLike]
_FMT = "%.17g"


@contextmanager
def atomic_write(path: PathLike, mode: str = "w"):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(obj, path: PathLike) -> None:
    with atomic_write(path) as fh:
        json.dump(to_jsonable(obj), fh, indent=2)
        fh.write("\n")


def _complex_pairs(values: np.ndarray) -> list:
    return np.stack([values.real, values.imag], axis=-1).tolist()


def _from_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim == 1:
        return arr.astype(complex)
    if arr.shape[-1] != 2:
        raise ValueError("complex values must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


# ---------------------------------------------------------------------------
# Signals and sets
# ---------------------------------------------------------------------------

def write_signal(f: Signal, path: PathLike) -> None:
    write_json({"grid": f.grid.to_dict(), "samples": _complex_pairs(f.samples)}, path)


def read_signal(path: PathLike) -> Signal:
    with open(path) as fh:
        d = json.load(fh)
    return Signal(Grid.from_dict(d["grid"]), _from_pairs(d["samples"]))


def write_set(S: MeasurableSet, path: PathLike) -> None:
    write_json({"grid": S.grid.to_dict(), "mask": S.mask.astype(int).tolist()}, path)


def read_set(path: PathLike, grid: Optional[Grid] = None) -> MeasurableSet:
    """Read a set given by a mask or by intervals.

    ``grid`` is used when the file carries none and must match when it does.
    """
    with open(path) as fh:
        d = json.load(fh)
    g = Grid.from_dict(d["grid"]) if "grid" in d else grid
    if g is None:
        raise ValueError(f"{path}: set file has no grid and none was supplied")
    if grid is not None and g != grid:
        raise ValueError(f"{path}: set grid {g} does not match expected {grid}")
    if "mask" in d:
        return MeasurableSet(g, np.asarray(d["mask"], dtype=int) != 0)
    if "intervals" in d:
        return interval_set(g, d["intervals"])
    raise ValueError(f"{path}: set file needs 'mask' or 'intervals'")


# ---------------------------------------------------------------------------
# TF functions and operators: one JSON header line, then CSV rows
# ---------------------------------------------------------------------------

def _write_table(path: PathLike, header: dict, values: np.ndarray) -> None:
    n0, n1 = values.shape
    i, k = np.meshgrid(np.arange(n0), np.arange(n1), indexing="ij")
    rows = np.column_stack([i.ravel(), k.ravel(), values.real.ravel(), values.imag.ravel()])
    buf = _io.StringIO()
    np.savetxt(buf, rows, fmt=["%d", "%d", _FMT, _FMT], delimiter=",")
    with atomic_write(path) as fh:
        fh.write(json.dumps(to_jsonable(header)) + "\n")
        fh.write(buf.getvalue())


def _read_table(path: PathLike):
    with open(path) as fh:
        header = json.loads(fh.readline())
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    n = int(header["grid"]["n"])
    out = np.zeros((n, n), dtype=complex)
    if rows.size:
        i = rows[:, 0].astype(int)
        k = rows[:, 1].astype(int)
        out[i, k] = rows[:, 2] + 1j * rows[:, 3]
    return header, out


def write_tf(F: TFFunction, path: PathLike) -> None:
    header = {"kind": "tf", "grid": F.grid.to_dict(), "fgrid": F.fgrid.to_dict(), "columns": ["xi", "ki", "re", "im"]}
    _write_table(path, header, F.samples)


def read_tf(path: PathLike) -> TFFunction:
    header, values = _read_table(path)
    if header.get("kind", "tf") != "tf":
        raise ValueError(f"{path}: not a TF file")
    return TFFunction(Grid.from_dict(header["grid"]), values)


def write_operator(M: OperatorMatrix, path: PathLike) -> None:
    header = {"kind": "operator", "grid": M.grid.to_dict(), "provenance": M.provenance, "columns": ["t", "u", "re", "im"]}
    if M.structure is not None:
        kind, vec = M.structure
        header["structure"] = {"kind": kind, "vector": None if vec is None else _complex_pairs(np.asarray(vec))}
    _write_table(path, header, M.entries)


def read_operator(path: PathLike) -> OperatorMatrix:
    header, values = _read_table(path)
    if header.get("kind") != "operator":
        raise ValueError(f"{path}: not an operator file")
    structure = None
    if header.get("structure"):
        st = header["structure"]
        vec = None if st["vector"] is None else _from_pairs(st["vector"])
        structure = (st["kind"], vec)
    return OperatorMatrix(Grid.from_dict(header["grid"]), values, header.get("provenance", {}), structure)


# ---------------------------------------------------------------------------
# Images
# ---------------------------------------------------------------------------

def render_pgm(F: TFFunction, path: PathLike) -> None:
    """16-bit binary PGM of |F|: columns are x, rows are w with the highest
    frequency on top; linear scale normalised by max |F|."""
    mag = np.abs(F.samples)
    if mag.size == 0:
        raise ValueError("cannot render an empty TF function")
    peak = mag.max()
    img = np.zeros_like(mag) if peak == 0 else np.rint(65535.0 * mag / peak)
    img = img.T[::-1].astype(">u2")
    h, w = img.shape
    with atomic_write(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path: PathLike) -> np.ndarray:
    """Read a binary 16-bit PGM written by :func:`render_pgm`."""
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    pos += 1  # single whitespace byte before the raster
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = (int(v) for v in fields[1:])
    if maxval != 65535:
        raise ValueError(f"{path}: expected a 16-bit PGM")
    return np.frombuffer(data, dtype=">u2", count=w * h, offset=pos).reshape(h, w).astype(np.uint16)
