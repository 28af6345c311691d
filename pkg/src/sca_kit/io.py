"""Matrix file formats.

Two on-disk formats are supported for every labelled matrix:

* CSV: comma-delimited, ``.`` decimal point, a header row whose first cell is
  a corner label followed by the column labels, then one row per stimulus
  beginning with its label.
* Binary (``.bin``): little-endian header ``<4sHBBQQ`` = (magic ``SCAK``,
  version, dtype code, kind code, rows, cols), a row-major float64 payload,
  then row labels and column labels as length-prefixed (u32) UTF-8 strings,
  and a final length-prefixed UTF-8 JSON block of attributes.

Values are written in CSV with Python's shortest round-trip repr, so CSV
round trips are in practice exact as well.
"""

from __future__ import annotations

import csv
import json
import os
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .data import ConnectivityMatrix, Factorization, ResponseMatrix
from .errors import DimensionError, ParseError

MAGIC = b"SCAK"
VERSION = 1
_HEADER = struct.Struct("<4sHBBQQ")
_DTYPE_F64 = 1
KIND_CODES = {"response": 0, "icm": 1, "rdm": 2, "behavioral": 3, "factor": 4}
_KIND_NAMES = {v: k for k, v in KIND_CODES.items()}


def infer_format(path, fmt=None) -> str:
    if fmt is not None:
        if fmt not in ("csv", "binary"):
            raise ValueError(f"unknown format {fmt!r}")
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".bin", ".scak"):
        return "binary"
    raise ValueError(f"cannot infer format from {str(path)!r}; use .csv or .bin")


# -- binary ------------------------------------------------------------------


def _pack_labels(labels) -> bytes:
    out = []
    for label in labels:
        raw = str(label).encode("utf-8")
        out.append(struct.pack("<I", len(raw)))
        out.append(raw)
    return b"".join(out)


def write_binary(path, data, row_labels, col_labels, kind="response", attrs=None):
    data = np.ascontiguousarray(data, dtype="<f8")
    rows, cols = data.shape
    if len(row_labels) != rows or len(col_labels) != cols:
        raise DimensionError("label counts do not match matrix shape")
    meta = json.dumps(attrs or {}, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, _DTYPE_F64, KIND_CODES[kind], rows, cols))
        fh.write(data.tobytes(order="C"))
        fh.write(_pack_labels(row_labels))
        fh.write(_pack_labels(col_labels))
        fh.write(struct.pack("<I", len(meta)))
        fh.write(meta)


def read_binary(path):
    """Return ``(data, row_labels, col_labels, kind, attrs)``."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ParseError(f"{path}: truncated header")
    magic, version, dtype, kind, rows, cols = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ParseError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ParseError(f"{path}: unsupported version {version}")
    if dtype != _DTYPE_F64:
        raise ParseError(f"{path}: unsupported dtype code {dtype}")
    if kind not in _KIND_NAMES:
        raise ParseError(f"{path}: unknown kind code {kind}")
    pos = _HEADER.size
    nbytes = rows * cols * 8
    if len(raw) < pos + nbytes:
        raise DimensionError(f"{path}: payload shorter than {rows}x{cols} header claims")
    data = np.frombuffer(raw, dtype="<f8", count=rows * cols, offset=pos)
    data = data.astype(np.float64).reshape(rows, cols)
    pos += nbytes

    def labels(n):
        nonlocal pos
        out = []
        for _ in range(n):
            if pos + 4 > len(raw):
                raise ParseError(f"{path}: truncated label block")
            (ln,) = struct.unpack_from("<I", raw, pos)
            pos += 4
            out.append(raw[pos : pos + ln].decode("utf-8"))
            pos += ln
        return tuple(out)

    row_labels = labels(rows)
    col_labels = labels(cols)
    attrs = {}
    if pos + 4 <= len(raw):
        (ln,) = struct.unpack_from("<I", raw, pos)
        attrs = json.loads(raw[pos + 4 : pos + 4 + ln].decode("utf-8"))
    return data, row_labels, col_labels, _KIND_NAMES[kind], attrs


# -- csv ---------------------------------------------------------------------


def write_csv(path, data, row_labels, col_labels, corner="stimulus"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([corner, *col_labels])
        for label, row in zip(row_labels, np.asarray(data, dtype=np.float64)):
            writer.writerow([label, *(repr(float(v)) for v in row)])


def read_csv(path):
    """Return ``(data, row_labels, col_labels)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise ParseError(f"{path}: empty file", row=1)
    header = rows[0]
    if len(header) < 2:
        raise ParseError(f"{path}: header needs a corner cell and at least one column label", row=1)
    col_labels = tuple(h.strip() for h in header[1:])
    row_labels = []
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DimensionError(
                f"{path}: line {lineno} has {len(row)} fields, header has {len(header)}"
            )
        row_labels.append(row[0].strip())
        parsed = []
        for colno, cell in enumerate(row[1:], start=2):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise ParseError(f"{path}: cannot parse {cell!r} as a number", row=lineno, col=colno) from None
        values.append(parsed)
    data = np.array(values, dtype=np.float64).reshape(len(values), len(col_labels))
    return data, tuple(row_labels), col_labels


# -- public API --------------------------------------------------------------


def load_matrix(path, format=None) -> ResponseMatrix:
    """Load a stimuli x units matrix from CSV or binary."""
    fmt = infer_format(path, format)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    if fmt == "csv":
        data, rows, cols = read_csv(path)
    else:
        data, rows, cols, _, _ = read_binary(path)
    return ResponseMatrix(data, rows, cols)


def load_connectivity(path, kind=None, format=None) -> ConnectivityMatrix:
    """Load an ICM/RDM. Binary files carry their kind; CSV files take ``kind``."""
    fmt = infer_format(path, format)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    attrs = {}
    if fmt == "csv":
        data, rows, cols = read_csv(path)
        file_kind = kind or "behavioral"
    else:
        data, rows, cols, file_kind, attrs = read_binary(path)
        if file_kind not in ("icm", "rdm", "behavioral"):
            file_kind = kind or "behavioral"
        elif kind is not None and kind != file_kind:
            raise ValueError(f"{path}: file holds a {file_kind}, expected {kind}")
    if rows != cols:
        raise DimensionError(f"{path}: row and column stimulus labels differ")
    return ConnectivityMatrix(data, file_kind, rows, n_runs=attrs.get("n_runs"))


def save_matrix(m: Union[ResponseMatrix, ConnectivityMatrix], path, format=None) -> None:
    fmt = infer_format(path, format)
    if isinstance(m, ConnectivityMatrix):
        rows = cols = m.stimulus_ids
        kind, corner = m.kind, m.kind
        attrs = {"n_runs": m.n_runs} if m.n_runs is not None else {}
    else:
        rows, cols = m.stimulus_ids, m.unit_ids
        kind, corner, attrs = "response", "stimulus", {}
    if fmt == "csv":
        write_csv(path, m.data, rows, cols, corner=corner)
    else:
        write_binary(path, m.data, rows, cols, kind=kind, attrs=attrs)


def _component_labels(c):
    return tuple(f"c{i}" for i in range(c))


def save_factorization(f: Factorization, outdir, extra_meta=None) -> None:
    """Write ``responses.bin``, ``weights.bin`` and ``meta.json`` to ``outdir``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    s, c = f.responses.shape
    v = f.weights.shape[1]
    stim = f.stimulus_ids or tuple(f"s{i}" for i in range(s))
    units = f.unit_ids or tuple(f"u{j}" for j in range(v))
    comps = _component_labels(c)
    write_binary(outdir / "responses.bin", f.responses, stim, comps, kind="factor")
    write_binary(outdir / "weights.bin", f.weights, comps, units, kind="factor")
    meta = {
        "method": f.method,
        "seed": f.seed,
        "c": c,
        "noise_variance": f.noise_variance,
        "center": None if f.center is None else [float(x) for x in f.center],
        "cfg": f.params,
    }
    if extra_meta:
        meta.update(extra_meta)
    write_json(outdir / "meta.json", meta)


def load_factorization(indir) -> Factorization:
    indir = Path(indir)
    r, stim, _, _, _ = read_binary(indir / "responses.bin")
    w, _, units, _, _ = read_binary(indir / "weights.bin")
    meta = json.loads((indir / "meta.json").read_text(encoding="utf-8"))
    center = meta.get("center")
    return Factorization(
        responses=r,
        weights=w,
        method=meta["method"],
        noise_variance=meta.get("noise_variance"),
        seed=meta.get("seed"),
        center=None if center is None else np.asarray(center),
        stimulus_ids=stim,
        unit_ids=units,
        params=meta.get("cfg", {}),
    )


def write_json(path, obj) -> None:
    """Stable-key-ordered JSON, newline-terminated."""
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")
