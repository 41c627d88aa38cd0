"""Design files, CSV tables and run manifests.

A design file is JSON in one of these forms::

    {"type": "monotone", "points": [[s, t], ...]}
    {"type": "monotone", "origin": [s1, t1], "d": [...], "delta": [...]}
    {"type": "grid", "points": [[s, t], ...]}          # full product only
    {"type": "grid", "t_coords": [...], "s_coords": [...]}
    {"type": "scattered", "points": [[s, t], ...]}

Parameters never appear in design files.  CSV output carries its run
manifest as leading ``#`` comment lines.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io as _io
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import DesignFileError, DomainError
from .model import GridDesign, MonotoneDesign, ScatteredDesign, validate_condition_d

__all__ = [
    "RunManifest",
    "parse_design",
    "load_design",
    "design_to_dict",
    "dump_design",
    "save_design",
    "write_csv",
    "read_csv",
    "file_sha256",
]


def _pairs(obj, key):
    pts = obj.get(key)
    if not isinstance(pts, list) or not pts:
        raise DesignFileError(f"'{key}' must be a nonempty list of [s, t] pairs")
    try:
        arr = np.array(pts, dtype=float)
    except (TypeError, ValueError):
        raise DesignFileError(f"'{key}' contains non-numeric entries") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DesignFileError(f"'{key}' must be a list of [s, t] pairs")
    return arr


def _numbers(obj, key):
    vals = obj.get(key)
    if not isinstance(vals, list):
        raise DesignFileError(f"'{key}' must be a list of numbers")
    try:
        return np.array(vals, dtype=float)
    except (TypeError, ValueError):
        raise DesignFileError(f"'{key}' contains non-numeric entries") from None


def _grid_from_points(pts):
    s = np.unique(pts[:, 0])
    t = np.unique(pts[:, 1])
    if s.size * t.size != pts.shape[0] or np.unique(pts, axis=0).shape[0] != pts.shape[0]:
        raise DesignFileError("grid points do not form a full Cartesian product")
    return GridDesign(t, s)


def parse_design(text: str, allow_nonpositive_origin: bool = False):
    """Parse design-file text into a design object.

    Raises
    ------
    DesignFileError
        On malformed JSON (with line and column) or schema problems.
    ConditionDViolation, NonpositiveCoordinate
        For monotone designs that break Condition D.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DesignFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict) or "type" not in obj:
        raise DesignFileError("design file must be an object with a 'type' field")
    kind = obj["type"]
    try:
        if kind == "monotone":
            if "points" in obj:
                return validate_condition_d(_pairs(obj, "points"), allow_nonpositive_origin)
            for key in ("origin", "d", "delta"):
                if key not in obj:
                    raise DesignFileError(f"monotone design needs 'points' or 'origin'/'d'/'delta' (missing '{key}')")
            origin = _numbers(obj, "origin")
            if origin.shape != (2,):
                raise DesignFileError("'origin' must be an [s, t] pair")
            design = MonotoneDesign(tuple(origin), _numbers(obj, "d"), _numbers(obj, "delta"))
            # re-check the absolute placement through the point form
            validate_condition_d(design.points()[:1], allow_nonpositive_origin)
            return design
        if kind == "grid":
            if "points" in obj:
                return _grid_from_points(_pairs(obj, "points"))
            return GridDesign(_numbers(obj, "t_coords"), _numbers(obj, "s_coords"))
        if kind == "scattered":
            return ScatteredDesign(_pairs(obj, "points"))
    except DomainError as exc:
        if isinstance(exc, DesignFileError):
            raise
        raise DesignFileError(str(exc)) from None
    raise DesignFileError(f"unknown design type {kind!r}")


def load_design(path, allow_nonpositive_origin: bool = False):
    with open(path, encoding="utf-8") as fh:
        return parse_design(fh.read(), allow_nonpositive_origin)


def design_to_dict(design) -> dict:
    if isinstance(design, MonotoneDesign):
        return {
            "type": "monotone",
            "origin": list(design.origin),
            "d": design.d.tolist(),
            "delta": design.delta.tolist(),
        }
    if isinstance(design, GridDesign):
        return {"type": "grid", "t_coords": design.t_coords.tolist(), "s_coords": design.s_coords.tolist()}
    if isinstance(design, ScatteredDesign):
        return {"type": "scattered", "points": design.points().tolist()}
    raise TypeError(f"not a design: {type(design).__name__}")


def dump_design(design) -> str:
    # repr-exact floats so a reload reproduces every value bit for bit
    return json.dumps(design_to_dict(design), indent=2) + "\n"


def save_design(design, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_design(design))


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    parameters: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)  # path -> sha256
    seeds: list = field(default_factory=list)
    version: str = __version__
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))

    def add_input(self, path) -> None:
        self.inputs[os.fspath(path)] = file_sha256(path)

    def header_lines(self) -> list:
        lines = [
            f"command: {self.command}",
            f"version: ousheet {self.version}",
            f"timestamp: {self.timestamp}",
        ]
        for k, v in self.parameters.items():
            lines.append(f"param {k}: {v}")
        for path, digest in self.inputs.items():
            lines.append(f"input {path}: sha256={digest}")
        if self.seeds:
            lines.append("seeds: " + " ".join(str(s) for s in self.seeds))
        return lines


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(rows, columns, out=None, manifest: RunManifest | None = None) -> str:
    """Write rows as CSV (``'.'`` decimals, repr-exact floats); return the text.

    ``out`` may be a path, a writable text stream or None.
    """
    buf = _io.StringIO()
    if manifest is not None:
        for line in manifest.header_lines():
            buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if out is None:
        return text
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path_or_text, from_text: bool = False):
    """Return ``(header_comments, columns, rows)`` with numeric fields parsed as float."""
    if from_text:
        lines = path_or_text.splitlines()
    else:
        with open(path_or_text, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    comments = [ln[1:].strip() for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    reader = csv.reader(body)
    columns = next(reader)
    rows = []
    for rec in reader:
        parsed = []
        for v in rec:
            try:
                parsed.append(float(v))
            except ValueError:
                parsed.append(v)
        rows.append(parsed)
    return comments, columns, rows
