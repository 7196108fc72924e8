"""Point-set containers and CSV/JSON ingestion for mesh-vertex data.

Type I data is a single :class:`PointSet`; Type II data is a
:class:`BatchedPointSet` holding one batch per refinement step.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

import numpy as np


class ParseError(ValueError):
    """Malformed input row; ``line`` is 1-based (the header is line 1)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class RectDomain:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.xmax, self.ymin, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("domain bounds must be finite")
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValidationError(f"degenerate domain {vals}")

    def contains(self, xy: np.ndarray, atol: float = 0.0) -> np.ndarray:
        xy = np.atleast_2d(xy)
        return ((xy[:, 0] >= self.xmin - atol) & (xy[:, 0] <= self.xmax + atol)
                & (xy[:, 1] >= self.ymin - atol) & (xy[:, 1] <= self.ymax + atol))

    def to_dict(self) -> dict:
        return {"xmin": self.xmin, "xmax": self.xmax, "ymin": self.ymin, "ymax": self.ymax}

    @classmethod
    def from_dict(cls, d: dict) -> "RectDomain":
        try:
            return cls(float(d["xmin"]), float(d["xmax"]), float(d["ymin"]), float(d["ymax"]))
        except KeyError as exc:
            raise ValidationError(f"domain is missing key {exc}") from None


def _as_points(points) -> np.ndarray:
    arr = np.array(points, dtype=np.float64).reshape(-1, 2)
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(arr), axis=1))[0])
        raise ValidationError(f"non-finite coordinate at point {bad}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PointSet:
    """Ordered 2-D points; order is significant (prefix subsets are index based)."""

    points: np.ndarray
    domain: RectDomain | None = None

    def __post_init__(self):
        object.__setattr__(self, "points", _as_points(self.points))

    def __len__(self) -> int:
        return self.points.shape[0]

    def __getitem__(self, idx) -> "PointSet":
        if isinstance(idx, (int, np.integer)):
            idx = [idx]
        return PointSet(self.points[idx], self.domain)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.domain == other.domain and np.array_equal(self.points, other.points)

    def head(self, n: int) -> "PointSet":
        return PointSet(self.points[:n], self.domain)


@dataclass(frozen=True, eq=False)
class BatchedPointSet:
    """Batches ``X^(0) .. X^(R)`` from ``R`` refinement steps."""

    batches: tuple[PointSet, ...]
    domain: RectDomain | None = None

    def __post_init__(self):
        batches = tuple(b if isinstance(b, PointSet) else PointSet(b, self.domain)
                        for b in self.batches)
        if not batches:
            raise ValidationError("a batched point set needs at least one batch")
        if len(batches[0]) == 0:
            raise ValidationError("batch 0 must be nonempty")
        object.__setattr__(self, "batches", batches)

    @property
    def R(self) -> int:
        return len(self.batches) - 1

    def __len__(self) -> int:
        return sum(len(b) for b in self.batches)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BatchedPointSet):
            return NotImplemented
        return (self.domain == other.domain and len(self.batches) == len(other.batches)
                and all(a == b for a, b in zip(self.batches, other.batches)))

    def batch_index(self) -> np.ndarray:
        """Batch id of every point of the merged set."""
        return np.concatenate([np.full(len(b), i, dtype=np.int64)
                               for i, b in enumerate(self.batches)])


def merge_batches(data) -> PointSet:
    """Concatenate batches in index order. Duplicates are kept.

    A ``PointSet`` passes through unchanged and a plain ``(N, 2)`` array is wrapped.
    """
    if isinstance(data, PointSet):
        return data
    if not isinstance(data, BatchedPointSet):
        return PointSet(data)
    return PointSet(np.concatenate([b.points for b in data.batches], axis=0), data.domain)


# -- reading -----------------------------------------------------------------

def _parse_float(text: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as a number", line) from None
    if not math.isfinite(value):
        raise ValidationError(f"non-finite coordinate {text!r}", line)
    return value


def _group_batches(rows: Sequence[tuple[float, float]], batch_ids: Sequence[int],
                   lines: Sequence[int | None], domain) -> BatchedPointSet:
    for b, ln in zip(batch_ids, lines):
        if b < 0:
            raise ValidationError(f"negative batch index {b}", ln)
    R = max(batch_ids)
    grouped: list[list[tuple[float, float]]] = [[] for _ in range(R + 1)]
    for row, b in zip(rows, batch_ids):
        grouped[b].append(row)
    missing = [i for i, g in enumerate(grouped) if not g]
    if missing:
        raise ValidationError(f"batch indices must be contiguous from 0; missing {missing}")
    return BatchedPointSet(tuple(PointSet(np.array(g), domain) for g in grouped), domain)


def read_csv(stream: IO[str]) -> PointSet | BatchedPointSet:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input; a header row is required", 1) from None
    header = [h.strip() for h in header]
    if header not in (["x", "y"], ["x", "y", "batch"]):
        raise ParseError(f"header must be 'x,y' or 'x,y,batch', got {','.join(header)!r}", 1)
    batched = len(header) == 3

    rows, batch_ids, lines = [], [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
        rows.append((_parse_float(row[0], line), _parse_float(row[1], line)))
        if batched:
            try:
                b = int(row[2])
            except ValueError:
                raise ParseError(f"batch index {row[2]!r} is not an integer", line) from None
            batch_ids.append(b)
            lines.append(line)

    if batched:
        if not rows:
            raise ValidationError("batched input has no rows")
        return _group_batches(rows, batch_ids, lines, None)
    return PointSet(np.array(rows, dtype=np.float64).reshape(-1, 2))


def _json_points(raw, where: str) -> np.ndarray:
    try:
        arr = np.array(raw, dtype=np.float64)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: expected a list of [x, y] pairs") from None
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ParseError(f"{where}: expected a list of [x, y] pairs")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{where}: non-finite coordinate")
    return arr


def read_json(stream: IO[str]) -> PointSet | BatchedPointSet:
    try:
        doc = json.load(stream)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    domain = RectDomain.from_dict(doc["domain"]) if doc.get("domain") else None
    if "batches" in doc:
        batches = tuple(PointSet(_json_points(b, f"batch {i}"), domain)
                        for i, b in enumerate(doc["batches"]))
        return BatchedPointSet(batches, domain)
    if "points" in doc:
        return PointSet(_json_points(doc["points"], "points"), domain)
    raise ParseError("expected a 'points' or 'batches' key")


def load_points(source, format: str | None = None) -> PointSet | BatchedPointSet:
    """Load points from a file path or an open text/byte stream.

    ``format`` is ``"csv"`` or ``"json"``; for paths it defaults to the suffix.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        format = format or path.suffix.lstrip(".").lower()
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return load_points(fh, format)
    if isinstance(source, (bytes, bytearray)):
        return parse_points(source.decode("utf-8"), format)
    if isinstance(source, io.BufferedIOBase) or "b" in getattr(source, "mode", ""):
        source = io.TextIOWrapper(source, encoding="utf-8", newline="")
    fmt = (format or "csv").lower()
    if fmt == "csv":
        return read_csv(source)
    if fmt == "json":
        return read_json(source)
    raise ValueError(f"unknown point format {format!r}")


def parse_points(text: str, format: str = "csv") -> PointSet | BatchedPointSet:
    return load_points(io.StringIO(text, newline=""), format)


# -- writing -----------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(data: PointSet | BatchedPointSet, stream: IO[str]) -> None:
    if isinstance(data, BatchedPointSet):
        stream.write("x,y,batch\n")
        for i, b in enumerate(data.batches):
            for x, y in b.points:
                stream.write(f"{_fmt(x)},{_fmt(y)},{i}\n")
    else:
        stream.write("x,y\n")
        for x, y in data.points:
            stream.write(f"{_fmt(x)},{_fmt(y)}\n")


def write_json(data: PointSet | BatchedPointSet, stream: IO[str]) -> None:
    doc: dict = {}
    if data.domain is not None:
        doc["domain"] = data.domain.to_dict()
    if isinstance(data, BatchedPointSet):
        doc["batches"] = [b.points.tolist() for b in data.batches]
    else:
        doc["points"] = data.points.tolist()
    json.dump(doc, stream)
    stream.write("\n")


def save_points(data: PointSet | BatchedPointSet, dest, format: str | None = None) -> None:
    if isinstance(dest, (str, Path)):
        path = Path(dest)
        format = format or path.suffix.lstrip(".").lower() or "csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            save_points(data, fh, format)
        return
    fmt = (format or "csv").lower()
    if fmt == "csv":
        write_csv(data, dest)
    elif fmt == "json":
        write_json(data, dest)
    else:
        raise ValueError(f"unknown point format {format!r}")
