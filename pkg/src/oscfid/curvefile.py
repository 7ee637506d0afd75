"""Comma-delimited curve files with a ``#``-prefixed header.

The header records every input the curve depends on, so re-running the
command it names reproduces the rows exactly.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np

__all__ = ["CurveFile", "parse_grid", "format_grid"]


def parse_grid(spec: str) -> tuple[float, float, int]:
    """``start:stop:n`` -> (start, stop, n)."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must look like start:stop:n, got {spec!r}")
    start, stop = float(parts[0]), float(parts[1])
    n = int(parts[2])
    if n < 1:
        raise ValueError("grid needs at least one point")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ValueError("grid end points must be finite")
    return start, stop, n


def format_grid(start: float, stop: float, n: int) -> str:
    return f"{start!r}:{stop!r}:{n}"


@dataclass
class CurveFile:
    header: dict[str, str]
    columns: list[str]
    rows: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if self.rows.size and self.rows.shape[1] != len(self.columns):
            raise ValueError(f"{self.rows.shape[1]} columns of data for header {self.columns}")
        if self.rows.size:
            order = np.argsort(self.rows[:, 0], kind="stable")
            self.rows = self.rows[order]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def write(self, fh: TextIO) -> None:
        for k, v in self.header.items():
            fh.write(f"# {k}: {v}\n")
        fh.write(",".join(self.columns) + "\n")
        for row in self.rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")

    def dumps(self) -> str:
        buf = io.StringIO()
        self.write(buf)
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            self.write(fh)

    @classmethod
    def loads(cls, text: str) -> "CurveFile":
        header, columns, rows = {}, None, []
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                header[key.strip()] = val.strip()
            elif columns is None:
                columns = line.strip().split(",")
            else:
                rows.append([float(x) for x in line.split(",")])
        if columns is None:
            raise ValueError("no column line found")
        return cls(header, columns, np.array(rows).reshape(-1, len(columns)))

    @classmethod
    def load(cls, path: str | Path) -> "CurveFile":
        return cls.loads(Path(path).read_text())

    def argv(self) -> list[str]:
        """Command line that regenerates this file."""
        return self.header["command"].split()
