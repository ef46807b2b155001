"""Detector partition of the x-y plane.

An array of n-1 axis-aligned rectangular cells, each wired to one
detector; everything else in the plane belongs to the implicit catch-all
region with index n. The half-space region above cell i (z > 0) is what
the Born-weight quadrature integrates over.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ConfigInvalid


@dataclass(frozen=True)
class Cell:
    """Closed axis-aligned rectangle in the x-y plane (dimensionless lengths)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def area(self) -> float:
        return max(self.x_max - self.x_min, 0.0) * max(self.y_max - self.y_min, 0.0)

    def to_dict(self) -> dict:
        return {
            "x_min": self.x_min,
            "x_max": self.x_max,
            "y_min": self.y_min,
            "y_max": self.y_max,
        }


@dataclass(frozen=True)
class Violation:
    """One defect found by :func:`validate`; data, not an exception."""

    kind: str  # "overlap" | "degenerate"
    cells: tuple  # 1-based cell indices involved
    detail: str

    def __str__(self):
        return f"{self.kind}{self.cells}: {self.detail}"


class DetectorArray:
    """Ordered, pairwise-disjoint cells; the catch-all region is implicit.

    Region indices are 1-based: cells are 1..n-1, the complement is n.
    Immutable after construction and safe to share across tasks.
    """

    __slots__ = ("cells",)

    def __init__(self, cells):
        cells = tuple(
            c if isinstance(c, Cell) else Cell(**c) for c in cells
        )
        if not cells:
            raise ConfigInvalid("at least one cell is required", field="cells")
        for k, c in enumerate(cells, start=1):
            for v in (c.x_min, c.x_max, c.y_min, c.y_max):
                if not isinstance(v, (int, float)) or v != v:
                    raise ConfigInvalid("cell bounds must be finite reals", field=f"cells[{k}]")
        object.__setattr__(self, "cells", cells)

    def __setattr__(self, name, value):
        raise AttributeError("DetectorArray is immutable")

    @property
    def n(self) -> int:
        """Total region count, catch-all included."""
        return len(self.cells) + 1

    def region_index(self, x: float, y: float) -> int:
        """Region containing (x, y); ties on shared boundaries go to the lowest index."""
        for k, c in enumerate(self.cells, start=1):
            if c.contains(x, y):
                return k
        return self.n

    def to_json(self) -> str:
        return json.dumps({"cells": [c.to_dict() for c in self.cells]}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DetectorArray":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"invalid JSON: {exc}", field="array") from exc
        if not isinstance(doc, dict) or "cells" not in doc:
            raise ConfigInvalid("expected an object with a 'cells' list", field="array")
        try:
            return cls(doc["cells"])
        except TypeError as exc:
            raise ConfigInvalid(f"bad cell record: {exc}", field="array.cells") from exc


def region_index(array: DetectorArray, x: float, y: float) -> int:
    return array.region_index(x, y)


def validate(array: DetectorArray) -> list[Violation]:
    """Report every degenerate cell and every interior-overlapping pair.

    An empty list means ok. Cells sharing only an edge or corner do not
    overlap (the intersection must have positive area).
    """
    out = []
    for k, c in enumerate(array.cells, start=1):
        if c.x_min >= c.x_max or c.y_min >= c.y_max:
            out.append(Violation("degenerate", (k,), "cell has zero area"))
    for i in range(len(array.cells)):
        for j in range(i + 1, len(array.cells)):
            a, b = array.cells[i], array.cells[j]
            wx = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
            wy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
            if wx > 0.0 and wy > 0.0:
                out.append(
                    Violation(
                        "overlap",
                        (i + 1, j + 1),
                        f"interiors overlap on a {wx:g} x {wy:g} rectangle",
                    )
                )
    return out


def strip_array(strips: int, extent: float, y_halfwidth: float) -> DetectorArray:
    """Partition [-extent, extent] in x into equal strips, y in [-y_halfwidth, y_halfwidth]."""
    if strips < 2:
        raise ConfigInvalid("need at least 2 strips", field="strips")
    if extent <= 0 or y_halfwidth <= 0:
        raise ConfigInvalid("extent and y_halfwidth must be positive", field="extent")
    edges = [-extent + 2.0 * extent * k / strips for k in range(strips + 1)]
    # force exact symmetry of the strip edges under x -> -x
    for k in range((len(edges) + 1) // 2, len(edges)):
        edges[k] = -edges[len(edges) - 1 - k]
    cells = [
        Cell(edges[k], edges[k + 1], -y_halfwidth, y_halfwidth) for k in range(strips)
    ]
    return DetectorArray(cells)
