"""Control-point shape models and the built-in roof prototypes.

A shape is an ordered list of control points plus edges between them;
rendering an edge list on a canvas gives the synthetic image.  Point
ordering is stable so two shapes derived from the same prototype stay in
index-wise correspondence for interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import render

FREE = "free"
FIXED = "fixed"
BOUNDARY = "boundary"   # must sit on a boundary pixel of the reference image
REGION = "region"       # free within an axis-aligned rectangle [x0, y0, x1, y1]


@dataclass
class ControlPoint:
    x: float
    y: float
    constraint: str = FREE
    region: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.constraint not in (FREE, FIXED, BOUNDARY, REGION):
            raise ValueError(f"unknown constraint {self.constraint!r}")
        if self.constraint == REGION and self.region is None:
            raise ValueError("region constraint needs a rectangle")

    def allows(self, x, y):
        """Whether a move to (x, y) respects this point's constraint
        (boundary membership is checked by the caller, which owns the
        reference image)."""
        if self.constraint == FIXED:
            return False
        if self.constraint == REGION:
            x0, y0, x1, y1 = self.region
            return x0 <= x <= x1 and y0 <= y <= y1
        return True


@dataclass
class ControlPointSet:
    points: list[ControlPoint]
    edges: list[tuple[int, int]]
    width: int
    height: int

    def __post_init__(self):
        n = len(self.points)
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop edge ({i}, {j})")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for {n} points")

    def coords(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.points], dtype=float)

    def with_coords(self, coords: np.ndarray) -> "ControlPointSet":
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (len(self.points), 2):
            raise ValueError("coordinate array shape mismatch")
        pts = [replace(p, x=float(c[0]), y=float(c[1]))
               for p, c in zip(self.points, coords)]
        return ControlPointSet(pts, list(self.edges), self.width, self.height)

    def render(self) -> np.ndarray:
        return render(self.coords(), self.edges, self.width, self.height)

    def clamped(self) -> "ControlPointSet":
        c = self.coords()
        c[:, 0] = np.clip(c[:, 0], 0, self.width - 1)
        c[:, 1] = np.clip(c[:, 1], 0, self.height - 1)
        return self.with_coords(c)


def check_same_structure(s1: ControlPointSet, s2: ControlPointSet):
    if len(s1.points) != len(s2.points):
        raise ValueError(
            f"point counts differ: {len(s1.points)} vs {len(s2.points)}")
    if list(s1.edges) != list(s2.edges):
        raise ValueError("edge lists differ; shapes are not from one prototype")
    if (s1.width, s1.height) != (s2.width, s2.height):
        raise ValueError("canvas sizes differ")


def interpolate_cp(s1: ControlPointSet, s2: ControlPointSet, w: float,
                   mode: str = "interpolate") -> ControlPointSet:
    """Blend two shapes sharing one prototype.

    interpolate: (1 - w) * s1 + w * s2 with w in [0, 1].
    extrapolate: s1 + w * (s1 - s2) with w in [0, 1], pushing s1 away
    from s2.  Results are clamped to the canvas; edges come from s1.
    """
    check_same_structure(s1, s2)
    c1, c2 = s1.coords(), s2.coords()
    if mode == "interpolate":
        c = (1.0 - w) * c1 + w * c2
    elif mode == "extrapolate":
        c = c1 + w * (c1 - c2)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return s1.with_coords(c).clamped()


@dataclass
class PrototypeSpec:
    """Class-level initial shape; renders the canonical synthetic image."""
    class_label: str
    shape: ControlPointSet

    def __post_init__(self):
        if not self.shape.render().any():
            raise ValueError("prototype renders to an empty image")


def _wall_point(x, y, slack):
    # slides along a vertical wall segment: x pinned, y free within slack
    return ControlPoint(x, y, REGION, (x, y - slack, x, y + slack))


def _boxed_point(x, y, slack):
    return ControlPoint(x, y, REGION,
                        (x - slack, y - slack, x + slack, y + slack))


def roof_prototype(style: str, size: int = 64) -> PrototypeSpec:
    """Built-in roof edge prototypes: gable, hip, pyramid.

    Roof images are cut out along registered building footprints, so the
    rectangular outline is pinned (fixed corners); only the ridge points
    move.  Gable ridge endpoints slide along the end walls, hip ridge
    endpoints and the pyramid apex move inside small interior regions.
    """
    x0 = y0 = size // 8
    x1 = y1 = size - size // 8 - 1
    cy = (y0 + y1) // 2
    slack = size // 8
    corners = [ControlPoint(x0, y0, FIXED), ControlPoint(x1, y0, FIXED),
               ControlPoint(x1, y1, FIXED), ControlPoint(x0, y1, FIXED)]
    outline = [(0, 1), (1, 2), (2, 3), (3, 0)]
    if style == "gable":
        pts = corners + [_wall_point(x0, cy, slack), _wall_point(x1, cy, slack)]
        edges = outline + [(4, 5)]
    elif style == "hip":
        rx0 = x0 + (x1 - x0) // 3
        rx1 = x1 - (x1 - x0) // 3
        pts = corners + [_boxed_point(rx0, cy, slack), _boxed_point(rx1, cy, slack)]
        edges = outline + [(4, 5), (0, 4), (3, 4), (1, 5), (2, 5)]
    elif style == "pyramid":
        cx = (x0 + x1) // 2
        pts = corners + [_boxed_point(cx, cy, slack)]
        edges = outline + [(0, 4), (1, 4), (2, 4), (3, 4)]
    else:
        raise ValueError(f"unknown roof style {style!r}")
    return PrototypeSpec(style, ControlPointSet(pts, edges, size, size))


ROOF_STYLES = ("gable", "hip", "pyramid")
