"""Fitting a control-point shape to a real binary image.

A coordinate-descent sweep tries unit moves of each point in turn and
keeps only moves that strictly reduce the chamfer distance between the
real image and the rendered shape, so the distance never increases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import boundary_mask, chamfer_to
from .shapes import BOUNDARY, ControlPointSet, PrototypeSpec

# fixed evaluation order: north, east, south, west (y grows downward)
UNIT_MOVES = ((0, -1), (1, 0), (0, 1), (-1, 0))

# paired endpoint moves for one edge: both endpoints shifted one unit,
# either together (translation) or in opposite directions (rotation).
# Needed because a slanted edge approximated by a straight one is a
# strict local minimum under single-point moves.
EDGE_MOVES = tuple((m, m) for m in UNIT_MOVES) + \
             tuple((m, (-m[0], -m[1])) for m in UNIT_MOVES)


def _point_ok(point, u_boundary, s, nx, ny):
    if not (0 <= nx <= s.width - 1 and 0 <= ny <= s.height - 1):
        return False
    if not point.allows(nx, ny):
        return False
    if point.constraint == BOUNDARY:
        ix, iy = int(round(nx)), int(round(ny))
        if not u_boundary[iy, ix]:
            return False
    return True


def optimize_cp_coordinate_descent(u: np.ndarray, s: ControlPointSet,
                                   dist_to_u=None):
    """One full sweep of single-pixel moves over all control points.

    For each point the four axis moves are evaluated in fixed order and
    the best strictly improving one is taken; a second phase does the
    same for paired endpoint moves of each edge.  Moves breaking a
    point's constraint or leaving the canvas are skipped.  Returns
    (new set, moved_any, final distance).
    """
    dist = dist_to_u or chamfer_to(u)
    u_boundary = boundary_mask(u)
    coords = s.coords()
    current = dist(s.with_coords(coords).render())
    moved_any = False
    for i, point in enumerate(s.points):
        best = None
        best_d = current
        for dx, dy in UNIT_MOVES:
            nx, ny = coords[i, 0] + dx, coords[i, 1] + dy
            if not _point_ok(point, u_boundary, s, nx, ny):
                continue
            trial = coords.copy()
            trial[i] = (nx, ny)
            d = dist(s.with_coords(trial).render())
            if d < best_d:
                best_d = d
                best = (nx, ny)
        if best is not None:
            coords[i] = best
            current = best_d
            moved_any = True
    for i, j in s.edges:
        best = None
        best_d = current
        for (dxi, dyi), (dxj, dyj) in EDGE_MOVES:
            ni = (coords[i, 0] + dxi, coords[i, 1] + dyi)
            nj = (coords[j, 0] + dxj, coords[j, 1] + dyj)
            if not (_point_ok(s.points[i], u_boundary, s, *ni)
                    and _point_ok(s.points[j], u_boundary, s, *nj)):
                continue
            trial = coords.copy()
            trial[i] = ni
            trial[j] = nj
            d = dist(s.with_coords(trial).render())
            if d < best_d:
                best_d = d
                best = (ni, nj)
        if best is not None:
            coords[i], coords[j] = best
            current = best_d
            moved_any = True
    return s.with_coords(coords), moved_any, current


@dataclass
class MatchResult:
    shape: ControlPointSet
    image: np.ndarray
    converged: bool
    distances: list[float]   # chamfer distance after each sweep, [0] = initial


def match_synthetic(u: np.ndarray, proto: PrototypeSpec,
                    max_sweeps: int = 100) -> MatchResult:
    """Iterate coordinate-descent sweeps until no point moves.

    Returns the final shape and its rendering; converged is False when the
    sweep cap is hit first.
    """
    if proto.shape.render().shape != np.asarray(u).shape:
        raise ValueError("prototype canvas does not match the image size")
    dist = chamfer_to(u)
    s = proto.shape
    distances = [dist(s.render())]
    converged = False
    for _ in range(max_sweeps):
        s, moved, d = optimize_cp_coordinate_descent(u, s, dist_to_u=dist)
        distances.append(d)
        if not moved:
            converged = True
            break
    return MatchResult(s, s.render(), converged, distances)


@dataclass
class CorpusItem:
    label: str
    real: np.ndarray            # pseudo-real rendering of the jittered shape
    syn: ControlPointSet        # recovered shape (renders the Syn I image)
    initial_distance: float
    final_distance: float
    converged: bool


def jitter_shape(shape: ControlPointSet, jitter: float,
                 rng: np.random.Generator) -> ControlPointSet:
    """Offset every movable point by a uniform draw in [-jitter, jitter],
    respecting constraints and the canvas."""
    coords = shape.coords()
    for i, p in enumerate(shape.points):
        if p.constraint == "fixed":
            continue
        nx = coords[i, 0] + rng.uniform(-jitter, jitter)
        ny = coords[i, 1] + rng.uniform(-jitter, jitter)
        nx = float(np.clip(nx, 0, shape.width - 1))
        ny = float(np.clip(ny, 0, shape.height - 1))
        if p.constraint == "region":
            x0, y0, x1, y1 = p.region
            nx = float(np.clip(nx, x0, x1))
            ny = float(np.clip(ny, y0, y1))
        coords[i] = (nx, ny)
    return shape.with_coords(coords)


def make_toy_roof_corpus(styles, n_per_style: int, jitter: float,
                         seed: int = 0) -> list[CorpusItem]:
    """Pseudo-real roof corpus with matching recovered shapes.

    Each prototype is jittered and rendered as the "real" image, then the
    shape is re-fit from the unjittered prototype, giving paired
    (real image, matching synthetic shape) data.
    """
    if jitter < 0:
        raise ValueError("jitter must be nonnegative")
    rng = np.random.default_rng(seed)
    corpus = []
    for proto in styles:
        for _ in range(n_per_style):
            jittered = jitter_shape(proto.shape, jitter, rng)
            real = jittered.render()
            result = match_synthetic(real, proto)
            corpus.append(CorpusItem(
                label=proto.class_label,
                real=real,
                syn=result.shape,
                initial_distance=result.distances[0],
                final_distance=result.distances[-1],
                converged=result.converged,
            ))
    return corpus
