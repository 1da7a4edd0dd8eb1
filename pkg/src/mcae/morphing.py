"""Control-point migration through distance-field morphs, and second-stage
synthesis by interpolating/extrapolating between recovered shapes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import binarize, boundary_mask, distance_transform
from .shapes import ControlPointSet, check_same_structure, interpolate_cp


class MigrationError(RuntimeError):
    pass


def snap_to_boundary(points: np.ndarray, image: np.ndarray) -> np.ndarray:
    """Move every (x, y) point to the nearest boundary pixel of the image;
    ties broken by smallest (y, x)."""
    by, bx = np.nonzero(boundary_mask(image))
    if by.size == 0:
        raise MigrationError("image has no boundary pixels to snap to")
    # boundary pixels in (y, x) lexicographic order so argmin tie-breaks
    order = np.lexsort((bx, by))
    by, bx = by[order], bx[order]
    out = np.empty_like(np.asarray(points, dtype=float))
    for i, (px, py) in enumerate(points):
        d2 = (bx - px) ** 2 + (by - py) ** 2
        j = int(np.argmin(d2))
        out[i] = (bx[j], by[j])
    return out


def migrate_control_points(u: np.ndarray, v: np.ndarray, s: ControlPointSet,
                           steps: int = 10) -> ControlPointSet:
    """Walk the shape's points from the prototype image v onto the real
    image u.

    Both images are converted to signed distance fields; at step i the
    fields are blended with weight i/steps toward u's field, binarized,
    and every point snaps to the nearest boundary pixel of the blend.
    After the final step all points lie on u's boundary.
    """
    u = np.asarray(u, dtype=bool)
    v = np.asarray(v, dtype=bool)
    if u.shape != v.shape:
        raise ValueError(f"image shapes differ: {u.shape} vs {v.shape}")
    for name, im in (("destination", u), ("prototype", v)):
        if not im.any() or im.all():
            raise ValueError(f"{name} image must contain both classes")
    fu = distance_transform(u)
    fv = distance_transform(v)
    coords = s.coords()
    for i in range(1, steps + 1):
        t = i / steps
        blend = (1.0 - t) * fv + t * fu
        shape = binarize(blend)
        if not shape.any():
            raise MigrationError(f"morph produced an empty image at step {i}")
        coords = snap_to_boundary(coords, shape)
    return s.with_coords(coords)


@dataclass
class Syn2Draw:
    label: str
    first: int      # indices into that class's pool of shapes
    second: int
    mode: str       # "interpolate" or "extrapolate"
    weight: float


@dataclass
class Syn2Result:
    samples: list          # (label, BinaryImage) pairs
    shapes: list           # (label, ControlPointSet), parallel to samples
    draws: list            # Syn2Draw per sample, for replay
    skipped: list          # labels with fewer than two shapes


def generate_syn2(corpus, per_class: int, seed: int = 0) -> Syn2Result:
    """Second-stage synthetic images from pairs of first-stage shapes.

    corpus is a list of (label, ControlPointSet).  For every class,
    per_class samples are drawn: a random pair of shapes (without
    replacement within the draw), a fifty-fifty interpolate/extrapolate
    choice, and a weight uniform on [0, 1].  Deterministic given seed;
    classes with fewer than two shapes are skipped and recorded.
    """
    rng = np.random.default_rng(seed)
    by_class: dict = {}
    for label, shape in corpus:
        by_class.setdefault(label, []).append(shape)

    result = Syn2Result([], [], [], [])
    for label in sorted(by_class, key=str):
        pool = by_class[label]
        if len(pool) < 2:
            result.skipped.append(label)
            continue
        for _ in range(per_class):
            i, j = rng.choice(len(pool), size=2, replace=False)
            mode = "interpolate" if rng.random() < 0.5 else "extrapolate"
            w = float(rng.random())
            check_same_structure(pool[i], pool[j])
            shape = interpolate_cp(pool[i], pool[j], w, mode=mode)
            result.samples.append((label, shape.render()))
            result.shapes.append((label, shape))
            result.draws.append(Syn2Draw(label, int(i), int(j), mode, w))
    return result
