"""Joint alignment of a binary image stack by entropy minimization.

Each image gets its own affine transform (translation, rotation,
per-axis log scale, shear).  Parameters are adjusted one at a time on a
halving step grid; a step is kept only when it strictly lowers the
pixelwise stack entropy, so the entropy trace never increases.  The
aligned mean image serves as the class prototype.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

PARAM_NAMES = ("tx", "ty", "rotation", "log_scale_x", "log_scale_y", "shear")

# initial grid steps and hard bounds per parameter
_INITIAL_STEPS = np.array([2.0, 2.0, 0.10, 0.05, 0.05, 0.05])
_BOUNDS = np.array([8.0, 8.0, 0.35, 0.25, 0.25, 0.25])


def transform_image(image: np.ndarray, params: np.ndarray) -> np.ndarray:
    """Apply an affine transform about the image center with bilinear
    resampling, then threshold back to binary at 0.5."""
    tx, ty, rot, lsx, lsy, shear = params
    h, w = image.shape
    center = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
    c, s = np.cos(rot), np.sin(rot)
    rotation = np.array([[c, -s], [s, c]])            # acts on (y, x)
    scale = np.diag([np.exp(lsy), np.exp(lsx)])
    shear_m = np.array([[1.0, shear], [0.0, 1.0]])
    forward = rotation @ shear_m @ scale
    inverse = np.linalg.inv(forward)
    offset = center - inverse @ (center + np.array([ty, tx]))
    warped = ndimage.affine_transform(image.astype(float), inverse,
                                      offset=offset, order=1, mode="constant")
    return warped >= 0.5


def stack_entropy_from_mean(mean: np.ndarray) -> float:
    """Sum over pixels of the Bernoulli entropy of the stack mean."""
    p = np.clip(mean, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log(p), 0.0)
              + np.where(p < 1, (1 - p) * np.log(1 - p), 0.0))
    return float(h.sum())


def stack_entropy(images) -> float:
    return stack_entropy_from_mean(np.mean([i.astype(float) for i in images],
                                           axis=0))


@dataclass
class CongealResult:
    prototype: np.ndarray          # mean aligned image, values in [0, 1]
    transforms: np.ndarray         # (n_images, 6) parameter rows
    entropy_trace: list[float]     # entropy after every accepted step


def congeal(images, rounds: int = 4, passes_per_round: int = 4) -> CongealResult:
    """Align the stack and return the mean prototype.

    Steps halve once per round; within a round, full passes over images
    and parameters repeat until one pass accepts nothing.
    """
    if len(images) < 2:
        raise ValueError("congealing needs at least two images")
    shapes = {im.shape for im in images}
    if len(shapes) != 1:
        raise ValueError(f"images differ in size: {sorted(shapes)}")

    n = len(images)
    params = np.zeros((n, 6))
    warped = [im.astype(bool).copy() for im in images]
    total = np.sum([w.astype(float) for w in warped], axis=0)
    entropy = stack_entropy_from_mean(total / n)
    trace = [entropy]

    steps = _INITIAL_STEPS.copy()
    for _ in range(rounds):
        for _ in range(passes_per_round):
            improved = False
            for i in range(n):
                for j in range(6):
                    for sign in (1.0, -1.0):
                        candidate = params[i].copy()
                        candidate[j] += sign * steps[j]
                        if abs(candidate[j]) > _BOUNDS[j]:
                            continue
                        new_w = transform_image(images[i], candidate)
                        new_total = total - warped[i] + new_w
                        e = stack_entropy_from_mean(new_total / n)
                        if e < entropy - 1e-12:
                            params[i] = candidate
                            total = new_total
                            warped[i] = new_w
                            entropy = e
                            trace.append(e)
                            improved = True
                            break
            if not improved:
                break
        steps /= 2.0

    return CongealResult(total / n, params, trace)


# ---------------------------------------------------------------------------
# boundary sampling on the congealed prototype
# ---------------------------------------------------------------------------

_MOORE = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)]


def _largest_component(mask: np.ndarray) -> np.ndarray:
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        raise ValueError("prototype has no foreground at threshold 0.5")
    sizes = ndimage.sum_labels(np.ones_like(labels), labels,
                               index=np.arange(1, count + 1))
    return labels == (int(np.argmax(sizes)) + 1)


def trace_boundary(mask: np.ndarray) -> list[tuple[int, int]]:
    """Moore-neighbor boundary trace of the largest 8-connected component.

    Returns the closed contour as an ordered list of (x, y) pixels,
    starting from the topmost-leftmost foreground pixel and walking
    clockwise.  A single isolated pixel traces to itself.
    """
    comp = _largest_component(mask)
    ys, xs = np.nonzero(comp)
    order = np.lexsort((xs, ys))
    start = (int(ys[order[0]]), int(xs[order[0]]))

    def fg(p):
        y, x = p
        return 0 <= y < comp.shape[0] and 0 <= x < comp.shape[1] and comp[y, x]

    contour = [start]
    # enter from the pixel above the start (known background)
    prev_dir = 6  # pointing west initially; first probe starts north-west
    current = start
    backtrack = 0
    while True:
        found = False
        for t in range(8):
            d = (prev_dir + 1 + t) % 8
            cand = (current[0] + _MOORE[d][0], current[1] + _MOORE[d][1])
            if fg(cand):
                contour.append(cand)
                # new search starts from the neighbor we came from
                prev_dir = (d + 4) % 8
                current = cand
                found = True
                break
        if not found:
            break  # isolated pixel
        if current == start:
            backtrack += 1
            if backtrack >= 1:
                break
        if len(contour) > 8 * comp.sum() + 8:
            break  # safety net; cannot trigger on sane masks
    if contour[-1] == start and len(contour) > 1:
        contour.pop()
    return [(x, y) for (y, x) in contour]


def sample_boundary_points(prototype: np.ndarray, n: int):
    """Evenly spaced points along the prototype's traced boundary.

    The prototype (gray, values in [0, 1]) is thresholded at 0.5; n points
    are placed at equal arc length along the contour of the largest
    component and joined into a closed loop.  Returns a ControlPointSet.
    """
    from .shapes import ControlPoint, ControlPointSet

    if n < 3:
        raise ValueError("need at least 3 boundary points")
    mask = np.asarray(prototype, dtype=float) >= 0.5
    if not mask.any():
        raise ValueError("prototype has an empty boundary")
    contour = trace_boundary(mask)
    if len(contour) < 1:
        raise ValueError("prototype has an empty boundary")
    pts = np.array(contour, dtype=float)
    closed = np.vstack([pts, pts[:1]])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total == 0:  # single-pixel contour
        chosen = [tuple(pts[0])] * n
    else:
        targets = np.arange(n) * total / n
        xs = np.interp(targets, cum, closed[:, 0])
        ys = np.interp(targets, cum, closed[:, 1])
        chosen = list(zip(xs, ys))
    h, w = mask.shape
    points = [ControlPoint(float(x), float(y)) for x, y in chosen]
    edges = [(i, (i + 1) % n) for i in range(n)]
    return ControlPointSet(points, edges, w, h)
