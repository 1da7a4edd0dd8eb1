"""Raster geometry: line rendering, distance transforms, shape distance.

Binary images are 2-d boolean arrays indexed [y, x]; gray images and
distance fields are 2-d float arrays of the same orientation.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage


def line_pixels(x0: int, y0: int, x1: int, y1: int):
    """Integer line stepping between two pixels, endpoints included."""
    pixels = []
    dx = abs(x1 - x0)
    sx = 1 if x0 < x1 else -1
    dy = -abs(y1 - y0)
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        pixels.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
    return pixels


def render(points: np.ndarray, edges, width: int, height: int) -> np.ndarray:
    """Rasterize each edge as a 1-pixel-wide segment; union of all edges.

    points is an (n, 2) array of continuous (x, y) coordinates, rounded to
    the nearest pixel before stepping.  No edges yields an all-background
    image; a point outside the canvas is an error.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    img = np.zeros((height, width), dtype=bool)
    if pts.size:
        xs, ys = pts[:, 0], pts[:, 1]
        if (xs.min() < 0 or ys.min() < 0
                or xs.max() > width - 1 or ys.max() > height - 1):
            raise ValueError(
                f"control point outside {width}x{height} canvas")
    ipts = np.rint(pts).astype(int)
    for i, j in edges:
        x0, y0 = ipts[i]
        x1, y1 = ipts[j]
        for x, y in line_pixels(x0, y0, x1, y1):
            img[y, x] = True
    return img


def distance_to_foreground(image: np.ndarray) -> np.ndarray:
    """Unsigned Euclidean distance from every pixel to the nearest
    foreground pixel.  All-background images get +inf everywhere."""
    image = np.asarray(image, dtype=bool)
    if not image.any():
        return np.full(image.shape, np.inf)
    return ndimage.distance_transform_edt(~image)


def distance_transform(image: np.ndarray) -> np.ndarray:
    """Exact signed Euclidean distance field of a binary image.

    Negative inside the foreground (distance to nearest background pixel),
    positive outside (distance to nearest foreground pixel).  Degenerate
    conventions: an all-foreground image returns all zeros, an
    all-background image returns +inf everywhere.
    """
    image = np.asarray(image, dtype=bool)
    if image.all():
        return np.zeros(image.shape, dtype=float)
    if not image.any():
        return np.full(image.shape, np.inf)
    outside = ndimage.distance_transform_edt(~image)
    inside = ndimage.distance_transform_edt(image)
    return outside - inside


def binarize(field: np.ndarray) -> np.ndarray:
    """Foreground wherever the field is at or below zero."""
    return np.asarray(field, dtype=float) <= 0.0


def image_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Symmetric mean chamfer distance between two binary images."""
    u = np.asarray(u, dtype=bool)
    v = np.asarray(v, dtype=bool)
    if u.shape != v.shape:
        raise ValueError(f"image shapes differ: {u.shape} vs {v.shape}")
    if not u.any() or not v.any():
        raise ValueError("chamfer distance undefined for an empty image")
    d_to_v = ndimage.distance_transform_edt(~v)
    d_to_u = ndimage.distance_transform_edt(~u)
    return 0.5 * (float(d_to_v[u].mean()) + float(d_to_u[v].mean()))


def chamfer_to(reference: np.ndarray):
    """Precompute the one-sided fields of a fixed reference image and
    return a callable computing image_distance(reference, other)."""
    reference = np.asarray(reference, dtype=bool)
    if not reference.any():
        raise ValueError("chamfer distance undefined for an empty image")
    d_to_ref = ndimage.distance_transform_edt(~reference)

    def dist(other: np.ndarray) -> float:
        other = np.asarray(other, dtype=bool)
        if not other.any():
            raise ValueError("chamfer distance undefined for an empty image")
        d_to_other = ndimage.distance_transform_edt(~other)
        return 0.5 * (float(d_to_other[reference].mean())
                      + float(d_to_ref[other].mean()))

    return dist


def boundary_mask(image: np.ndarray) -> np.ndarray:
    """Foreground pixels with at least one background 4-neighbor (image
    borders count as background)."""
    image = np.asarray(image, dtype=bool)
    padded = np.pad(image, 1, constant_values=False)
    interior = (padded[:-2, 1:-1] & padded[2:, 1:-1]
                & padded[1:-1, :-2] & padded[1:-1, 2:])
    return image & ~interior


def block_means(image: np.ndarray, block: int) -> np.ndarray:
    """Mean of each block x block tile, flattened row-major to a vector."""
    a = np.asarray(image, dtype=float)
    h, w = a.shape
    if h % block or w % block:
        raise ValueError(f"{h}x{w} image not divisible into {block}x{block} tiles")
    return (a.reshape(h // block, block, w // block, block)
             .mean(axis=(1, 3)).ravel())
