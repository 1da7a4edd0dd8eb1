import numpy as np
import pytest
from scipy.ndimage import binary_fill_holes

from mcae.congeal import (congeal, sample_boundary_points, stack_entropy,
                          trace_boundary, transform_image)
from mcae.shapes import roof_prototype


def blob(size=32):
    return binary_fill_holes(roof_prototype("gable", size).shape.render())


class TestTransformImage:
    def test_identity(self):
        img = blob()
        out = transform_image(img, np.zeros(6))
        assert np.array_equal(out, img)

    def test_translation(self):
        img = blob()
        out = transform_image(img, np.array([3.0, 0, 0, 0, 0, 0]))
        assert np.array_equal(out, np.roll(img, 3, axis=1))


class TestEntropy:
    def test_identical_stack_zero(self):
        img = blob()
        assert stack_entropy([img, img, img]) == pytest.approx(0.0)

    def test_misaligned_stack_positive(self):
        img = blob()
        assert stack_entropy([img, np.roll(img, 2, axis=0)]) > 0.0


class TestCongeal:
    def test_needs_two_images(self):
        with pytest.raises(ValueError):
            congeal([blob()])

    def test_identical_images_stay_put(self):
        img = blob()
        result = congeal([img, img, img])
        assert result.entropy_trace[-1] == pytest.approx(0.0)
        assert np.allclose([t[:2] for t in result.transforms], 0.0, atol=1e-9)
        assert np.array_equal(result.prototype >= 0.5, img)

    def test_translations_recovered(self):
        base = blob()
        shifts = [(0, 0), (2, 0), (-1, 1), (0, -2), (3, 1), (-2, -1)]
        imgs = [np.roll(np.roll(base, dy, axis=0), dx, axis=1)
                for dx, dy in shifts]
        result = congeal(imgs)
        recovered = np.array([t[:2] for t in result.transforms])
        truth = -np.array(shifts, dtype=float)
        # alignment is defined up to a common shift of the whole stack
        rel = (recovered - recovered.mean(axis=0)) - (truth - truth.mean(axis=0))
        assert np.abs(rel).max() <= 1.0

    def test_entropy_trace_monotone(self):
        base = blob()
        imgs = [np.roll(base, s, axis=0) for s in (0, 2, -2, 1)]
        trace = congeal(imgs).entropy_trace
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))


class TestTraceBoundary:
    def test_square_loop(self):
        mask = np.zeros((10, 10), dtype=bool)
        mask[2:7, 2:7] = True
        contour = trace_boundary(mask)
        # 5x5 square: 16 boundary pixels, each visited once
        assert len(set(contour)) == 16
        ys = [p[0] for p in contour]
        xs = [p[1] for p in contour]
        assert min(ys) == 2 and max(ys) == 6
        assert min(xs) == 2 and max(xs) == 6

    def test_closed_and_connected(self):
        contour = np.array(trace_boundary(blob(24)))
        steps = np.abs(np.diff(np.vstack([contour, contour[:1]]), axis=0))
        assert steps.max() <= 1


class TestSampleBoundaryPoints:
    def test_square_quarters(self):
        proto = np.zeros((12, 12))
        proto[2:10, 2:10] = 1.0
        shape = sample_boundary_points(proto, 4)
        assert len(shape.points) == 4
        # closed loop over consecutive points
        assert sorted(shape.edges) == [(0, 1), (1, 2), (2, 3), (3, 0)]

    def test_even_arc_spacing(self):
        shape = sample_boundary_points(blob(32).astype(float), 12)
        c = shape.coords()
        gaps = np.linalg.norm(np.diff(np.vstack([c, c[:1]]), axis=0), axis=1)
        assert gaps.max() - gaps.min() <= 1.0 + 1e-9

    def test_empty_prototype_rejected(self):
        with pytest.raises(ValueError):
            sample_boundary_points(np.zeros((8, 8)), 4)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            sample_boundary_points(blob(16).astype(float), 2)
