import math
import random

import pytest

from pathlink.model import (
    Box,
    Detection,
    EngineConfig,
    PathAnnotation,
    PointTrack,
    box_iou,
    clamp_score,
    contains,
    lerp_box,
)


class TestBoxIou:
    def test_identical_boxes(self):
        b = Box(3.0, 4.0, 10.0, 20.0)
        assert box_iou(b, b) == 1.0

    def test_disjoint_boxes(self):
        assert box_iou(Box(0, 0, 10, 10), Box(20, 20, 5, 5)) == 0.0

    def test_half_overlap(self):
        # inter = 50, union = 150
        a = Box(0, 0, 10, 10)
        b = Box(5, 0, 10, 10)
        assert box_iou(a, b) == pytest.approx(1.0 / 3.0)

    def test_touching_edges_do_not_overlap(self):
        assert box_iou(Box(0, 0, 10, 10), Box(10, 0, 10, 10)) == 0.0

    def test_symmetry_and_bounds_random(self):
        rnd = random.Random(7)
        for _ in range(500):
            a = Box(rnd.uniform(-50, 50), rnd.uniform(-50, 50),
                    rnd.uniform(1, 40), rnd.uniform(1, 40))
            b = Box(rnd.uniform(-50, 50), rnd.uniform(-50, 50),
                    rnd.uniform(1, 40), rnd.uniform(1, 40))
            iou = box_iou(a, b)
            assert 0.0 <= iou <= 1.0
            assert iou == box_iou(b, a)


class TestContains:
    def test_interior_point(self):
        assert contains(Box(0, 0, 10, 10), (5, 5))

    def test_boundary_is_inside(self):
        assert contains(Box(0, 0, 10, 10), (10, 10))
        assert contains(Box(0, 0, 10, 10), (0, 0))

    def test_outside(self):
        assert not contains(Box(0, 0, 10, 10), (11, 5))


class TestLerpBox:
    def test_endpoints_exact(self):
        a = Box(1, 2, 3, 4)
        b = Box(9, 8, 7, 6)
        assert lerp_box(a, b, 0.0) == a
        assert lerp_box(a, b, 1.0) == b

    def test_midpoint_center_size(self):
        mid = lerp_box(Box(0, 0, 10, 10), Box(10, 10, 20, 20), 0.5)
        assert mid.cx == pytest.approx(12.5)
        assert mid.cy == pytest.approx(12.5)
        assert mid.w == pytest.approx(15.0)
        assert mid.h == pytest.approx(15.0)
        assert mid == Box(5.0, 5.0, 15.0, 15.0)

    def test_degenerate_same_box(self):
        a = Box(2, 2, 5, 5)
        for t in (0.0, 0.3, 1.0):
            assert lerp_box(a, a, t) == a

    def test_monotone_per_component(self):
        a = Box(0, 0, 10, 10)
        b = Box(30, 40, 20, 16)
        prev = lerp_box(a, b, 0.0)
        for k in range(1, 11):
            cur = lerp_box(a, b, k / 10)
            assert cur.cx >= prev.cx and cur.cy >= prev.cy
            assert cur.w >= prev.w and cur.h >= prev.h
            prev = cur


class TestTypes:
    def test_box_rejects_nonpositive_size(self):
        with pytest.raises(ValueError):
            Box(0, 0, 0, 5)
        with pytest.raises(ValueError):
            Box(0, 0, 5, -1)

    def test_box_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Box(math.nan, 0, 5, 5)

    def test_detection_score_range(self):
        with pytest.raises(ValueError):
            Detection(id="d", frame=0, box=Box(0, 0, 1, 1), score=1.0)
        with pytest.raises(ValueError):
            Detection(id="d", frame=-1, box=Box(0, 0, 1, 1), score=0.5)

    def test_clamp_score(self):
        assert clamp_score(1.2) == pytest.approx(1.0 - 1e-4)
        assert clamp_score(0.0) == pytest.approx(1e-4)
        assert clamp_score(0.5) == 0.5
        s = clamp_score(1.0)
        assert math.isfinite(math.log((1 - s) / s))

    def test_path_requires_contiguity(self):
        with pytest.raises(ValueError):
            PathAnnotation(path_id="p", samples={0: (0, 0), 2: (1, 1)})
        p = PathAnnotation(path_id="p", samples={3: (0, 0), 4: (1, 1), 5: (2, 2)})
        assert p.first_frame == 3 and p.last_frame == 5 and p.span_len == 3

    def test_track_positions(self):
        t = PointTrack(track_id="t", start_frame=10, points=((0, 0), (1, 1)))
        assert t.end_frame == 11
        assert t.position_at(10) == (0, 0)
        assert t.position_at(11) == (1, 1)
        assert t.position_at(9) is None
        assert t.position_at(12) is None
        with pytest.raises(ValueError):
            PointTrack(track_id="t", start_frame=0, points=())


class TestEngineConfig:
    def test_frame_conversions(self):
        cfg = EngineConfig(fps=10.0)
        assert cfg.window_frames == 40
        assert cfg.st_attach_frames == 5
        assert cfg.box_removal_frames == pytest.approx(5.0)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            EngineConfig(fps=0)
        with pytest.raises(ValueError):
            EngineConfig(fps=10, affinity_floor=1.5)
        with pytest.raises(ValueError):
            EngineConfig(fps=10, max_label_sweeps=0)
