import dataclasses

import pytest

from pathlink.model import box_iou, contains
from pathlink.synth import SynthConfig, generate_scenario, uniform_frames

NOISELESS = SynthConfig(seed=3, n_objects=3, n_frames=80, fps=10.0)

NOISY = SynthConfig(
    seed=5, n_objects=4, n_frames=120, fps=10.0,
    miss_rate=0.2, fp_rate=0.5, center_jitter=0.05, size_jitter=0.05,
    score_noise=0.4, track_survival=0.98, background_tracks=10,
    cursor_lag_frames=2, cursor_noise=0.05,
    cursor_excursion_rate=0.1, cursor_excursion_len=4,
)


class TestDeterminism:
    def test_same_seed_identical(self):
        a = generate_scenario(NOISY)
        b = generate_scenario(dataclasses.replace(NOISY))
        assert a.detections == b.detections
        assert a.tracks == b.tracks
        assert a.paths == b.paths
        assert a.boxes == b.boxes
        assert [(t.path_id, t.entries) for t in a.ground_truth] == \
               [(t.path_id, t.entries) for t in b.ground_truth]

    def test_different_seed_differs(self):
        a = generate_scenario(NOISY)
        b = generate_scenario(dataclasses.replace(NOISY, seed=6))
        assert a.detections != b.detections


class TestNoiselessLimit:
    def test_detections_equal_ground_truth(self):
        sc = generate_scenario(NOISELESS)
        gt = {t.path_id: t for t in sc.ground_truth}
        by_frame = {}
        for d in sc.detections:
            by_frame.setdefault(d.frame, []).append(d)
        n_gt = sum(len(t.entries) for t in sc.ground_truth)
        assert len(sc.detections) == n_gt
        for t in sc.ground_truth:
            for f, (box, _) in t.entries.items():
                assert any(d.box == box for d in by_frame[f])

    def test_paths_equal_centers(self):
        sc = generate_scenario(NOISELESS)
        gt = {t.path_id: t for t in sc.ground_truth}
        for p in sc.paths:
            t = gt[p.path_id]
            for f, (px, py) in p.samples.items():
                box = t.entries[f][0]
                assert px == pytest.approx(box.cx)
                assert py == pytest.approx(box.cy)

    def test_scores_confident(self):
        sc = generate_scenario(NOISELESS)
        assert all(d.score > 0.9 for d in sc.detections)


class TestDegenerate:
    def test_all_missed_leaves_only_false_positives(self):
        cfg = dataclasses.replace(NOISY, miss_rate=1.0, fp_rate=0.3)
        sc = generate_scenario(cfg)
        gt_boxes = {
            (t.path_id, f): box
            for t in sc.ground_truth for f, (box, _) in t.entries.items()
        }
        for d in sc.detections:
            ious = [box_iou(d.box, b) for (pid, f), b in gt_boxes.items() if f == d.frame]
            assert max(ious, default=0.0) < 0.999


class TestInvariants:
    def test_track_points_ride_their_object(self):
        sc = generate_scenario(NOISELESS)
        gt = {t.path_id: t for t in sc.ground_truth}
        obj_of = lambda tid: f"p{int(tid[1:3]):02d}"
        for track in sc.tracks:
            traj = gt[obj_of(track.track_id)]
            for k, (x, y) in enumerate(track.points):
                frame = track.start_frame + k
                assert contains(traj.entries[frame][0], (x, y))

    def test_cursor_inside_fraction(self):
        sc = generate_scenario(NOISY)
        gt = {t.path_id: t for t in sc.ground_truth}
        rate = NOISY.cursor_excursion_rate
        for p in sc.paths:
            traj = gt[p.path_id]
            inside = sum(
                1 for f, s in p.samples.items() if contains(traj.entries[f][0], s)
            )
            assert inside >= (1.0 - rate) * len(p.samples)

    def test_scores_correlate_with_iou(self):
        sc = generate_scenario(dataclasses.replace(NOISY, score_noise=0.0))
        gt = {t.path_id: t for t in sc.ground_truth}
        pairs = []
        for d in sc.detections:
            best = max(
                (box_iou(d.box, t.entries[d.frame][0])
                 for t in gt.values() if d.frame in t.entries),
                default=0.0,
            )
            pairs.append((best, d.score))
        lows = [s for iou, s in pairs if iou < 0.2]
        highs = [s for iou, s in pairs if iou > 0.8]
        assert highs and lows
        assert min(highs) > max(lows)

    def test_three_boxes_first_middle_last(self):
        sc = generate_scenario(NOISELESS)
        gt = {t.path_id: t for t in sc.ground_truth}
        by_path = {}
        for b in sc.boxes:
            by_path.setdefault(b.path_id, []).append(b)
        for pid, boxes in by_path.items():
            t = gt[pid]
            first, last = t.first_frame, t.last_frame
            frames = sorted(b.frame for b in boxes)
            assert frames == [first, round((first + last) / 2), last]
            for b in boxes:
                assert b.box == t.entries[b.frame][0]


class TestUniformFrames:
    def test_budget_zero(self):
        assert uniform_frames(0, 10, 0) == []

    def test_budget_one_is_middle(self):
        assert uniform_frames(0, 10, 1) == [5]

    def test_budget_covers_endpoints(self):
        assert uniform_frames(0, 10, 2) == [0, 10]
        assert uniform_frames(0, 10, 3) == [0, 5, 10]

    def test_budget_beyond_span_dedupes(self):
        frames = uniform_frames(0, 4, 11)
        assert frames == [0, 1, 2, 3, 4]


def test_write_dir_round_trips(tmp_path):
    from pathlink import io as record_io

    sc = generate_scenario(NOISY)
    sc.write_dir(tmp_path / "scn")
    dets = record_io.read_file("detections", tmp_path / "scn" / "detections.jsonl")
    assert dets == sc.detections
    paths = record_io.read_file("paths", tmp_path / "scn" / "paths.jsonl")
    assert paths == sc.paths
    tracks = record_io.read_file("tracks", tmp_path / "scn" / "tracks.jsonl")
    key = lambda t: t.track_id
    assert sorted(tracks, key=key) == sorted(sc.tracks, key=key)


def test_infeasible_config_rejected():
    with pytest.raises(ValueError):
        SynthConfig(miss_rate=1.5)
    with pytest.raises(ValueError):
        SynthConfig(arena_w=50.0, arena_h=50.0)
    with pytest.raises(ValueError):
        SynthConfig(n_frames=1)
