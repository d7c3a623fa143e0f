import math
import random

import pytest

from pathlink.affinity import AffinityGraph, canonical_pair
from pathlink.model import Box, Detection, EngineConfig, PathAnnotation
from pathlink.prelabel import (
    InstanceTooLargeError,
    _Instance,
    brute_force_prelabel,
    prune,
    separation_cost,
    solve_prelabel,
    unary_cost,
)
from conftest import make_frustrated_instance, make_prelabel_instance

CFG = EngineConfig(fps=10.0)


def path(pid, frames, x, y):
    return PathAnnotation(path_id=pid, samples={f: (x, y) for f in frames})


def det(i, frame, x, y, w=10.0, h=10.0):
    return Detection(id=f"d{i}", frame=frame, box=Box(x, y, w, h), score=0.5)


class TestUnaryCost:
    def test_sample_inside_box(self):
        assert unary_cost(det(0, 2, 0, 0), path("p", range(5), 5, 5)) == 0.0

    def test_sample_outside_box(self):
        assert unary_cost(det(0, 2, 0, 0), path("p", range(5), 50, 50)) == math.inf

    def test_frame_outside_span(self):
        assert unary_cost(det(0, 9, 0, 0), path("p", range(5), 5, 5)) == math.inf


class TestSeparationCost:
    def test_zero_affinity_no_penalty(self):
        assert separation_cost(0.0, CFG) == 0.0

    def test_formula_value(self):
        a = 1.0 - math.exp(-3.0)
        assert separation_cost(a, CFG) == pytest.approx(3.0, abs=1e-3)

    def test_full_affinity_bounded_by_floor(self):
        # default floor keeps -log finite before the cap engages
        assert separation_cost(1.0, CFG) == pytest.approx(-math.log(CFG.affinity_floor))

    def test_cap_engages_with_tiny_floor(self):
        cfg = EngineConfig(fps=10.0, affinity_floor=1e-30)
        assert separation_cost(1.0, cfg) == cfg.separation_cap

    def test_monotone(self):
        values = [separation_cost(a / 20, CFG) for a in range(21)]
        assert values == sorted(values)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            separation_cost(1.5, CFG)


class TestPrune:
    def test_detection_containing_sample_kept(self):
        kept, dropped = prune([det(0, 1, 0, 0)], [path("p", range(3), 5, 5)])
        assert len(kept) == 1 and not dropped

    def test_detection_with_no_sample_pruned(self):
        kept, dropped = prune([det(0, 1, 100, 100)], [path("p", range(3), 5, 5)])
        assert not kept and len(dropped) == 1

    def test_two_path_detection_kept(self):
        paths = [path("a", range(3), 4, 4), path("b", range(3), 6, 6)]
        kept, dropped = prune([det(0, 1, 0, 0)], paths)
        assert len(kept) == 1 and not dropped


class TestSolvePrelabel:
    def test_single_detection_single_path(self):
        paths = [path("a", range(3), 5, 5)]
        out = solve_prelabel([det(0, 1, 0, 0)], paths, AffinityGraph(40), CFG)
        assert out.labels == {"d0": "a"}
        assert out.energy == 0.0
        assert out.pruned == set()

    def test_affine_pair_takes_nearer_path(self):
        # both detections feasible for both paths; a's samples are nearer the
        # centers; splitting would cost separation_cost(0.9) > 0
        paths = [path("a", range(4), 5.0, 5.0), path("b", range(4), 8.0, 8.0)]
        d1, d2 = det(0, 0, 0, 0), det(1, 1, 0, 0)
        g = AffinityGraph(window_frames=40)
        g.edges[canonical_pair(d1, d2)] = 0.9
        out = solve_prelabel([d1, d2], paths, g, CFG)
        assert out.labels == {"d0": "a", "d1": "a"}
        assert out.energy == 0.0

    def test_chain_matches_brute_force(self):
        rnd = random.Random(99)
        paths = [path("a", range(8), 5.0, 5.0), path("b", range(8), 30.0, 5.0)]
        dets = []
        for i in range(8):
            x = rnd.choice([0.0, 25.0, 12.0])  # feasible for a, b, or both
            dets.append(det(i, i, x, 0.0, w=14.0))
        g = AffinityGraph(window_frames=40)
        for i in range(len(dets)):
            for j in range(i + 1, len(dets)):
                if rnd.random() < 0.7:
                    g.edges[canonical_pair(dets[i], dets[j])] = rnd.uniform(0.1, 0.95)
        out = solve_prelabel(dets, paths, g, CFG)
        oracle = brute_force_prelabel(dets, paths, g, CFG)
        assert out.energy == pytest.approx(oracle.energy, abs=1e-9)

    def test_pruned_and_labeled_partition_input(self):
        paths = [path("a", range(3), 5, 5)]
        dets = [det(0, 1, 0, 0), det(1, 1, 200, 200)]
        out = solve_prelabel(dets, paths, AffinityGraph(40), CFG)
        assert set(out.labels) | out.pruned == {"d0", "d1"}
        assert set(out.labels) & out.pruned == set()

    def test_feasibility_of_output(self, rng):
        for _ in range(50):
            dets, paths, graph, config = make_prelabel_instance(rng)
            out = solve_prelabel(dets, paths, graph, config)
            by_id = {p.path_id: p for p in paths}
            det_by_id = {d.id: d for d in dets}
            for det_id, pid in out.labels.items():
                assert unary_cost(det_by_id[det_id], by_id[pid]) == 0.0

    def test_energy_never_above_initialization(self, rng):
        for _ in range(50):
            dets, paths, graph, config = make_prelabel_instance(rng)
            inst = _Instance(dets, paths, graph, config)
            out = solve_prelabel(dets, paths, graph, config)
            if inst.kept:
                assert out.energy <= inst.energy(inst.initial_labels()) + 1e-12


class TestBruteForce:
    def test_empty_detections(self):
        out = brute_force_prelabel([], [path("a", range(2), 5, 5)],
                                   AffinityGraph(40), CFG)
        assert out.labels == {} and out.energy == 0.0

    def test_tie_breaks_to_lower_path_id(self):
        paths = [path("b", range(3), 4, 4), path("a", range(3), 6, 6)]
        out = brute_force_prelabel([det(0, 1, 0, 0)], paths, AffinityGraph(40), CFG)
        assert out.labels == {"d0": "a"}

    def test_rejects_oversized_instance(self):
        paths = [path("a", range(20), 5, 5)]
        dets = [det(i, i, 0, 0) for i in range(15)]
        with pytest.raises(InstanceTooLargeError):
            brute_force_prelabel(dets, paths, AffinityGraph(40), CFG)


class TestOracleEquivalence:
    def test_natural_instances(self, rng):
        for _ in range(150):
            dets, paths, graph, config = make_prelabel_instance(rng)
            s = solve_prelabel(dets, paths, graph, config)
            b = brute_force_prelabel(dets, paths, graph, config)
            assert s.energy == pytest.approx(b.energy, abs=1e-9)
            assert s.pruned == b.pruned

    def test_frustrated_instances(self):
        rnd = random.Random(31337)
        for _ in range(150):
            dets, paths, graph, config = make_frustrated_instance(rnd)
            if not dets:
                continue
            s = solve_prelabel(dets, paths, graph, config)
            b = brute_force_prelabel(dets, paths, graph, config)
            assert s.energy == pytest.approx(b.energy, abs=1e-9)
