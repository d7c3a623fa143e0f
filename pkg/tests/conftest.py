"""Shared random-instance generators for the solver-versus-oracle suites."""

from __future__ import annotations

import random

import pytest

from pathlink.affinity import AffinityGraph, canonical_pair
from pathlink.linkage import ClusterGraph, build_cluster_graph
from pathlink.model import Box, Detection, EngineConfig, PathAnnotation


def make_prelabel_instance(rng: random.Random):
    """A random labeling instance: detections boxed around random path
    samples, sparse random affinities within the window."""
    n_paths = rng.randint(1, 3)
    n_dets = rng.randint(1, 14)
    n_frames = rng.randint(2, 12)
    paths = []
    for k in range(n_paths):
        samples = {
            f: (rng.uniform(0, 100), rng.uniform(0, 100)) for f in range(n_frames)
        }
        paths.append(PathAnnotation(path_id=f"p{k}", samples=samples))
    dets = []
    for i in range(n_dets):
        f = rng.randint(0, n_frames - 1)
        px, py = paths[rng.randrange(n_paths)].samples[f]
        cx = px + rng.uniform(-5, 5)
        cy = py + rng.uniform(-5, 5)
        w = rng.uniform(8, 30)
        h = rng.uniform(8, 30)
        dets.append(Detection(
            id=f"d{i:02d}", frame=f, box=Box(cx - w / 2, cy - h / 2, w, h),
            score=rng.uniform(0.05, 0.95),
        ))
    config = EngineConfig(fps=2.0, window_seconds=rng.choice([2.0, 3.0, 4.0]))
    graph = AffinityGraph(window_frames=config.window_frames)
    for i in range(len(dets)):
        for j in range(i + 1, len(dets)):
            gap = abs(dets[i].frame - dets[j].frame)
            if 0 < gap <= config.window_frames and rng.random() < 0.6:
                graph.edges[canonical_pair(dets[i], dets[j])] = rng.uniform(0.01, 0.99)
    return dets, paths, graph, config


def make_frustrated_instance(rng: random.Random):
    """Dense affinities with conflicting feasibility bands: the regime where
    single-descent move-making gets stuck in local optima."""
    n_frames = 6
    xs = {0: 10.0, 1: 50.0, 2: 90.0}
    paths = [
        PathAnnotation(path_id=f"p{k}",
                       samples={f: (xs[k], 50.0) for f in range(n_frames)})
        for k in range(3)
    ]
    dets = []
    for i in range(rng.randint(6, 13)):
        f = rng.randint(0, n_frames - 1)
        feas = rng.sample([0, 1, 2], rng.choice([1, 1, 2, 2, 2, 3]))
        lo = min(xs[k] for k in feas) - 3
        hi = max(xs[k] for k in feas) + 3
        if 1 not in feas and lo < xs[1] < hi:
            continue  # box would swallow the middle band by accident
        dets.append(Detection(id=f"d{i:02d}", frame=f,
                              box=Box(lo, 45, hi - lo, 10), score=0.5))
    config = EngineConfig(fps=2.0, window_seconds=3.0)
    graph = AffinityGraph(window_frames=config.window_frames)
    for i in range(len(dets)):
        for j in range(i + 1, len(dets)):
            gap = abs(dets[i].frame - dets[j].frame)
            if 0 < gap <= config.window_frames and rng.random() < 0.8:
                graph.edges[canonical_pair(dets[i], dets[j])] = rng.uniform(0.3, 0.999)
    return dets, paths, graph, config


def make_cluster(rng: random.Random, max_nodes: int = 12) -> ClusterGraph:
    """A random linkage segment: scored detections over a short frame range
    with random pairwise affinities."""
    n = rng.randint(1, max_nodes)
    n_frames = rng.randint(1, 10)
    dets = []
    for i in range(n):
        f = rng.randint(0, n_frames - 1)
        cx, cy = rng.uniform(0, 100), rng.uniform(0, 100)
        w, h = rng.uniform(5, 25), rng.uniform(5, 25)
        dets.append(Detection(
            id=f"d{i:02d}", frame=f, box=Box(cx - w / 2, cy - h / 2, w, h),
            score=rng.uniform(0.05, 0.95),
        ))
    config = EngineConfig(
        fps=2.0,
        window_seconds=rng.choice([2.0, 4.0, 6.0]),
        st_attach_seconds=rng.choice([0.5, 1.0]),
    )
    graph = AffinityGraph(window_frames=config.window_frames)
    for i in range(len(dets)):
        for j in range(i + 1, len(dets)):
            gap = abs(dets[i].frame - dets[j].frame)
            if 0 < gap <= config.window_frames and rng.random() < 0.7:
                graph.edges[canonical_pair(dets[i], dets[j])] = rng.uniform(0.01, 1.0)
    # keep only segments the splitter would produce whole
    from pathlink.linkage import split_cluster

    segment = split_cluster(dets, config.window_frames)[0]
    return build_cluster_graph("p0", segment, graph, config)


@pytest.fixture
def rng():
    return random.Random(20260810)
