"""Stage two: pick the most probable time-ordered detection path per cluster.

Each cluster becomes a DAG of time-forward transitions plus virtual
source/sink nodes attached near the span ends. Detection-confidence costs
may be negative, which is safe here: the graph is acyclic and the optimum
is found by dynamic programming in frame order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .affinity import AffinityGraph, fallback_affinity
from .model import Detection, EngineConfig


@dataclass
class ClusterGraph:
    """One solvable segment of a cluster: nodes, costs, and S/T attachments."""

    path_id: str
    nodes: list[Detection]                      # sorted by (frame, id)
    observation_cost: dict[str, float]
    transitions: dict[str, list[tuple[str, float]]]  # id -> [(successor id, cost)]
    source_ids: list[str]
    sink_ids: list[str]


@dataclass
class LinkedPath:
    path_id: str
    chosen: list[str] = field(default_factory=list)
    total_cost: float = 0.0


class NoPathError(RuntimeError):
    """No source-to-sink route exists through the cluster."""


class InstanceTooLargeError(ValueError):
    pass


def confidence_cost(s: float) -> float:
    """log((1-s)/s): negative for confident detections, positive below 0.5."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"score must lie in (0,1), got {s}")
    return math.log((1.0 - s) / s)


def transition_cost(
    d_i: Detection, d_j: Detection, graph: AffinityGraph, config: EngineConfig
) -> float:
    """-log affinity of linking d_i to d_j, floored to stay finite."""
    gap = d_j.frame - d_i.frame
    if gap <= 0 or gap > config.window_frames:
        raise ValueError(f"transition gap {gap} outside (0, {config.window_frames}]")
    a = graph.get(d_i.id, d_j.id)
    if a is None:
        a = fallback_affinity(d_i, d_j, config.fps)
    return -math.log(max(a, config.affinity_floor))


def split_cluster(
    detections: list[Detection], window_frames: int
) -> list[list[Detection]]:
    """Split a cluster where consecutive occupied frames are further apart
    than the transition window; each piece is solvable on its own."""
    dets = sorted(detections, key=lambda d: (d.frame, d.id))
    segments: list[list[Detection]] = []
    for d in dets:
        if segments and d.frame - segments[-1][-1].frame <= window_frames:
            segments[-1].append(d)
        else:
            segments.append([d])
    return segments


def build_cluster_graph(
    path_id: str,
    detections: list[Detection],
    graph: AffinityGraph,
    config: EngineConfig,
) -> ClusterGraph:
    """Assemble the ST graph for one segment of a cluster."""
    nodes = sorted(detections, key=lambda d: (d.frame, d.id))
    first = nodes[0].frame
    last = nodes[-1].frame
    attach = config.st_attach_frames
    source_ids = [d.id for d in nodes if d.frame <= first + attach]
    sink_ids = [d.id for d in nodes if d.frame >= last - attach]
    obs = {d.id: confidence_cost(d.score) for d in nodes}
    transitions: dict[str, list[tuple[str, float]]] = {d.id: [] for d in nodes}
    for i, d_i in enumerate(nodes):
        for d_j in nodes[i + 1:]:
            gap = d_j.frame - d_i.frame
            if gap == 0:
                continue
            if gap > config.window_frames:
                break
            transitions[d_i.id].append((d_j.id, transition_cost(d_i, d_j, graph, config)))
    return ClusterGraph(
        path_id=path_id,
        nodes=nodes,
        observation_cost=obs,
        transitions=transitions,
        source_ids=source_ids,
        sink_ids=sink_ids,
    )


# DP value: (cost, number of detections, id sequence). Tuple comparison bakes
# in the tie rules: fewer detections first, then lexicographic ids.
_Value = tuple[float, int, tuple[str, ...]]


def solve_linkage(cluster: ClusterGraph) -> LinkedPath:
    """Minimum-cost S-to-T detection path by DP in topological (frame) order."""
    if not cluster.nodes:
        raise NoPathError(f"cluster {cluster.path_id} is empty")
    source_set = set(cluster.source_ids)
    best: dict[str, _Value] = {}
    for node in cluster.nodes:  # already topologically sorted by frame
        u = node.id
        if u in source_set:
            value: _Value | None = (cluster.observation_cost[u], 1, (u,))
        else:
            value = None
        incoming = best.get(u)
        if incoming is not None and (value is None or incoming < value):
            value = incoming
        if value is None:
            continue
        best[u] = value
        cost, count, seq = value
        for v, w in cluster.transitions[u]:
            cand = (cost + w + cluster.observation_cost[v], count + 1, seq + (v,))
            prev = best.get(v)
            if prev is None or cand < prev:
                best[v] = cand
    finals = [best[t] for t in cluster.sink_ids if t in best]
    if not finals:
        raise NoPathError(f"no source-to-sink path in cluster {cluster.path_id}")
    cost, _, seq = min(finals)
    return LinkedPath(path_id=cluster.path_id, chosen=list(seq), total_cost=cost)


def brute_force_linkage(cluster: ClusterGraph) -> LinkedPath:
    """Exhaustive enumeration of all S-to-T paths; test oracle."""
    if len(cluster.nodes) > 12:
        raise InstanceTooLargeError(
            f"brute force limited to 12 nodes, got {len(cluster.nodes)}"
        )
    if not cluster.nodes:
        raise NoPathError(f"cluster {cluster.path_id} is empty")
    sink_set = set(cluster.sink_ids)
    results: list[_Value] = []

    def walk(u: str, cost: float, seq: tuple[str, ...]) -> None:
        if u in sink_set:
            results.append((cost, len(seq), seq))
        for v, w in cluster.transitions[u]:
            walk(v, cost + w + cluster.observation_cost[v], seq + (v,))

    for s in cluster.source_ids:
        walk(s, cluster.observation_cost[s], (s,))
    if not results:
        raise NoPathError(f"no source-to-sink path in cluster {cluster.path_id}")
    cost, _, seq = min(results)
    return LinkedPath(path_id=cluster.path_id, chosen=list(seq), total_cost=cost)


def link_cluster(
    path_id: str,
    detections: list[Detection],
    graph: AffinityGraph,
    config: EngineConfig,
) -> tuple[LinkedPath, list[str]]:
    """Solve a whole cluster, splitting across over-window gaps if needed.

    Returns the concatenated chosen path plus human-readable warnings for
    each split (the trajectory builder bridges the gaps by interpolation).
    """
    warnings: list[str] = []
    segments = split_cluster(detections, config.window_frames)
    if len(segments) > 1:
        warnings.append(
            f"cluster {path_id}: {len(segments)} segments separated by gaps over "
            f"{config.window_frames} frames; bridging by interpolation"
        )
    chosen: list[str] = []
    total = 0.0
    for segment in segments:
        sub = solve_linkage(build_cluster_graph(path_id, segment, graph, config))
        chosen.extend(sub.chosen)
        total += sub.total_cost
    return LinkedPath(path_id=path_id, chosen=chosen, total_cost=total), warnings
