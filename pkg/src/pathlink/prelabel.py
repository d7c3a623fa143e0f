"""Stage one: assign each detection a path label by global energy minimization.

The energy is a sum of hard unaries (the path sample at the detection's
frame must fall inside the box) and Potts pairwise terms that penalize
splitting affine detections across labels. Binary instances are solved
exactly with one min-cut; multi-label instances run alpha-expansion
moves, each accepted only if it strictly lowers the energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import networkx as nx
from networkx.algorithms.flow import boykov_kolmogorov

from .affinity import AffinityGraph
from .model import Detection, EngineConfig, PathAnnotation, contains


@dataclass
class LabelAssignment:
    """Output of prelabeling: one path label per kept detection."""

    labels: dict[str, str] = field(default_factory=dict)
    pruned: set[str] = field(default_factory=set)
    energy: float = 0.0


def unary_cost(d: Detection, path: PathAnnotation) -> float:
    """0 if the path's sample at d.frame falls inside d.box, else +inf."""
    sample = path.samples.get(d.frame)
    if sample is None:
        return math.inf
    return 0.0 if contains(d.box, sample) else math.inf


def separation_cost(a_ij: float, config: EngineConfig) -> float:
    """Penalty for giving two detections with affinity a_ij different labels."""
    if not 0.0 <= a_ij <= 1.0:
        raise ValueError(f"affinity must lie in [0,1], got {a_ij}")
    raw = -math.log(1.0 - a_ij + config.affinity_floor)
    return min(max(raw, 0.0), config.separation_cap)


def prune(
    detections: Iterable[Detection], paths: Iterable[PathAnnotation]
) -> tuple[list[Detection], list[Detection]]:
    """Split detections into (kept, pruned); pruned contain no path sample."""
    paths = list(paths)
    kept, pruned = [], []
    for d in detections:
        if any(unary_cost(d, p) == 0.0 for p in paths):
            kept.append(d)
        else:
            pruned.append(d)
    return kept, pruned


class _Instance:
    """Shared precomputation for both the solver and the brute-force oracle."""

    def __init__(self, detections, paths, graph: AffinityGraph, config: EngineConfig):
        self.config = config
        self.kept, self.pruned = prune(detections, paths)
        self.kept.sort(key=lambda d: (d.frame, d.id))
        self.paths = sorted(paths, key=lambda p: p.path_id)
        self.feasible: dict[str, list[str]] = {}
        for d in self.kept:
            self.feasible[d.id] = [
                p.path_id for p in self.paths if unary_cost(d, p) == 0.0
            ]
        kept_ids = set(self.feasible)
        self.edges: list[tuple[str, str, float]] = []
        for (id_i, id_j), a in sorted(graph.edges.items()):
            if id_i in kept_ids and id_j in kept_ids:
                w = separation_cost(a, config)
                if w > 0.0:
                    self.edges.append((id_i, id_j, w))

    def energy(self, labels: dict[str, str]) -> float:
        total = 0.0
        for id_i, id_j, w in self.edges:
            if labels[id_i] != labels[id_j]:
                total += w
        return total

    def initial_labels(self) -> dict[str, str]:
        """Feasible path whose sample is nearest the box center; ties by path id."""
        by_id = {p.path_id: p for p in self.paths}
        labels = {}
        for d in self.kept:
            best = None
            for pid in self.feasible[d.id]:
                px, py = by_id[pid].samples[d.frame]
                dist = (px - d.box.cx) ** 2 + (py - d.box.cy) ** 2
                if best is None or dist < best[0]:
                    best = (dist, pid)
            labels[d.id] = best[1]
        return labels

    def components(self) -> list[list[str]]:
        """Connected components of the kept-detection edge graph."""
        adj: dict[str, list[str]] = {d.id: [] for d in self.kept}
        for id_i, id_j, _ in self.edges:
            adj[id_i].append(id_j)
            adj[id_j].append(id_i)
        seen: set[str] = set()
        comps = []
        for d in self.kept:
            if d.id in seen:
                continue
            comp, stack = [], [d.id]
            seen.add(d.id)
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            comps.append(comp)
        return comps


def _min_cut_sides(
    theta: dict[str, list[float]],
    pair_terms: list[tuple[str, str, float, float, float, float]],
) -> set[str]:
    """Minimize a submodular binary energy; returns the nodes assigned side 1.

    theta[u] = [cost of side 0, cost of side 1]; pair terms are
    (u, v, e00, e01, e10, e11) with e00+e11 <= e01+e10. Standard
    reduction: reparameterize into t-links plus one directed edge.
    """
    g = nx.DiGraph()
    for u, v, e00, e01, e10, e11 in pair_terms:
        theta[u][1] += e10 - e00
        theta[v][1] += e11 - e10
        g.add_edge(u, v, capacity=e01 + e10 - e00 - e11)
    for u, (side0, side1) in theta.items():
        shift = min(side0, side1)
        g.add_edge("_s", u, capacity=side1 - shift)
        g.add_edge(u, "_t", capacity=side0 - shift)
    _, (s_side, _) = nx.minimum_cut(g, "_s", "_t", flow_func=boykov_kolmogorov)
    return {u for u in theta if u not in s_side}


class _ComponentSolver:
    """Move-making descent over one connected component of the energy."""

    # components up to this size get swap moves and per-label restarts on
    # top of plain expansion; large ones stick to expansion sweeps
    EXHAUSTIVE_MOVES_LIMIT = 60

    def __init__(self, inst: _Instance, comp: list[str]):
        self.inst = inst
        self.comp = comp
        self.adj: dict[str, list[tuple[str, float]]] = {u: [] for u in comp}
        comp_set = set(comp)
        for id_i, id_j, w in inst.edges:
            if id_i in comp_set:
                self.adj[id_i].append((id_j, w))
                self.adj[id_j].append((id_i, w))
        self.labels_in_play = sorted({p for u in comp for p in inst.feasible[u]})

    def delta(self, labels: dict[str, str], changes: dict[str, str]) -> float:
        """Energy change if `changes` were applied on top of `labels`."""
        d = 0.0
        for u, new_u in changes.items():
            old_u = labels[u]
            for v, w in self.adj[u]:
                if v in changes:
                    if u < v:
                        d += w * ((new_u != changes[v]) - (old_u != labels[v]))
                else:
                    lv = labels[v]
                    d += w * ((new_u != lv) - (old_u != lv))
        return d

    def expansion_move(
        self, labels: dict[str, str], alpha: str, movable: list[str]
    ) -> dict[str, str]:
        """Movable nodes keep their label (side 0) or take alpha (side 1);
        returns only the nodes that switched."""
        movable_set = set(movable)
        theta: dict[str, list[float]] = {u: [0.0, 0.0] for u in movable}
        pairs = []
        for u in movable:
            lu = labels[u]
            for v, w in self.adj[u]:
                if v in movable_set:
                    if u < v:
                        e00 = w if lu != labels[v] else 0.0
                        pairs.append((u, v, e00, w, w, 0.0))
                else:
                    lv = labels[v]
                    theta[u][0] += w if lu != lv else 0.0
                    theta[u][1] += w if alpha != lv else 0.0
        switched = _min_cut_sides(theta, pairs)
        return {u: alpha for u in switched}

    def swap_move(
        self, labels: dict[str, str], alpha: str, beta: str
    ) -> dict[str, str]:
        """Nodes at alpha or beta re-choose between the two where feasible."""
        movable = [
            u for u in self.comp
            if (labels[u] == alpha and beta in self.inst.feasible[u])
            or (labels[u] == beta and alpha in self.inst.feasible[u])
        ]
        if not movable:
            return {}
        movable_set = set(movable)
        theta: dict[str, list[float]] = {u: [0.0, 0.0] for u in movable}
        pairs = []
        for u in movable:
            for v, w in self.adj[u]:
                if v in movable_set:
                    if u < v:
                        pairs.append((u, v, 0.0, w, w, 0.0))
                else:
                    lv = labels[v]
                    theta[u][0] += w if alpha != lv else 0.0
                    theta[u][1] += w if beta != lv else 0.0
        took_beta = _min_cut_sides(theta, pairs)
        changes = {}
        for u in movable:
            new = beta if u in took_beta else alpha
            if new != labels[u]:
                changes[u] = new
        return changes

    def descend(self, labels: dict[str, str], with_swaps: bool) -> float:
        """Apply improving moves until none helps; returns the total delta."""
        total = 0.0
        feasible = self.inst.feasible
        for _ in range(self.inst.config.max_label_sweeps):
            improved = False
            for alpha in self.labels_in_play:
                movable = [
                    u for u in self.comp
                    if alpha in feasible[u] and labels[u] != alpha
                ]
                if not movable:
                    continue
                changes = self.expansion_move(labels, alpha, movable)
                if changes:
                    d = self.delta(labels, changes)
                    if d < 0.0:
                        labels.update(changes)
                        total += d
                        improved = True
            if with_swaps:
                for i, alpha in enumerate(self.labels_in_play):
                    for beta in self.labels_in_play[i + 1:]:
                        changes = self.swap_move(labels, alpha, beta)
                        if changes:
                            d = self.delta(labels, changes)
                            if d < 0.0:
                                labels.update(changes)
                                total += d
                                improved = True
            if not improved:
                break
        return total

    def solve_binary(self, labels: dict[str, str]) -> None:
        """Exact two-label case: one free min-cut, kept only if it strictly
        beats the deterministic initialization."""
        lo, hi = self.labels_in_play
        feasible = self.inst.feasible
        base = {u: lo if lo in feasible[u] else hi for u in self.comp}
        movable = [u for u in self.comp if hi in feasible[u] and base[u] != hi]
        base_vs_init = {u: base[u] for u in self.comp if base[u] != labels[u]}
        d_base = self.delta(labels, base_vs_init)
        if movable:
            switched = self.expansion_move(base, hi, movable)
            d_cut = self.delta(base, switched)
        else:
            switched, d_cut = {}, 0.0
        if d_base + d_cut < 0.0:
            labels.update(base_vs_init)
            labels.update(switched)

    def run(self, labels: dict[str, str]) -> None:
        if len(self.labels_in_play) < 2:
            return
        if len(self.labels_in_play) == 2:
            self.solve_binary(labels)
            return
        exhaustive = len(self.comp) <= self.EXHAUSTIVE_MOVES_LIMIT
        if not exhaustive:
            self.descend(labels, with_swaps=False)
            return
        init = {u: labels[u] for u in self.comp}
        best = dict(init)
        best_delta = self.descend(best, with_swaps=True)
        for seed_label in self.labels_in_play:
            work = {
                u: seed_label if seed_label in self.inst.feasible[u] else init[u]
                for u in self.comp
            }
            d = self.delta(init, {u: v for u, v in work.items() if v != init[u]})
            d += self.descend(work, with_swaps=True)
            if d < best_delta:
                best, best_delta = work, d
        if best_delta < 0.0:
            labels.update(best)


def solve_prelabel(
    detections: Iterable[Detection],
    paths: Iterable[PathAnnotation],
    graph: AffinityGraph,
    config: EngineConfig,
) -> LabelAssignment:
    """Globally label detections with paths by minimizing the two-term energy.

    Deterministic: nearest-center initialization, expansion moves over
    labels in ascending path id, moves accepted only on strict decrease.
    """
    inst = _Instance(detections, paths, graph, config)
    labels = inst.initial_labels()
    for comp in inst.components():
        _ComponentSolver(inst, comp).run(labels)
    return LabelAssignment(
        labels=labels,
        pruned={d.id for d in inst.pruned},
        energy=inst.energy(labels) if labels else 0.0,
    )


class InstanceTooLargeError(ValueError):
    pass


def brute_force_prelabel(
    detections: Iterable[Detection],
    paths: Iterable[PathAnnotation],
    graph: AffinityGraph,
    config: EngineConfig,
) -> LabelAssignment:
    """Exhaustive minimum of the same objective; test oracle for small instances."""
    inst = _Instance(detections, paths, graph, config)
    if len(inst.kept) > 14 or len(inst.paths) > 3:
        raise InstanceTooLargeError(
            f"brute force limited to 14 detections / 3 paths, "
            f"got {len(inst.kept)} / {len(inst.paths)}"
        )
    order = [d.id for d in inst.kept]
    index = {u: k for k, u in enumerate(order)}
    # edges grouped by their later endpoint so cost accrues incrementally
    edges_at: list[list[tuple[int, float]]] = [[] for _ in order]
    for id_i, id_j, w in inst.edges:
        a, b = index[id_i], index[id_j]
        if a > b:
            a, b = b, a
        edges_at[b].append((a, w))

    best_labels: list[str] | None = None
    best_cost = math.inf
    assign: list[str] = [""] * len(order)

    def dfs(k: int, cost: float) -> None:
        nonlocal best_labels, best_cost
        if cost > best_cost:
            return
        if k == len(order):
            if cost < best_cost:
                best_cost = cost
                best_labels = assign.copy()
            return
        for pid in inst.feasible[order[k]]:
            assign[k] = pid
            added = sum(w for a, w in edges_at[k] if assign[a] != pid)
            dfs(k + 1, cost + added)

    dfs(0, 0.0)
    if best_labels is None:
        return LabelAssignment(pruned={d.id for d in inst.pruned}, energy=0.0)
    return LabelAssignment(
        labels={u: best_labels[k] for k, u in enumerate(order)},
        pruned={d.id for d in inst.pruned},
        energy=best_cost,
    )
