"""Structural and dynamic diagnostics over a flattened graph.

All functions are read-only over the graph and deterministic. Flow-path
questions (governance, end-market reachability) work on the sub-graph of
edges that can actually carry something: capacity above zero, neither
endpoint an inert environment entity. Classification by contrast is about
topology and keeps zero-capacity edges.
"""

from __future__ import annotations

import enum
from collections import defaultdict, deque
from dataclasses import dataclass

from .flatten import FlatGraph
from .model import SinkNode, SourceNode, VcsysError

__all__ = [
    "LinkageClass",
    "MissingTier",
    "GovernanceScore",
    "WeakLink",
    "WeakLinkageReport",
    "classify_linkages",
    "governance_centrality",
    "end_market_reachability",
    "weak_linkage_report",
    "value_added_profile",
]


class MissingTier(VcsysError):
    """An internal node has no tier, so linkages cannot be classified."""


class LinkageClass(enum.Enum):
    VERTICAL = "vertical"      # between different chain tiers
    HORIZONTAL = "horizontal"  # within one tier
    INTERFACE = "interface"    # touches the environment


def classify_linkages(flat: FlatGraph) -> dict[str, LinkageClass]:
    """Assign every edge exactly one linkage class."""
    nodes = flat.nodes_by_id
    out: dict[str, LinkageClass] = {}
    for edge in flat.edges:
        if edge.tail not in nodes or edge.head not in nodes:
            out[edge.id] = LinkageClass.INTERFACE
            continue
        tiers = []
        for end in (edge.tail, edge.head):
            tier = nodes[end].tier
            if tier is None:
                raise MissingTier(f"node {end!r} has no tier")
            tiers.append(tier)
        out[edge.id] = (
            LinkageClass.VERTICAL if tiers[0] != tiers[1] else LinkageClass.HORIZONTAL
        )
    return out


def _flow_adjacency(flat: FlatGraph) -> tuple[dict[str, set[str]], set[str], set[str]]:
    """Forward adjacency over flow-capable edges, plus source and sink ids.

    Parallel edges collapse to one adjacency entry: path counting is about
    routes between actors, not about which of several identical pipes a
    unit takes.
    """
    sources = {n.id for n in flat.env_nodes if isinstance(n, SourceNode)}
    sinks = {n.id for n in flat.env_nodes if isinstance(n, SinkNode)}
    flowable = {n.id for n in flat.nodes} | sources | sinks
    adjacency: dict[str, set[str]] = defaultdict(set)
    for edge in flat.edges:
        if edge.knowledge.capacity > 0 and edge.tail in flowable and edge.head in flowable:
            adjacency[edge.tail].add(edge.head)
    return adjacency, sources, sinks


@dataclass(frozen=True)
class GovernanceScore:
    node: str
    score: float


def _bfs_counts(
    start: str, neighbors: dict[str, set[str]]
) -> tuple[dict[str, int], dict[str, int]]:
    """Hop distance and number of shortest paths from start to every node."""
    dist = {start: 0}
    count = {start: 1}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nxt in sorted(neighbors.get(node, ())):
            if nxt not in dist:
                dist[nxt] = dist[node] + 1
                count[nxt] = count[node]
                queue.append(nxt)
            elif dist[nxt] == dist[node] + 1:
                count[nxt] += count[node]
    return dist, count


def governance_centrality(flat: FlatGraph) -> list[GovernanceScore]:
    """Score each actor's brokerage between supply sources and end markets.

    For every (source, sink) pair that is connected at all, a node earns
    the fraction of shortest directed paths that pass through it; scores
    average over the connected pairs, landing in [0, 1]. A node off every
    path (or a graph with no connected pair at all, i.e. a broken chain)
    scores 0.
    """
    adjacency, sources, sinks = _flow_adjacency(flat)
    reverse: dict[str, set[str]] = defaultdict(set)
    for tail, heads in adjacency.items():
        for head in heads:
            reverse[head].add(tail)

    internal = [n.id for n in flat.nodes]
    totals = {node: 0.0 for node in internal}
    forward = {s: _bfs_counts(s, adjacency) for s in sorted(sources)}
    backward = {t: _bfs_counts(t, reverse) for t in sorted(sinks)}

    pairs_with_path = 0
    for s in sorted(sources):
        dist_s, count_s = forward[s]
        for t in sorted(sinks):
            if t not in dist_s:
                continue
            pairs_with_path += 1
            dist_t, count_t = backward[t]
            total = dist_s[t]
            on_path = count_s[t]
            for v in internal:
                if (
                    v in dist_s
                    and v in dist_t
                    and dist_s[v] + dist_t[v] == total
                ):
                    totals[v] += (count_s[v] * count_t[v]) / on_path

    if pairs_with_path == 0:
        return [GovernanceScore(v, 0.0) for v in sorted(internal)]
    return [GovernanceScore(v, totals[v] / pairs_with_path) for v in sorted(internal)]


def end_market_reachability(flat: FlatGraph) -> dict[str, frozenset[str]]:
    """Which end markets each actor can feed through flow-capable edges."""
    adjacency, _, sinks = _flow_adjacency(flat)
    reverse: dict[str, set[str]] = defaultdict(set)
    for tail, heads in adjacency.items():
        for head in heads:
            reverse[head].add(tail)
    internal = {n.id for n in flat.nodes}
    reached: dict[str, set[str]] = {v: set() for v in internal}
    for sink in sorted(sinks):
        seen: set[str] = set()
        queue = deque([sink])
        while queue:
            node = queue.popleft()
            for prev in reverse.get(node, ()):
                if prev in internal and prev not in seen:
                    seen.add(prev)
                    reached[prev].add(sink)
                    queue.append(prev)
    return {v: frozenset(s) for v, s in reached.items()}


@dataclass(frozen=True)
class WeakLink:
    edge: str
    capacity: float


@dataclass(frozen=True)
class WeakLinkageReport:
    threshold: float
    weak: tuple[WeakLink, ...]
    missing: tuple[tuple[int, int], ...]

    @property
    def clean(self) -> bool:
        return not self.weak and not self.missing


def weak_linkage_report(flat: FlatGraph, threshold: float) -> WeakLinkageReport:
    """Vertical edges under the capacity threshold, and adjacent tier pairs
    that are populated on both sides but not connected at all.

    Zero-capacity edges still count as connections here: a starved link is
    a weak one, not a missing one.
    """
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    classes = classify_linkages(flat)
    nodes = flat.nodes_by_id
    weak = tuple(
        WeakLink(edge.id, edge.knowledge.capacity)
        for edge in sorted(flat.edges, key=lambda e: e.id)
        if classes[edge.id] is LinkageClass.VERTICAL
        and edge.knowledge.capacity < threshold
    )
    populated = {n.tier for n in flat.nodes}
    linked: set[tuple[int, int]] = set()
    for edge in flat.edges:
        if classes[edge.id] is not LinkageClass.INTERFACE:
            a, b = nodes[edge.tail].tier, nodes[edge.head].tier
            if abs(a - b) == 1:
                linked.add((min(a, b), max(a, b)))
    missing = tuple(
        (tier, tier + 1)
        for tier in sorted(populated)
        if tier + 1 in populated and (tier, tier + 1) not in linked
    )
    return WeakLinkageReport(float(threshold), weak, missing)


def value_added_profile(flat: FlatGraph) -> dict[str, float]:
    """Capacity-weighted throughput balance per actor.

    Sum of outgoing capacity x strength minus the incoming sum; a crude
    proxy for where value concentrates, and negative when a node takes in
    more weighted capacity than it passes on.
    """
    internal = {n.id for n in flat.nodes}
    profile = {v: 0.0 for v in internal}
    for edge in flat.edges:
        value = edge.knowledge.capacity * edge.knowledge.strength
        if edge.tail in internal:
            profile[edge.tail] += value
        if edge.head in internal:
            profile[edge.head] -= value
    return profile
