"""Interaction-graph construction and analytics.

The interaction graph is a labeled directed multigraph: one node per
registered player (isolated nodes included), one edge per interaction-kind
behavior event.  Community detection (Louvain, Girvan-Newman) runs on an
undirected simple projection where parallel edges collapse to a weight equal
to their count, direction is dropped, and self-loops are discarded.
Girvan-Newman ranks edges by unweighted shortest-path betweenness while
modularity always uses the projected weights.

Everything breaks ties by ascending node id, so results are reproducible
run to run.
"""

from __future__ import annotations

import datetime as dt
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import SameSourceSink, UnknownPlayer
from .model import BehaviorEvent
from .timeutil import format_utc


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    label: str
    event_id: str
    at: dt.datetime

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "label": self.label,
            "eventId": self.event_id,
            "at": format_utc(self.at),
        }


@dataclass
class InteractionGraph:
    nodes: list[str]
    edges: list[Edge]

    def to_dict(self) -> dict:
        """Node-link export suitable for visualization."""
        return {
            "nodes": [{"id": n} for n in self.nodes],
            "edges": [e.to_dict() for e in self.edges],
        }

    def require_node(self, node: str) -> None:
        if node not in self.nodes:
            raise UnknownPlayer(f"player {node} is not in the graph")

    def directed_pairs(self) -> dict[tuple[str, str], int]:
        """Distinct (source, target) pairs with parallel-edge counts."""
        pairs: dict[tuple[str, str], int] = defaultdict(int)
        for e in self.edges:
            pairs[(e.source, e.target)] += 1
        return dict(pairs)

    def undirected_weights(self) -> dict[tuple[str, str], float]:
        """Projection for community detection: weight = parallel-edge count,
        direction dropped, self-loops discarded."""
        weights: dict[tuple[str, str], float] = defaultdict(float)
        for e in self.edges:
            if e.source == e.target:
                continue
            u, v = sorted((e.source, e.target))
            weights[(u, v)] += 1.0
        return dict(weights)


@dataclass
class Partition:
    communities: list[list[str]]
    modularity: float

    def to_dict(self) -> dict:
        return {"communities": self.communities, "modularity": self.modularity}


def build_graph(
    players: Iterable[str],
    events: Iterable[BehaviorEvent],
    labels: Optional[set[str]] = None,
    time_range: Optional[tuple[dt.datetime, dt.datetime]] = None,
    project: Optional[str] = None,
) -> InteractionGraph:
    """Deterministic graph from the event log under an optional filter."""
    edges = []
    for event in events:
        if event.interaction is None:
            continue
        if labels is not None and event.interaction.label not in labels:
            continue
        if project is not None and event.project != project:
            continue
        if time_range is not None:
            start, end = time_range
            if not start <= event.occurred_at <= end:
                continue
        edges.append(Edge(
            source=event.player,
            target=event.interaction.target_player,
            label=event.interaction.label,
            event_id=event.event_id,
            at=event.occurred_at,
        ))
    return InteractionGraph(nodes=sorted(players), edges=edges)


def degrees(g: InteractionGraph, player: str) -> dict:
    """Followers/following count distinct counterpart players, not edges."""
    g.require_node(player)
    sources = {e.source for e in g.edges if e.target == player and e.source != player}
    targets = {e.target for e in g.edges if e.source == player and e.target != player}
    return {"followers": len(sources), "following": len(targets)}


# --- modularity -----------------------------------------------------------------

def modularity(weights: dict[tuple[str, str], float], partition: list[list[str]]) -> float:
    """Q = sum over communities of (edge fraction inside - squared endpoint
    fraction); 0 for an edgeless graph."""
    m = sum(weights.values())
    if m == 0:
        return 0.0
    degree: dict[str, float] = defaultdict(float)
    for (u, v), w in weights.items():
        degree[u] += w
        degree[v] += w
    q = 0.0
    for community in partition:
        members = set(community)
        internal = sum(w for (u, v), w in weights.items() if u in members and v in members)
        a = sum(degree[n] for n in members) / (2.0 * m)
        q += internal / m - a * a
    return q


def _singleton_partition(nodes: list[str]) -> Partition:
    return Partition(communities=[[n] for n in sorted(nodes)], modularity=0.0)


def _canonical(communities: Iterable[Iterable[str]]) -> list[list[str]]:
    return sorted((sorted(c) for c in communities), key=lambda c: c[0])


# --- Louvain ---------------------------------------------------------------------

def louvain(g: InteractionGraph) -> Partition:
    """Local moving + aggregation until no modularity gain.

    Nodes are visited in ascending id order with no randomized restarts; a
    move needs a strictly positive gain, and equal-gain candidates resolve to
    the smallest community label.
    """
    weights = g.undirected_weights()
    if not weights:
        return _singleton_partition(g.nodes)
    m = sum(weights.values())

    # Level state: labels are ints ordered by smallest original member.
    members: dict[int, set[str]] = {}
    adj: dict[int, dict[int, float]] = {}
    self_w: dict[int, float] = {}
    node_index = {n: i for i, n in enumerate(sorted(g.nodes))}
    for i in node_index.values():
        members[i] = set()
        adj[i] = {}
        self_w[i] = 0.0
    for name, i in node_index.items():
        members[i].add(name)
    for (u, v), w in weights.items():
        iu, iv = node_index[u], node_index[v]
        adj[iu][iv] = adj[iu].get(iv, 0.0) + w
        adj[iv][iu] = adj[iv].get(iu, 0.0) + w

    while True:
        moved_any, community = _louvain_local_move(adj, self_w, m)
        if not moved_any:
            break
        members, adj, self_w = _louvain_aggregate(members, adj, self_w, community)
        if len(members) == 1:
            break

    communities = _canonical(members.values())
    return Partition(communities=communities, modularity=modularity(weights, communities))


def _louvain_local_move(adj, self_w, m):
    nodes = sorted(adj)
    degree = {v: sum(adj[v].values()) + 2.0 * self_w[v] for v in nodes}
    community = {v: v for v in nodes}
    tot = {v: degree[v] for v in nodes}
    eps = 1e-12

    moved_any = False
    while True:
        moved = False
        for v in nodes:
            old = community[v]
            tot[old] -= degree[v]
            links: dict[int, float] = defaultdict(float)
            for u, w in adj[v].items():
                links[community[u]] += w
            best_c, best_gain = old, links.get(old, 0.0) / m - tot[old] * degree[v] / (2.0 * m * m)
            for c in sorted(links):
                if c == old:
                    continue
                gain = links[c] / m - tot[c] * degree[v] / (2.0 * m * m)
                if gain > best_gain + eps or (abs(gain - best_gain) <= eps and c < best_c):
                    best_c, best_gain = c, gain
            community[v] = best_c
            tot[best_c] += degree[v]
            if best_c != old:
                moved = True
                moved_any = True
        if not moved:
            break
    return moved_any, community


def _louvain_aggregate(members, adj, self_w, community):
    groups: dict[int, list[int]] = defaultdict(list)
    for v, c in community.items():
        groups[c].append(v)
    # Stable labels: communities ordered by their smallest original member.
    ordered = sorted(groups.values(), key=lambda vs: min(min(members[v]) for v in vs))
    label_of = {}
    for new_label, vs in enumerate(ordered):
        for v in vs:
            label_of[v] = new_label

    new_members: dict[int, set[str]] = {i: set() for i in range(len(ordered))}
    new_adj: dict[int, dict[int, float]] = {i: {} for i in range(len(ordered))}
    new_self: dict[int, float] = {i: 0.0 for i in range(len(ordered))}
    for v, vs in ((v, members[v]) for v in adj):
        new_members[label_of[v]] |= vs
    for v in adj:
        lv = label_of[v]
        new_self[lv] += self_w[v]
        for u, w in adj[v].items():
            lu = label_of[u]
            if lu == lv:
                if v < u:
                    new_self[lv] += w
            else:
                new_adj[lv][lu] = new_adj[lv].get(lu, 0.0) + w
    return new_members, new_adj, new_self


# --- Girvan-Newman ------------------------------------------------------------------

def girvan_newman(g: InteractionGraph, target_communities: Optional[int] = None) -> Partition:
    """Remove highest-betweenness edges; return the best-modularity level, or
    the first level with ``target_communities`` components when given."""
    weights = g.undirected_weights()
    if not weights:
        return _singleton_partition(g.nodes)

    remaining = set(weights)
    nodes = sorted(g.nodes)

    def components() -> list[list[str]]:
        seen, result = set(), []
        neighbor: dict[str, set[str]] = defaultdict(set)
        for u, v in remaining:
            neighbor[u].add(v)
            neighbor[v].add(u)
        for start in nodes:
            if start in seen:
                continue
            queue, group = deque([start]), {start}
            seen.add(start)
            while queue:
                x = queue.popleft()
                for y in sorted(neighbor[x]):
                    if y not in seen:
                        seen.add(y)
                        group.add(y)
                        queue.append(y)
            result.append(sorted(group))
        return _canonical(result)

    best = components()
    best_q = modularity(weights, best)
    if target_communities is not None and len(best) >= target_communities:
        return Partition(best, best_q)

    while remaining:
        betweenness = _edge_betweenness(nodes, remaining)
        top = max(sorted(betweenness), key=lambda e: betweenness[e])
        remaining.discard(top)
        parts = components()
        q = modularity(weights, parts)
        if target_communities is not None:
            if len(parts) >= target_communities:
                return Partition(parts, q)
        elif q > best_q + 1e-12:
            best, best_q = parts, q
    if target_communities is not None:
        return Partition(components(), modularity(weights, components()))
    return Partition(best, best_q)


def _edge_betweenness(nodes: list[str], edges: set[tuple[str, str]]) -> dict[tuple[str, str], float]:
    """Brandes accumulation over unweighted shortest paths."""
    neighbor: dict[str, list[str]] = defaultdict(list)
    for u, v in edges:
        neighbor[u].append(v)
        neighbor[v].append(u)
    for lst in neighbor.values():
        lst.sort()

    betweenness = {e: 0.0 for e in edges}
    for s in nodes:
        # single-source shortest paths
        sigma = defaultdict(float)
        sigma[s] = 1.0
        dist = {s: 0}
        order = []
        queue = deque([s])
        parents = defaultdict(list)
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in neighbor[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    parents[w].append(v)
        delta = defaultdict(float)
        for w in reversed(order):
            for v in parents[w]:
                share = sigma[v] / sigma[w] * (1.0 + delta[w])
                edge = (v, w) if v < w else (w, v)
                betweenness[edge] += share
                delta[v] += share
    for e in betweenness:
        betweenness[e] /= 2.0
    return betweenness


# --- Tarjan SCC -----------------------------------------------------------------------

def tarjan_scc(g: InteractionGraph) -> list[list[str]]:
    """Strongly connected components, iteratively, emitted in reverse
    topological order of the condensation."""
    successors: dict[str, list[str]] = {n: [] for n in g.nodes}
    for (u, v) in g.directed_pairs():
        successors[u].append(v)
    for lst in successors.values():
        lst.sort()

    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    result: list[list[str]] = []

    for root in sorted(successors):
        if root in index:
            continue
        work = [(root, iter(successors[root]))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, successors_iter = work[-1]
            advanced = False
            for w in successors_iter:
                if w not in index:
                    index[w] = lowlink[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors[w])))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == v:
                        break
                result.append(sorted(component))
    return result


# --- Edmonds-Karp --------------------------------------------------------------------

def edmonds_karp(
    g: InteractionGraph,
    source: str,
    sink: str,
    capacity: Optional[dict[tuple[str, str], float]] = None,
) -> dict:
    """BFS augmenting paths; returns the max flow and a witnessing min cut.

    Default capacity of a directed pair is its parallel-edge count.
    """
    if source == sink:
        raise SameSourceSink("source and sink must differ")
    g.require_node(source)
    g.require_node(sink)
    if capacity is None:
        capacity = {pair: float(count) for pair, count in g.directed_pairs().items()}
    for pair, c in capacity.items():
        if c <= 0:
            raise ValueError(f"capacity of {pair} must be positive, got {c}")

    residual: dict[str, dict[str, float]] = defaultdict(dict)
    for (u, v), c in capacity.items():
        residual[u][v] = residual[u].get(v, 0.0) + c
        residual[v].setdefault(u, 0.0)

    max_flow = 0.0
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v in sorted(residual[u]):
                if v not in parent and residual[u][v] > 0:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            break
        bottleneck = float("inf")
        v = sink
        while parent[v] is not None:
            u = parent[v]
            bottleneck = min(bottleneck, residual[u][v])
            v = u
        v = sink
        while parent[v] is not None:
            u = parent[v]
            residual[u][v] -= bottleneck
            residual[v][u] = residual[v].get(u, 0.0) + bottleneck
            v = u
        max_flow += bottleneck

    reachable = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v, r in residual[u].items():
            if v not in reachable and r > 0:
                reachable.add(v)
                queue.append(v)
    min_cut = sorted(
        pair for pair in capacity if pair[0] in reachable and pair[1] not in reachable
    )
    return {"maxFlow": max_flow, "minCut": min_cut}
