"""Clustered shortest-path tree problem: instances, decoder, validation.

An instance is an undirected weighted graph whose vertices are partitioned
into clusters, plus a source vertex.  A feasible solution is a spanning tree
whose induced subgraph on every cluster is itself connected; the objective
(minimized) is the sum over all vertices of their tree distance from the
source.

Instance files follow a TSPLIB-flavored layout::

    NAME: toy
    DIMENSION: 4
    CLUSTERS: 2
    SOURCE: 1
    EDGE_WEIGHT_TYPE: EXPLICIT        (or EUC_2D with NODE_COORD_SECTION)
    EDGE_SECTION
    1 2 1
    ...
    CLUSTER_SECTION
    1 1 2 -1
    2 3 4 -1
    EOF

Vertices are 1-based in files and 0-based internally.  EUC_2D instances are
complete graphs with weights rounded to the nearest integer.

Genotypes are integer priority vectors.  The decoder grows each cluster's
internal tree and the cluster-level tree by highest-priority frontier
expansion, realizes cluster-level edges as the cheapest concrete edge between
the two clusters, then orients everything away from the source.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from ..errors import ConfigurationError, InstanceFormatError, InvalidStateError
from ..mfo import TaskDefinition


@dataclass
class ClusteredGraph:
    """Parsed instance with 0-based vertices."""

    name: str
    n: int
    adjacency: dict  # adjacency[u][v] = weight, symmetric
    clusters: list  # list of sorted vertex tuples, file order
    source: int
    coords: Optional[list] = None

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    def cluster_of(self) -> list:
        owner = [None] * self.n
        for ci, cluster in enumerate(self.clusters):
            for v in cluster:
                owner[v] = ci
        return owner

    def edges(self):
        for u in range(self.n):
            for v, w in self.adjacency[u].items():
                if u < v:
                    yield u, v, w


@dataclass
class TreeSolution:
    """Spanning tree as a parent array oriented away from the source."""

    parent: list  # parent[v] is None for the source
    dist: list
    objective: float

    def edge_set(self):
        return {
            frozenset((v, p))
            for v, p in enumerate(self.parent)
            if p is not None
        }


def _nint(x: float) -> int:
    return int(x + 0.5)


_HEADER_KEYS = {"NAME", "DIMENSION", "CLUSTERS", "SOURCE", "EDGE_WEIGHT_TYPE"}
_SECTION_KEYS = {"NODE_COORD_SECTION", "EDGE_SECTION", "CLUSTER_SECTION"}


def parse_instance(text: str) -> ClusteredGraph:
    """Parse instance text, raising InstanceFormatError with line numbers."""
    header = {}
    coord_lines = []
    edge_lines = []
    cluster_lines = []
    section = None
    ended = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or ended:
            continue
        if line == "EOF":
            ended = True
            continue
        upper = line.split(":")[0].strip().upper()
        if upper in _HEADER_KEYS and ":" in line:
            key, _, value = line.partition(":")
            key = key.strip().upper()
            if key in header:
                raise InstanceFormatError(f"duplicate header {key}", lineno)
            header[key] = (value.strip(), lineno)
            section = None
            continue
        if line.upper() in _SECTION_KEYS:
            section = line.upper()
            continue
        if section == "NODE_COORD_SECTION":
            coord_lines.append((lineno, line))
        elif section == "EDGE_SECTION":
            edge_lines.append((lineno, line))
        elif section == "CLUSTER_SECTION":
            cluster_lines.append((lineno, line))
        else:
            raise InstanceFormatError(f"unexpected line {line!r}", lineno)

    def require(key):
        if key not in header:
            raise InstanceFormatError(f"missing header {key}")
        return header[key]

    name = header.get("NAME", ("unnamed", 0))[0]
    dim_text, dim_line = require("DIMENSION")
    try:
        n = int(dim_text)
    except ValueError:
        raise InstanceFormatError(f"DIMENSION is not an integer: {dim_text!r}", dim_line)
    if n < 1:
        raise InstanceFormatError("DIMENSION must be >= 1", dim_line)
    k_text, k_line = require("CLUSTERS")
    try:
        num_clusters = int(k_text)
    except ValueError:
        raise InstanceFormatError(f"CLUSTERS is not an integer: {k_text!r}", k_line)
    if num_clusters < 1:
        raise InstanceFormatError("CLUSTERS must be >= 1", k_line)
    src_text, src_line = require("SOURCE")
    try:
        source = int(src_text)
    except ValueError:
        raise InstanceFormatError(f"SOURCE is not an integer: {src_text!r}", src_line)
    if not 1 <= source <= n:
        raise InstanceFormatError(f"SOURCE {source} outside 1..{n}", src_line)
    weight_type, wt_line = require("EDGE_WEIGHT_TYPE")
    weight_type = weight_type.upper()
    if weight_type not in ("EUC_2D", "EXPLICIT"):
        raise InstanceFormatError(f"unsupported EDGE_WEIGHT_TYPE {weight_type!r}", wt_line)

    adjacency = {v: {} for v in range(n)}
    coords = None
    if weight_type == "EUC_2D":
        if not coord_lines:
            raise InstanceFormatError("EUC_2D instance without NODE_COORD_SECTION")
        coords = [None] * n
        for lineno, line in coord_lines:
            parts = line.split()
            if len(parts) != 3:
                raise InstanceFormatError(f"expected 'id x y', got {line!r}", lineno)
            try:
                vid = int(parts[0])
                x, y = float(parts[1]), float(parts[2])
            except ValueError:
                raise InstanceFormatError(f"bad coordinate line {line!r}", lineno)
            if not 1 <= vid <= n:
                raise InstanceFormatError(f"vertex {vid} outside 1..{n}", lineno)
            if coords[vid - 1] is not None:
                raise InstanceFormatError(f"duplicate coordinates for vertex {vid}", lineno)
            coords[vid - 1] = (x, y)
        missing = [v + 1 for v in range(n) if coords[v] is None]
        if missing:
            raise InstanceFormatError(f"missing coordinates for vertices {missing}")
        for u in range(n):
            for v in range(u + 1, n):
                dx = coords[u][0] - coords[v][0]
                dy = coords[u][1] - coords[v][1]
                w = _nint(math.hypot(dx, dy))
                adjacency[u][v] = w
                adjacency[v][u] = w
    else:
        if not edge_lines:
            raise InstanceFormatError("EXPLICIT instance without EDGE_SECTION")
        for lineno, line in edge_lines:
            parts = line.split()
            if len(parts) != 3:
                raise InstanceFormatError(f"expected 'u v w', got {line!r}", lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2])
            except ValueError:
                raise InstanceFormatError(f"bad edge line {line!r}", lineno)
            if not (1 <= u <= n and 1 <= v <= n):
                raise InstanceFormatError(f"edge endpoint outside 1..{n}", lineno)
            if u == v:
                raise InstanceFormatError(f"self-loop on vertex {u}", lineno)
            if w < 0:
                raise InstanceFormatError(f"negative weight {w}", lineno)
            ui, vi = u - 1, v - 1
            if vi in adjacency[ui]:
                raise InstanceFormatError(f"duplicate edge {u}-{v}", lineno)
            if w == int(w):
                w = int(w)
            adjacency[ui][vi] = w
            adjacency[vi][ui] = w

    if len(cluster_lines) != num_clusters:
        raise InstanceFormatError(
            f"CLUSTER_SECTION holds {len(cluster_lines)} lines, expected {num_clusters}"
        )
    assigned = {}
    clusters_by_id = {}
    for lineno, line in cluster_lines:
        parts = line.split()
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise InstanceFormatError(f"bad cluster line {line!r}", lineno)
        if len(values) < 3 or values[-1] != -1:
            raise InstanceFormatError("cluster line must be 'id v1 ... -1'", lineno)
        cid, members = values[0], values[1:-1]
        if not 1 <= cid <= num_clusters:
            raise InstanceFormatError(f"cluster id {cid} outside 1..{num_clusters}", lineno)
        if cid in clusters_by_id:
            raise InstanceFormatError(f"duplicate cluster id {cid}", lineno)
        for v in members:
            if not 1 <= v <= n:
                raise InstanceFormatError(f"vertex {v} outside 1..{n}", lineno)
            if v in assigned:
                raise InstanceFormatError(
                    f"vertex {v} already belongs to cluster {assigned[v]}", lineno
                )
            assigned[v] = cid
        clusters_by_id[cid] = tuple(sorted(v - 1 for v in members))
    unassigned = [v for v in range(1, n + 1) if v not in assigned]
    if unassigned:
        raise InstanceFormatError(f"vertices {unassigned} belong to no cluster")
    clusters = [clusters_by_id[cid] for cid in range(1, num_clusters + 1)]

    graph = ClusteredGraph(
        name=name,
        n=n,
        adjacency=adjacency,
        clusters=clusters,
        source=source - 1,
        coords=coords,
    )
    _check_connectivity(graph)
    return graph


def parse_file(path) -> ClusteredGraph:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_instance(handle.read())


def _check_connectivity(g: ClusteredGraph) -> None:
    if _reachable(g.adjacency, 0, range(g.n)) != set(range(g.n)):
        raise InstanceFormatError("graph is not connected")
    for ci, cluster in enumerate(g.clusters, start=1):
        inside = set(cluster)
        if _reachable(g.adjacency, cluster[0], inside) != inside:
            raise InstanceFormatError(f"induced subgraph of cluster {ci} is not connected")


def _reachable(adjacency, start, allowed) -> set:
    allowed = set(allowed)
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v in allowed and v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def _grow_cluster_tree(g: ClusteredGraph, cluster, prio):
    """Spanning tree of one cluster by highest-priority frontier expansion.

    The seed is the cluster's highest-priority vertex (ties: lower id); each
    step adds the frontier vertex with the highest priority, ties broken by
    lower vertex id, then lower edge weight, then lower tree-side endpoint.
    """
    members = set(cluster)
    seed = min(cluster, key=lambda v: (-prio[v], v))
    in_tree = {seed}
    edges = []
    while len(in_tree) < len(cluster):
        best = None
        for u in in_tree:
            for v, w in g.adjacency[u].items():
                if v in members and v not in in_tree:
                    key = (-prio[v], v, w, u)
                    if best is None or key < best[0]:
                        best = (key, u, v)
        if best is None:
            raise InvalidStateError("cluster subgraph is not connected")
        _, u, v = best
        edges.append((u, v))
        in_tree.add(v)
    return edges


def _connect_clusters(g: ClusteredGraph, prio):
    """Choose the inter-cluster edges via a cluster-level priority tree.

    The cluster graph is grown from the source's cluster with the same
    frontier rule, using each cluster's lowest-id vertex for its priority;
    every chosen cluster edge is realized as the minimum-weight concrete edge
    between the two clusters (ties by lower endpoint ids).
    """
    owner = g.cluster_of()
    rep = {}
    for u, v, w in g.edges():
        cu, cv = owner[u], owner[v]
        if cu == cv:
            continue
        pair = (min(cu, cv), max(cu, cv))
        lo, hi = min(u, v), max(u, v)
        cand = (w, lo, hi)
        if pair not in rep or cand < rep[pair]:
            rep[pair] = cand
    cluster_prio = [prio[min(cluster)] for cluster in g.clusters]
    root = owner[g.source]
    in_tree = {root}
    edges = []
    while len(in_tree) < g.num_clusters:
        best = None
        for a in in_tree:
            for b in range(g.num_clusters):
                if b in in_tree:
                    continue
                pair = (min(a, b), max(a, b))
                if pair not in rep:
                    continue
                w = rep[pair][0]
                key = (-cluster_prio[b], b, w, a)
                if best is None or key < best[0]:
                    best = (key, pair)
        if best is None:
            raise InvalidStateError("cluster-level graph is not connected")
        _, pair = best
        _, lo, hi = rep[pair]
        edges.append((lo, hi))
        in_tree.add(pair[0] if pair[1] in in_tree else pair[1])
    return edges


def decode(g: ClusteredGraph, genotype) -> TreeSolution:
    """Decode a priority vector into a feasible clustered spanning tree."""
    if len(genotype) < g.n:
        raise ConfigurationError(
            f"genotype length {len(genotype)} is shorter than vertex count {g.n}"
        )
    prio = genotype
    tree_edges = []
    for cluster in g.clusters:
        tree_edges.extend(_grow_cluster_tree(g, cluster, prio))
    tree_edges.extend(_connect_clusters(g, prio))

    neighbors = {v: [] for v in range(g.n)}
    for u, v in tree_edges:
        w = g.adjacency[u][v]
        neighbors[u].append((v, w))
        neighbors[v].append((u, w))
    parent = [None] * g.n
    dist = [math.inf] * g.n
    dist[g.source] = 0.0
    queue = deque([g.source])
    seen = {g.source}
    while queue:
        u = queue.popleft()
        for v, w in neighbors[u]:
            if v not in seen:
                seen.add(v)
                parent[v] = u
                dist[v] = dist[u] + w
                queue.append(v)
    if len(seen) != g.n:
        raise InvalidStateError("decoded edge set does not span the graph")
    return TreeSolution(parent=parent, dist=dist, objective=float(sum(dist)))


def objective(sol: TreeSolution) -> float:
    """Sum of tree distances from the source over all vertices."""
    return float(sum(sol.dist))


def recompute_objective(g: ClusteredGraph, parent) -> float:
    """Recompute sum of source distances from a parent array alone."""
    dist = [None] * g.n
    dist[g.source] = 0.0
    for v in range(g.n):
        chain = []
        x = v
        while dist[x] is None:
            chain.append(x)
            p = parent[x]
            if p is None or len(chain) > g.n:
                raise InvalidStateError("parent array does not reach the source")
            if p not in g.adjacency[x]:
                raise InvalidStateError(f"edge {x}-{p} is not in the graph")
            x = p
        for node in reversed(chain):
            dist[node] = dist[parent[node]] + g.adjacency[node][parent[node]]
    return float(sum(dist))


def validate(g: ClusteredGraph, sol: TreeSolution):
    """Structural checks; returns a list of violation strings (empty = valid)."""
    violations = []
    if len(sol.parent) != g.n:
        return [f"parent array length {len(sol.parent)} != {g.n}"]
    if sol.parent[g.source] is not None:
        violations.append("source must have no parent")
    for v, p in enumerate(sol.parent):
        if v == g.source:
            continue
        if p is None:
            violations.append(f"vertex {v + 1} has no parent")
        elif not (0 <= p < g.n):
            violations.append(f"vertex {v + 1} has parent outside the graph")
        elif p not in g.adjacency[v]:
            violations.append(f"edge {v + 1}-{p + 1} is not in the graph")
    if violations:
        return violations
    for v in range(g.n):
        hops = 0
        x = v
        while x != g.source:
            x = sol.parent[x]
            hops += 1
            if x is None or hops > g.n:
                return ["not a tree: a vertex cannot reach the source"]
    tree_edges = sol.edge_set()
    for ci, cluster in enumerate(g.clusters, start=1):
        inside = set(cluster)
        local = {v: [] for v in cluster}
        for e in tree_edges:
            u, v = tuple(e)
            if u in inside and v in inside:
                local[u].append(v)
                local[v].append(u)
        seen = {cluster[0]}
        queue = deque([cluster[0]])
        while queue:
            u = queue.popleft()
            for v in local[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        if seen != inside:
            violations.append(f"induced subtree of cluster {ci} is disconnected")
    return violations


def make_task(
    g: ClusteredGraph,
    task_id: int = 1,
    alphabet_size: Optional[int] = None,
    known_optimum: Optional[float] = None,
) -> TaskDefinition:
    """Wrap an instance as an engine task over priority genotypes."""
    return TaskDefinition(
        task_id=task_id,
        dimension=g.n,
        alphabet_size=alphabet_size if alphabet_size is not None else max(g.n, 2),
        objective=lambda genes, _g=g: decode(_g, genes).objective,
        known_optimum=known_optimum,
    )
