"""Explicit universal-cover balls.

Brute-force substrate for cross-checking the counting DP and the sphere-size
formulas: every cover vertex is enumerated one by one, with child counts
taken directly from the edge multiplicities.  Funnel interiors are expanded
from their regular branching specs; tails are unrolled on demand.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import ResourceLimitError
from .graph import IndexedGraph, MaterializedGraph, materialize

NODE_LIMIT = 2_000_000


@dataclass
class CoverNode:
    label: str
    depth: int
    parent: int
    via_edge: str  # quotient edge of the step into this node ("" at the root)
    children: list


@dataclass
class CoverBall:
    base: str
    radius: int
    nodes: list  # CoverNode, index 0 is the root

    def label_counts(self):
        """Counter over (label, depth)."""
        c = Counter()
        for nd in self.nodes:
            c[(nd.label, nd.depth)] += 1
        return c

    def sphere_sizes(self):
        c = Counter()
        for nd in self.nodes:
            c[nd.depth] += 1
        return [c[d] for d in range(self.radius + 1)]

    def adjacency(self):
        """Undirected neighbor lists (indices), for boundary computations."""
        nbr = [[] for _ in self.nodes]
        for i, nd in enumerate(self.nodes):
            if nd.parent >= 0:
                nbr[i].append(nd.parent)
                nbr[nd.parent].append(i)
        return nbr


def _prepare(g: IndexedGraph, radius: int) -> MaterializedGraph:
    return materialize(g, radius + 1)


def _funnel_children(g, fspec, depth_in):
    return fspec.children(depth_in)


def build_cover_ball(g: IndexedGraph, base: str, radius: int, node_limit=NODE_LIMIT) -> CoverBall:
    """Exact ball of the universal cover around a lift of ``base``.

    Node labels are quotient vertex ids; funnel interior vertices get
    synthetic labels ~f<k>.d<depth>.
    """
    mat = _prepare(g, radius)
    froots = g.funnel_root_vertices()
    entry_by_root = {g.term[f.entry_edge]: (k, f) for k, f in enumerate(g.funnels)}
    nodes = [CoverNode(base, 0, -1, "", [])]
    # frontier entries: (node_index, kind, payload)
    #   kind "edge": payload = quotient edge just traversed
    #   kind "funnel": payload = (funnel_idx, depth_inside)
    frontier = []
    for e in mat.out_edges(base):
        for _ in range(mat.index[mat.rev[e]]):
            frontier.append((0, "edge", e))
    if base in froots:
        k, f = entry_by_root[base]
        for _ in range(f.children(0)):
            frontier.append((0, "funnel", (k, 1)))
    for depth in range(1, radius + 1):
        nxt = []
        for parent, kind, payload in frontier:
            if len(nodes) >= node_limit:
                raise ResourceLimitError(
                    f"cover ball exceeds {node_limit} vertices at radius {depth}"
                )
            if kind == "edge":
                e = payload
                v = mat.term[e]
                idx = len(nodes)
                nodes.append(CoverNode(v, depth, parent, e, []))
                nodes[parent].children.append(idx)
                if depth == radius:
                    continue
                for f, m in mat.continuations(e):
                    for _ in range(m):
                        nxt.append((idx, "edge", f))
                if v in entry_by_root and e == entry_by_root[v][1].entry_edge:
                    k, fs = entry_by_root[v]
                    for _ in range(fs.children(0)):
                        nxt.append((idx, "funnel", (k, 1)))
            else:
                k, din = payload
                fs = g.funnels[k]
                idx = len(nodes)
                nodes.append(CoverNode(f"~f{k}.d{din}", depth, parent, f"~f{k}", []))
                nodes[parent].children.append(idx)
                if depth == radius:
                    continue
                for _ in range(fs.children(din)):
                    nxt.append((idx, "funnel", (k, din + 1)))
        frontier = nxt
    return CoverBall(base, radius, nodes)


def cover_census(g: IndexedGraph, base: str, radius: int, node_limit=50_000_000):
    """Counter over (label, depth), enumerating every cover vertex individually.

    Memory-light variant of build_cover_ball for large radii; still an
    explicit one-iteration-per-vertex enumeration, not a weighted DP.
    """
    mat = _prepare(g, radius)
    froots = g.funnel_root_vertices()
    entry_by_root = {g.term[f.entry_edge]: (k, f) for k, f in enumerate(g.funnels)}
    counts = Counter()
    counts[(base, 0)] += 1
    total = 1
    # DFS over (kind, payload, depth); each pop = one cover vertex
    stack = []
    if radius >= 1:
        for e in mat.out_edges(base):
            for _ in range(mat.index[mat.rev[e]]):
                stack.append(("edge", e, 1))
        if base in froots:
            k, f = entry_by_root[base]
            for _ in range(f.children(0)):
                stack.append(("funnel", (k, 1), 1))
    while stack:
        kind, payload, depth = stack.pop()
        total += 1
        if total > node_limit:
            raise ResourceLimitError(f"cover census exceeds {node_limit} vertices")
        if kind == "edge":
            e = payload
            v = mat.term[e]
            counts[(v, depth)] += 1
            if depth == radius:
                continue
            for f, m in mat.continuations(e):
                for _ in range(m):
                    stack.append(("edge", f, depth + 1))
            if v in entry_by_root and e == entry_by_root[v][1].entry_edge:
                k, fs = entry_by_root[v]
                for _ in range(fs.children(0)):
                    stack.append(("funnel", (k, 1), depth + 1))
        else:
            k, din = payload
            counts[(f"~f{k}.d{din}", depth)] += 1
            if depth == radius:
                continue
            for _ in range(g.funnels[k].children(din)):
                stack.append(("funnel", (k, din + 1), depth + 1))
    return counts
