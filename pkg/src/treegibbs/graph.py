"""Edge-indexed quotient graphs.

An edge-indexed graph is a finite connected core of oriented edges closed
under a fixpoint-free reversal, a positive integer index i(e) per oriented
edge, optional eventually-periodic ray tails hanging off core vertices, and
optional funnel markers.  The universal cover is a locally finite tree whose
local branching is determined entirely by the indices: a lift of an edge e
continues along i(rev(f)) lifts of each edge f != rev(e) and along
i(e) - 1 lifts of rev(e).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError, GraphError, NoClosedGeodesicError, NonUnimodularError

RESERVED_PREFIX = "~"


@dataclass(frozen=True)
class TailSpec:
    """Eventually-periodic ray attached to a core vertex.

    Level n >= 1 of the ray carries an up edge e_n (away from the core) and
    its reversal; ``pair(n)`` returns (i(e_n), i(rev(e_n))).
    """

    attach: str
    prefix: tuple = ()
    period: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple((int(a), int(b)) for a, b in self.prefix))
        object.__setattr__(self, "period", tuple((int(a), int(b)) for a, b in self.period))

    def pair(self, n):
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        return self.period[(n - len(self.prefix) - 1) % len(self.period)]

    @property
    def period_start(self):
        """First level governed by the periodic part."""
        return len(self.prefix) + 1

    def is_cuspidal(self):
        """True when every downward index is 1 (mass cannot re-ascend after turning)."""
        return all(b == 1 for _, b in self.prefix) and all(b == 1 for _, b in self.period)


@dataclass(frozen=True)
class FunnelSpec:
    """Funnel marker: entry edge plus the regular branching of the interior."""

    entry_edge: str
    branching: tuple = (2,)

    def __post_init__(self):
        object.__setattr__(self, "branching", tuple(int(b) for b in self.branching))

    def children(self, depth):
        """Branching of a funnel-interior vertex at the given depth past the root."""
        return self.branching[depth % len(self.branching)]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple
    warnings: tuple = ()

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        lines = [f"violation[{v.code}]: {v.message}" for v in self.violations]
        lines += [f"warning[{v.code}]: {v.message}" for v in self.warnings]
        return "\n".join(lines) if lines else "ok"


@dataclass(frozen=True)
class IndexedGraph:
    """Finite core of an edge-indexed graph with tail and funnel attachments.

    ``edges`` are oriented; ``rev`` is the reversal involution, ``orig`` and
    ``term`` the endpoint maps, ``index`` the map e -> i(e).
    """

    vertices: tuple
    edges: tuple
    rev: dict
    orig: dict
    term: dict
    index: dict
    tails: tuple = ()
    funnels: tuple = ()
    base_vertex: str = ""
    base_value: Fraction = Fraction(1)
    _out: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))
        object.__setattr__(self, "tails", tuple(self.tails))
        object.__setattr__(self, "funnels", tuple(self.funnels))
        if not self.base_vertex and self.vertices:
            object.__setattr__(self, "base_vertex", self.vertices[0])
        object.__setattr__(self, "base_value", Fraction(self.base_value))
        out = {v: [] for v in self.vertices}
        for e in self.edges:
            if self.orig.get(e) in out:
                out[self.orig[e]].append(e)
        for v in out:
            out[v].sort()
        object.__setattr__(self, "_out", out)

    # -- basic accessors -------------------------------------------------

    def out_edges(self, v):
        return self._out[v]

    def funnel_edge_ids(self):
        """Oriented edges excluded from the geodesic support (both orientations)."""
        s = set()
        for f in self.funnels:
            s.add(f.entry_edge)
            s.add(self.rev[f.entry_edge])
        return s

    def funnel_for_edge(self, e):
        for f in self.funnels:
            if f.entry_edge == e:
                return f
        return None

    def tails_at(self, v):
        return [(t, spec) for t, spec in enumerate(self.tails) if spec.attach == v]

    def funnel_root_vertices(self):
        return {self.term[f.entry_edge]: f for f in self.funnels}


# ---------------------------------------------------------------------------
# operations


def validate_graph(g: IndexedGraph) -> ValidationReport:
    """Check the structural axioms; returns a diagnostic report, never raises."""
    bad = []
    warn = []
    eset = set(g.edges)
    vset = set(g.vertices)
    for v in g.vertices:
        if v.startswith(RESERVED_PREFIX):
            bad.append(Violation("reserved-id", f"vertex id {v!r} uses reserved prefix"))
    for e in g.edges:
        if e.startswith(RESERVED_PREFIX):
            bad.append(Violation("reserved-id", f"edge id {e!r} uses reserved prefix"))
        r = g.rev.get(e)
        if r is None or r not in eset:
            bad.append(Violation("involution-broken", f"rev({e}) missing"))
            continue
        if r == e:
            bad.append(Violation("involution-fixpoint", f"involution has fixpoint at {e}"))
        elif g.rev.get(r) != e:
            bad.append(Violation("involution-broken", f"rev(rev({e})) = {g.rev.get(r)} != {e}"))
        if g.orig.get(e) not in vset or g.term.get(e) not in vset:
            bad.append(Violation("unknown-vertex", f"edge {e} has endpoint outside vertex set"))
        elif r in eset and r != e:
            if g.orig.get(r) != g.term.get(e) or g.term.get(r) != g.orig.get(e):
                bad.append(Violation("endpoints-mismatch", f"rev({e}) does not swap endpoints"))
        idx = g.index.get(e)
        if not isinstance(idx, int) or idx < 1:
            bad.append(Violation("bad-index", f"index of {e} must be a positive integer, got {idx!r}"))
    # core connectivity over undirected edges
    if g.vertices:
        seen = {g.vertices[0]}
        stack = [g.vertices[0]]
        while stack:
            v = stack.pop()
            for e in g.out_edges(v):
                w = g.term.get(e)
                if w in vset and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != vset:
            missing = sorted(vset - seen)
            bad.append(Violation("core-disconnected", f"core not connected (unreached: {missing})"))
    for t, spec in enumerate(g.tails):
        if spec.attach not in vset:
            bad.append(Violation("unknown-vertex", f"tail {t} attaches at unknown vertex {spec.attach!r}"))
        if not spec.period:
            bad.append(Violation("tail-bad-period", f"tail {t} has empty period"))
        for a, b in spec.prefix + spec.period:
            if a < 1 or b < 1:
                bad.append(Violation("bad-index", f"tail {t} carries index < 1"))
    for f in g.funnels:
        if f.entry_edge not in eset:
            bad.append(Violation("funnel-unknown-edge", f"funnel entry {f.entry_edge!r} not an edge"))
        if any(b < 1 for b in f.branching):
            bad.append(Violation("bad-index", f"funnel at {f.entry_edge} has branching < 1"))
    if not bad:
        for v in g.vertices:
            d = lift_degree(g, v)
            if d < 1:
                bad.append(Violation("bad-degree", f"vertex {v} has lift degree 0"))
            elif d == 1:
                warn.append(Violation("lift-degree-one", f"vertex {v} has lift degree 1; no geodesic passes"))
    return ValidationReport(tuple(bad), tuple(warn))


def edge_multiplicity(g, e, f):
    """Number of lifts of f extending a fixed lift of e without backtracking."""
    if g.term[e] != g.orig[f]:
        raise GraphError(f"edges not composable: term({e}) != orig({f})")
    if f == g.rev[e]:
        return g.index[e] - 1
    return g.index[g.rev[f]]


def lift_degree(g, a):
    """Degree of any lift of the vertex a in the universal cover."""
    froots = g.funnel_root_vertices()
    if a in froots:
        f = froots[a]
        return g.index[f.entry_edge] + f.children(0)
    if a not in g._out:
        raise GraphError(f"unknown vertex {a!r}")
    d = sum(g.index[g.rev[e]] for e in g.out_edges(a))
    for _, spec in g.tails_at(a):
        d += spec.pair(1)[1]
    return d


@dataclass(frozen=True)
class OrderGrading:
    """Vertex and edge order values N(a), N(e) (rationals; only ratios matter)."""

    vertex_order: dict
    edge_order: dict
    base_vertex: str
    base_value: Fraction

    def vertex(self, a):
        return self.vertex_order[a]

    def edge(self, e):
        return self.edge_order[e]


def propagate_orders(g, base_vertex=None, base_value=None):
    """Propagate N along a spanning tree from N(base)=base_value; check cycles.

    N obeys N(orig(e)) = N(term(e)) * i(rev(e)) / i(e) and N(e) = N(term(e)) / i(e).
    Raises NonUnimodularError when some cycle has inconsistent index ratios.
    """
    base_vertex = base_vertex or g.base_vertex
    base_value = Fraction(base_value if base_value is not None else g.base_value)
    if base_vertex not in g._out:
        raise GraphError(f"unknown base vertex {base_vertex!r}")
    nv = {base_vertex: base_value}
    stack = [base_vertex]
    while stack:
        v = stack.pop()
        for e in g.out_edges(v):
            w = g.term[e]
            # N(term) = N(orig) * i(e) / i(rev(e))
            val = nv[v] * Fraction(g.index[e], g.index[g.rev[e]])
            if w in nv:
                if nv[w] != val:
                    raise NonUnimodularError(
                        f"cycle through {w} has index ratio {val / nv[w]} != 1"
                    )
            else:
                nv[w] = val
                stack.append(w)
    ne = {e: nv[g.term[e]] / g.index[e] for e in g.edges}
    for e in g.edges:
        if ne[e] != ne[g.rev[e]]:
            raise NonUnimodularError(f"edge order mismatch at {e}")
    return OrderGrading(nv, ne, base_vertex, base_value)


# ---------------------------------------------------------------------------
# materialization (tails unrolled to finite depth)


def tail_vertex_id(t, n):
    return f"~t{t}.v{n}"


def tail_edge_id(t, n, up):
    return f"~t{t}.{'e' if up else 'r'}{n}"


@dataclass(frozen=True)
class MaterializedGraph:
    """Core plus tails unrolled to ``depth`` levels.

    Behaves like a finite edge-indexed graph; ``edge_meta`` maps each edge to
    ("core",) or ("tail", tail_index, level, "up"|"dn").  States whose whole
    transition row stays inside the materialization are ``interior``.
    """

    core: IndexedGraph
    depth: int
    vertices: tuple
    edges: tuple
    rev: dict
    orig: dict
    term: dict
    index: dict
    edge_meta: dict
    _out: dict = field(repr=False, compare=False, default=None)

    def out_edges(self, v):
        return self._out[v]

    def multiplicity(self, e, f):
        if self.term[e] != self.orig[f]:
            raise GraphError(f"edges not composable: term({e}) != orig({f})")
        if f == self.rev[e]:
            return self.index[e] - 1
        return self.index[self.rev[f]]

    def continuations(self, e):
        """(f, m(e, f)) over positive-multiplicity continuations of e."""
        out = []
        for f in self._out[self.term[e]]:
            m = self.index[e] - 1 if f == self.rev[e] else self.index[self.rev[f]]
            if m > 0:
                out.append((f, m))
        return out

    def funnel_edge_ids(self):
        return self.core.funnel_edge_ids()

    def tail_level(self, e):
        meta = self.edge_meta[e]
        return meta[2] if meta[0] == "tail" else 0

    def is_interior(self, e):
        meta = self.edge_meta[e]
        return meta[0] == "core" or meta[2] < self.depth

    def nonfunnel_states(self):
        funnel = self.funnel_edge_ids()
        return tuple(e for e in self.edges if e not in funnel)


def materialize(g: IndexedGraph, depth: int) -> MaterializedGraph:
    """Unroll every tail to ``depth`` levels (0 keeps the bare core)."""
    vertices = list(g.vertices)
    edges = list(g.edges)
    rev = dict(g.rev)
    orig = dict(g.orig)
    term = dict(g.term)
    index = dict(g.index)
    meta = {e: ("core",) for e in g.edges}
    for t, spec in enumerate(g.tails):
        prev = spec.attach
        for n in range(1, depth + 1):
            iu, idn = spec.pair(n)
            v = tail_vertex_id(t, n)
            eu = tail_edge_id(t, n, True)
            ed = tail_edge_id(t, n, False)
            vertices.append(v)
            edges += [eu, ed]
            rev[eu] = ed
            rev[ed] = eu
            orig[eu], term[eu] = prev, v
            orig[ed], term[ed] = v, prev
            index[eu], index[ed] = iu, idn
            meta[eu] = ("tail", t, n, "up")
            meta[ed] = ("tail", t, n, "dn")
            prev = v
    out = {v: [] for v in vertices}
    for e in edges:
        out[orig[e]].append(e)
    for v in out:
        out[v].sort()
    return MaterializedGraph(
        core=g,
        depth=depth,
        vertices=tuple(vertices),
        edges=tuple(sorted(edges)),
        rev=rev,
        orig=orig,
        term=term,
        index=index,
        edge_meta=meta,
        _out=out,
    )


def orders_on(mat: MaterializedGraph, grading: OrderGrading):
    """Extend a core order grading to a materialized graph (tail levels included)."""
    nv = dict(grading.vertex_order)
    ne = dict(grading.edge_order)
    for t, spec in enumerate(mat.core.tails):
        val = nv[spec.attach]
        for n in range(1, mat.depth + 1):
            iu, idn = spec.pair(n)
            val = val * Fraction(iu, idn)
            nv[tail_vertex_id(t, n)] = val
            ne[tail_edge_id(t, n, True)] = val / iu
            ne[tail_edge_id(t, n, False)] = val / iu
    return OrderGrading(nv, ne, grading.base_vertex, grading.base_value)


# ---------------------------------------------------------------------------
# length spectrum period


def _scc_periods(states, succ):
    """gcd of cycle lengths per strongly connected component (Tarjan + BFS levels)."""
    import math

    indexv, low, onstack, stack, sccs = {}, {}, set(), [], []
    counter = [0]

    def strongconnect(root):
        work = [(root, iter(succ[root]))]
        indexv[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        onstack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in indexv:
                    indexv[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    onstack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                elif w in onstack:
                    low[v] = min(low[v], indexv[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == indexv[v]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(comp)

    for s in states:
        if s not in indexv:
            strongconnect(s)

    periods = []
    for comp in sccs:
        cset = set(comp)
        has_cycle = len(comp) > 1 or any(w in cset and w == comp[0] for w in succ[comp[0]])
        if len(comp) == 1 and comp[0] not in succ[comp[0]]:
            continue
        if not has_cycle:
            continue
        # BFS levels; gcd of (level(v) + 1 - level(w)) over edges v->w inside comp
        root = comp[0]
        level = {root: 0}
        order = [root]
        g = 0
        qi = 0
        while qi < len(order):
            v = order[qi]
            qi += 1
            for w in succ[v]:
                if w not in cset:
                    continue
                if w not in level:
                    level[w] = level[v] + 1
                    order.append(w)
                else:
                    g = math.gcd(g, level[v] + 1 - level[w])
        periods.append(abs(g) if g else 0)
    return [p for p in periods if p > 0]


def length_spectrum_period(g: IndexedGraph) -> int:
    """gcd of lengths of positive-multiplicity closed non-backtracking paths."""
    import math

    horizon = 1
    for spec in g.tails:
        horizon = max(horizon, len(spec.prefix) + 2 * len(spec.period) + 1)
    mat = materialize(g, horizon)
    funnel = mat.funnel_edge_ids()
    states = [e for e in mat.edges if e not in funnel]
    succ = {e: [f for f, _ in mat.continuations(e) if f not in funnel] for e in states}
    periods = _scc_periods(states, succ)
    if not periods:
        raise NoClosedGeodesicError("no closed non-backtracking path of positive multiplicity")
    k = 0
    for p in periods:
        k = math.gcd(k, p)
    return k


# ---------------------------------------------------------------------------
# JSON config


def graph_from_dict(d: dict) -> IndexedGraph:
    """Parse the graph config schema; raises ConfigError with a field path."""
    allowed = {"vertices", "edges", "tails", "funnels", "orders"}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown graph config fields: {sorted(unknown)}")
    try:
        vertices = [str(v) for v in d["vertices"]]
        raw_edges = d["edges"]
    except KeyError as exc:
        raise ConfigError(f"missing required field {exc}") from exc
    rev, orig, term, index = {}, {}, {}, {}
    edges = []
    for pos, ed in enumerate(raw_edges):
        extra = set(ed) - {"id", "rev", "from", "to", "index"}
        if extra:
            raise ConfigError(f"edges[{pos}]: unknown fields {sorted(extra)}")
        try:
            eid = str(ed["id"])
            edges.append(eid)
            rev[eid] = str(ed["rev"])
            orig[eid] = str(ed["from"])
            term[eid] = str(ed["to"])
            idx = ed["index"]
        except KeyError as exc:
            raise ConfigError(f"edges[{pos}]: missing field {exc}") from exc
        if not isinstance(idx, int) or idx < 1:
            raise ConfigError(f"edges[{pos}].index: must be a positive integer, got {idx!r}")
        index[eid] = idx
    tails = []
    for pos, td in enumerate(d.get("tails", [])):
        extra = set(td) - {"attach", "prefix", "period"}
        if extra:
            raise ConfigError(f"tails[{pos}]: unknown fields {sorted(extra)}")
        tails.append(
            TailSpec(
                attach=str(td["attach"]),
                prefix=tuple((int(a), int(b)) for a, b in td.get("prefix", [])),
                period=tuple((int(a), int(b)) for a, b in td.get("period", [])),
            )
        )
    funnels = []
    for pos, fd in enumerate(d.get("funnels", [])):
        extra = set(fd) - {"entry_edge", "branching"}
        if extra:
            raise ConfigError(f"funnels[{pos}]: unknown fields {sorted(extra)}")
        funnels.append(
            FunnelSpec(entry_edge=str(fd["entry_edge"]), branching=tuple(fd.get("branching", [2])))
        )
    orders = d.get("orders", {})
    extra = set(orders) - {"base_vertex", "base_value"}
    if extra:
        raise ConfigError(f"orders: unknown fields {sorted(extra)}")
    base_vertex = str(orders.get("base_vertex", vertices[0] if vertices else ""))
    base_value = Fraction(str(orders.get("base_value", 1)))
    return IndexedGraph(
        vertices=tuple(vertices),
        edges=tuple(edges),
        rev=rev,
        orig=orig,
        term=term,
        index=index,
        tails=tuple(tails),
        funnels=tuple(funnels),
        base_vertex=base_vertex,
        base_value=base_value,
    )


def graph_to_dict(g: IndexedGraph) -> dict:
    return {
        "vertices": list(g.vertices),
        "edges": [
            {"id": e, "rev": g.rev[e], "from": g.orig[e], "to": g.term[e], "index": g.index[e]}
            for e in g.edges
        ],
        "tails": [
            {"attach": t.attach, "prefix": [list(p) for p in t.prefix], "period": [list(p) for p in t.period]}
            for t in g.tails
        ],
        "funnels": [{"entry_edge": f.entry_edge, "branching": list(f.branching)} for f in g.funnels],
        "orders": {"base_vertex": g.base_vertex, "base_value": str(g.base_value)},
    }


def graph_from_json(path) -> IndexedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return graph_from_dict(d)
