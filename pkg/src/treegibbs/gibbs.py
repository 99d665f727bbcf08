"""Thermodynamic layer: potentials, critical exponents, shadow vectors.

The weighted non-backtracking transfer operator T(s)[e, f] = m(e, f) exp(F(f) - s)
drives everything here.  For a finite quotient the critical exponent is the log
of its spectral radius.  Ray tails are resummed through first-return Green
values g_n(s): the total weight of excursions that enter a ray at level n and
first come back down, a minimal fixed point of one Moebius map per level.  The
shadow vector u(e) (boundary mass of the set of directions through e, seen
from the head of e) is the positive fixed vector of T(delta); on tails it is
recovered level by level from the identity u(e_n) = g_n * u(rev(e_n)), which
keeps the decaying solution branch without any unstable subtraction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    DivergenceError,
    GraphError,
    NoPositiveSolutionError,
    ReducibleChainError,
)
from .graph import IndexedGraph, MaterializedGraph, materialize, tail_edge_id

DEFAULT_DEPTH = 80


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class TailPotential:
    """Eventually-periodic potential values (F(e_n), F(rev e_n)) along a tail."""

    prefix: tuple = ()
    period: tuple = ((0.0, 0.0),)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple((float(a), float(b)) for a, b in self.prefix))
        per = tuple((float(a), float(b)) for a, b in self.period) or ((0.0, 0.0),)
        object.__setattr__(self, "period", per)

    def pair(self, n):
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        return self.period[(n - len(self.prefix) - 1) % len(self.period)]


@dataclass(frozen=True)
class Potential:
    """Real weight per quotient oriented edge; tails carry (prefix, period) specs."""

    values: dict
    tail_values: tuple = ()

    @staticmethod
    def zero(g: IndexedGraph):
        return Potential({e: 0.0 for e in g.edges}, tuple(TailPotential() for _ in g.tails))

    @staticmethod
    def constant(g: IndexedGraph, c: float):
        c = float(c)
        return Potential(
            {e: c for e in g.edges},
            tuple(TailPotential(period=((c, c),)) for _ in g.tails),
        )

    def tail(self, t):
        if t < len(self.tail_values) and self.tail_values[t] is not None:
            return self.tail_values[t]
        return TailPotential()

    def on(self, mat: MaterializedGraph, minus=False):
        """Edge -> value map over a materialized graph; minus gives F(rev e)."""
        vals = {}
        for e in mat.edges:
            meta = mat.edge_meta[e]
            if meta[0] == "core":
                key = mat.rev[e] if minus else e
                vals[e] = float(self.values.get(key, 0.0))
            else:
                _, t, n, direction = meta
                fu, fd = self.tail(t).pair(n)
                up = direction == "up"
                if minus:
                    up = not up
                vals[e] = fu if up else fd
        return vals


def potential_from_dict(g: IndexedGraph, d: dict) -> Potential:
    allowed = {"edges", "tail_values"}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown potential fields: {sorted(unknown)}")
    values = {e: 0.0 for e in g.edges}
    for k, v in d.get("edges", {}).items():
        if k not in values:
            raise ConfigError(f"potential assigns unknown edge {k!r}")
        values[k] = float(v)
    tails = [TailPotential() for _ in g.tails]
    for pos, td in enumerate(d.get("tail_values", [])):
        extra = set(td) - {"tail_index", "prefix", "period"}
        if extra:
            raise ConfigError(f"tail_values[{pos}]: unknown fields {sorted(extra)}")
        t = int(td["tail_index"])
        if not 0 <= t < len(g.tails):
            raise ConfigError(f"tail_values[{pos}].tail_index out of range")
        tails[t] = TailPotential(
            prefix=tuple(tuple(p) for p in td.get("prefix", [])),
            period=tuple(tuple(p) for p in td.get("period", [(0.0, 0.0)])),
        )
    return Potential(values, tuple(tails))


def potential_from_json(g: IndexedGraph, path) -> Potential:
    with open(path, "r", encoding="utf-8") as fh:
        return potential_from_dict(g, json.load(fh))


# ---------------------------------------------------------------------------
# spectral radius


def spectral_radius(T: np.ndarray, tol=1e-14, maxit=20000):
    """Perron value of a nonnegative matrix.

    Power iteration on T + I from the all-ones vector (the shift makes the
    peripheral spectrum unique); falls back to dense eigenvalues when the
    gap is too small for iteration to settle.
    """
    n = T.shape[0]
    if n == 0:
        return 0.0
    A = T + np.eye(n)
    v = np.ones(n)
    prev = -1.0
    for _ in range(maxit):
        w = A @ v
        est = w.sum() / v.sum()
        nw = np.linalg.norm(w, 1)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(est - prev) < tol * max(1.0, abs(est)):
            return est - 1.0
        prev = est
    return float(max(abs(np.linalg.eigvals(T))))


# ---------------------------------------------------------------------------
# transfer matrices


def transfer_matrix(g: IndexedGraph, F: Potential | None, s: float, depth: int | None = None):
    """(states, T) with T[e, f] = m(e, f) exp(F(f) - s), funnel edges dropped.

    With tails present the matrix is the truncation to ``depth`` materialized
    levels; exact resummation happens elsewhere.
    """
    depth = DEFAULT_DEPTH if depth is None else depth
    mat = materialize(g, depth if g.tails else 0)
    F = F or Potential.zero(g)
    return _transfer_on(mat, F.on(mat), s)


def _transfer_on(mat: MaterializedGraph, fvals: dict, s: float):
    states = mat.nonfunnel_states()
    pos = {e: i for i, e in enumerate(states)}
    T = np.zeros((len(states), len(states)))
    funnel = mat.funnel_edge_ids()
    for e in states:
        for f, m in mat.continuations(e):
            if f in funnel:
                continue
            T[pos[e], pos[f]] = m * math.exp(fvals[f] - s)
    return states, T


# ---------------------------------------------------------------------------
# tail Green values


class TailGreen:
    """First-return weights g_n(s) for one ray tail.

    g_n is the total weight of non-backtracking excursions that start with the
    up edge at level n, stay at levels >= n, and end on the first traversal of
    the level-n down edge.  It satisfies
        g_n = a_n + b_n g_{n+1} / (1 - c_n g_{n+1}),
    a Moebius map per level, eventually periodic; the periodic fixed point is
    the minimal nonnegative one (the decaying branch).
    """

    def __init__(self, spec, tpot, s, minus=False):
        self.spec = spec
        self.tpot = tpot or TailPotential()
        self.s = float(s)
        self.minus = minus
        self.converged = True
        self._values = {}
        self._phase = None
        self._solve()

    def _level(self, n):
        I, J = self.spec.pair(n)
        fu, fd = self.tpot.pair(n)
        if self.minus:
            fu, fd = fd, fu
        phi = math.exp(fu - self.s)
        psi = math.exp(fd - self.s)
        return I, J, phi, psi

    def _step_params(self, n):
        I, J, phi, psi = self._level(n)
        I1, J1, phi1, psi1 = self._level(n + 1)
        a = (I - 1) * psi
        b = J1 * phi1 * I * psi
        c = (J1 - 1) * phi1
        return a, b, c

    @staticmethod
    def _apply(params, gval):
        for a, b, c in reversed(params):
            den = 1.0 - c * gval
            if den <= 0.0 or not math.isfinite(gval):
                return None
            gval = a + b * gval / den
        return gval

    def _solve(self, cap=1e12, maxit=200000):
        spec = self.spec
        L = len(spec.period)
        start = spec.period_start
        # one period of step maps at phase 0 (innermost level last)
        params = [self._step_params(start + k) for k in range(L)]
        gval = 0.0
        it = 0
        while it < maxit:
            new = self._apply(params, gval)
            if new is None or new > cap:
                self.converged = False
                return
            if abs(new - gval) < 1e-16 * max(1.0, abs(new)):
                gval = new
                break
            # quadratic jump via the composed Moebius matrix, checked for validity
            if it == 256:
                jump = self._quadratic_root(params, gval)
                if jump is not None:
                    applied = self._apply(params, jump)
                    if applied is not None and abs(applied - jump) < 1e-12 * max(1.0, jump):
                        gval = jump
                        break
            gval = new
            it += 1
        else:
            self.converged = False
            return
        phase = [0.0] * L
        phase[0] = gval
        for k in range(L - 1, 0, -1):
            nxt = phase[(k + 1) % L] if k + 1 < L else gval
            val = self._apply([self._step_params(start + k)], nxt)
            if val is None:
                self.converged = False
                return
            phase[k] = val
        self._phase = phase
        for n in range(start - 1, 0, -1):
            nxt = self.g(n + 1)
            val = self._apply([self._step_params(n)], nxt)
            if val is None or val > cap:
                self.converged = False
                return
            self._values[n] = val

    @staticmethod
    def _quadratic_root(params, current):
        # compose step matrices [[b - a c, a], [-c, 1]] outermost-first
        A, B, C, D = 1.0, 0.0, 0.0, 1.0
        for a, b, c in params:
            A, B, C, D = A * (b - a * c) + B * (-c), A * a + B, C * (b - a * c) + D * (-c), C * a + D
            scale = max(abs(A), abs(B), abs(C), abs(D), 1.0)
            A, B, C, D = A / scale, B / scale, C / scale, D / scale
        # fixed points of g -> (A g + B)/(C g + D)
        if abs(C) < 1e-300:
            if D - A <= 0:
                return None
            return B / (D - A)
        disc = (D - A) ** 2 + 4.0 * C * B
        if disc < 0:
            return None
        roots = [((A - D) + sgn * math.sqrt(disc)) / (2.0 * C) for sgn in (1.0, -1.0)]
        cands = [r for r in roots if r >= current - 1e-12]
        if not cands:
            return None
        return min(cands)

    def g(self, n):
        if not self.converged:
            raise DivergenceError("tail Green value does not converge", tail_critical=None)
        if n < self.spec.period_start:
            return self._values[n]
        return self._phase[(n - self.spec.period_start) % len(self.spec.period)]


def tail_critical_value(spec, tpot=None, minus=False, lo=-50.0, hi=None, tol=1e-10):
    """Infimum s at which the tail's excursion resummation converges.

    Returns -inf when it converges for every s (no branching in the tail).
    """
    def ok(s):
        return TailGreen(spec, tpot, s, minus=minus).converged

    if hi is None:
        hi = 5.0
        imax = max(max(a, b) for a, b in spec.prefix + spec.period)
        fmax = 0.0
        if tpot:
            fmax = max(abs(x) for pair in tpot.prefix + tpot.period for x in pair)
        hi = math.log(imax + 1) + fmax + 2.0
    while not ok(hi):
        hi += 2.0
        if hi > 200:
            raise DivergenceError("tail resummation never converges")
    if ok(lo):
        return float("-inf")
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if ok(mid):
            b = mid
        else:
            a = mid
    return b


# ---------------------------------------------------------------------------
# junction operator (core states + one entry/exit pair per tail)


def junction_states(g: IndexedGraph):
    funnel = g.funnel_edge_ids()
    states = [e for e in g.edges if e not in funnel]
    for t in range(len(g.tails)):
        states.append(tail_edge_id(t, 1, True))
        states.append(tail_edge_id(t, 1, False))
    return states


def junction_matrix(g: IndexedGraph, fvals_core, tail_fvals, s, greens):
    """Finite operator equivalent to T(s) with tail excursions resummed.

    ``tail_fvals[t]`` is (f_up_1, f_dn_1), the potential on the first tail
    level; ``greens[t]`` the TailGreen at s.  Deep levels only enter through
    the resummed first-return weight on the entry state.
    """
    states = junction_states(g)
    pos = {e: i for i, e in enumerate(states)}
    n = len(states)
    T = np.zeros((n, n))
    funnel = g.funnel_edge_ids()
    tails_at = {}
    for t, spec in enumerate(g.tails):
        tails_at.setdefault(spec.attach, []).append(t)
    for e in g.edges:
        if e in funnel:
            continue
        v = g.term[e]
        for f in g.out_edges(v):
            if f in funnel:
                continue
            m = g.index[e] - 1 if f == g.rev[e] else g.index[g.rev[f]]
            if m > 0:
                T[pos[e], pos[f]] = m * math.exp(fvals_core[f] - s)
        for t in tails_at.get(v, []):
            iu, idn = g.tails[t].pair(1)
            T[pos[e], pos[tail_edge_id(t, 1, True)]] = idn * math.exp(tail_fvals[t][0] - s)
    for t, spec in enumerate(g.tails):
        iu, idn = spec.pair(1)
        fu, fd = tail_fvals[t]
        e1 = tail_edge_id(t, 1, True)
        r1 = tail_edge_id(t, 1, False)
        T[pos[e1], pos[r1]] = greens[t].g(1)
        v = spec.attach
        for f in g.out_edges(v):
            if f in funnel:
                continue
            T[pos[r1], pos[f]] = g.index[g.rev[f]] * math.exp(fvals_core[f] - s)
        for t2 in tails_at.get(v, []):
            iu2, idn2 = g.tails[t2].pair(1)
            m = idn2 - 1 if t2 == t else idn2
            if m > 0:
                fu2 = tail_fvals[t2][0]
                T[pos[r1], pos[tail_edge_id(t2, 1, True)]] = m * math.exp(fu2 - s)
    return states, T


def _tail_fvals(g, F, minus):
    out = []
    for t in range(len(g.tails)):
        fu, fd = F.tail(t).pair(1)
        if minus:
            fu, fd = fd, fu
        out.append((fu, fd))
    return out


def _junction_sr(g, F, s, minus):
    fvals_core = {e: (F.values.get(g.rev[e] if minus else e, 0.0)) for e in g.edges}
    greens = []
    for t, spec in enumerate(g.tails):
        tg = TailGreen(spec, F.tail(t), s, minus=minus)
        if not tg.converged:
            return None, None, None
        greens.append(tg)
    states, T = junction_matrix(g, fvals_core, _tail_fvals(g, F, minus), s, greens)
    return spectral_radius(T), states, T


# ---------------------------------------------------------------------------
# critical exponent


@dataclass(frozen=True)
class CriticalExponent:
    delta: float
    delta_minus: float
    delta_zero: float
    s_tail: float | None
    method: dict = field(default_factory=dict)

    def __float__(self):
        return self.delta


def _critical_one(g, F, minus=False, tol=1e-14):
    if not g.tails:
        _, T = transfer_matrix(g, F if not minus else _reverse_potential(g, F), 0.0, depth=0)
        sr = spectral_radius(T)
        if sr <= 0:
            raise NoPositiveSolutionError("transfer operator has zero spectral radius")
        return math.log(sr), None
    s_tail = max(
        tail_critical_value(spec, F.tail(t), minus=minus) for t, spec in enumerate(g.tails)
    )
    imax = max(g.index[e] for e in g.edges) if g.edges else 1
    for spec in g.tails:
        imax = max(imax, max(max(a, b) for a, b in spec.prefix + spec.period))
    fmax = max((abs(v) for v in F.values.values()), default=0.0)
    hi = math.log(imax + 1) + fmax + 2.0
    while True:
        sr, _, _ = _junction_sr(g, F, hi, minus)
        if sr is not None and sr < 1.0:
            break
        hi += 2.0
        if hi > 300:
            raise DivergenceError("no upper bracket for the critical exponent")
    lo = (s_tail if math.isfinite(s_tail) else hi - 60.0) + 1e-9
    sr_lo, _, _ = _junction_sr(g, F, lo, minus)
    if sr_lo is None or sr_lo <= 1.0:
        raise DivergenceError(
            "growth dominated by a tail; no convergent resummation regime",
            tail_critical=s_tail,
        )
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        sr_mid, _, _ = _junction_sr(g, F, mid, minus)
        if sr_mid is None or sr_mid > 1.0:
            a = mid
        else:
            b = mid
        if b - a < tol * max(1.0, abs(b)):
            break
    return 0.5 * (a + b), s_tail


def _reverse_potential(g, F):
    vals = {e: F.values.get(g.rev[e], 0.0) for e in g.edges}
    tails = tuple(
        TailPotential(
            prefix=tuple((fd, fu) for fu, fd in F.tail(t).prefix),
            period=tuple((fd, fu) for fu, fd in F.tail(t).period),
        )
        for t in range(len(g.tails))
    )
    return Potential(vals, tails)


def critical_exponent(g: IndexedGraph, F: Potential | None = None) -> CriticalExponent:
    """delta for (graph, F), its reversed-potential twin, and the zero-potential value."""
    F = F or Potential.zero(g)
    delta, s_tail = _critical_one(g, F, minus=False)
    delta_minus, _ = _critical_one(g, F, minus=True)
    if _is_zero(F):
        delta_zero = delta
    else:
        delta_zero, _ = _critical_one(g, Potential.zero(g), minus=False)
    return CriticalExponent(
        delta=delta,
        delta_minus=delta_minus,
        delta_zero=delta_zero,
        s_tail=s_tail,
        method={"solver": "junction-bisection" if g.tails else "power-iteration"},
    )


def _is_zero(F):
    if any(v != 0.0 for v in F.values.values()):
        return False
    for tp in F.tail_values:
        if tp is None:
            continue
        if any(x != 0.0 for pair in tp.prefix + tp.period for x in pair):
            return False
    return True


# ---------------------------------------------------------------------------
# shadow vectors


def _scc_decompose(n, adj):
    """Tarjan SCCs of a dense boolean adjacency; returns list of index lists."""
    index = [-1] * n
    low = [0] * n
    onstack = [False] * n
    stack = []
    sccs = []
    counter = [0]
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        onstack[root] = True
        while work:
            v, ptr = work[-1]
            if ptr < n:
                work[-1] = (v, ptr + 1)
                w = ptr
                if not adj[v][w]:
                    continue
                if index[w] == -1:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    onstack[w] = True
                    work.append((w, 0))
                else:
                    if onstack[w]:
                        low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    low[work[-1][0]] = min(low[work[-1][0]], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        onstack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    sccs.append(comp)
    return sccs


def _positive_fixed_vector(states, T, tol=5e-8):
    """Positive u with T u = u, supported on states that reach the dominant class."""
    n = len(states)
    adj = T > 0.0
    sccs = _scc_decompose(n, adj)
    dominant = []
    for comp in sccs:
        sub = T[np.ix_(comp, comp)]
        if len(comp) == 1 and sub[0, 0] == 0.0:
            continue
        sr = spectral_radius(sub)
        if abs(sr - 1.0) <= tol:
            dominant.append(comp)
        elif sr > 1.0 + tol:
            raise NoPositiveSolutionError(
                f"component spectral radius {sr} exceeds 1; exponent inconsistent"
            )
    if not dominant:
        raise NoPositiveSolutionError("no component with unit spectral radius")
    if len(dominant) > 1:
        raise ReducibleChainError("several non-communicating components carry full growth")
    dom = sorted(dominant[0])
    # states reaching the dominant class
    reach = set(dom)
    changed = True
    while changed:
        changed = False
        for v in range(n):
            if v in reach:
                continue
            if any(adj[v][w] for w in reach):
                reach.add(v)
                changed = True
    dom_set = set(dom)
    trans = sorted(reach - dom_set)
    u = np.zeros(n)
    D = T[np.ix_(dom, dom)]
    k = len(dom)
    # least-squares null vector of (D - I) with sum normalization
    A = np.vstack([D - np.eye(k), np.ones((1, k))])
    b = np.zeros(k + 1)
    b[k] = 1.0
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    if sol.sum() < 0:
        sol = -sol
    if sol.min() <= 0:
        raise NoPositiveSolutionError("fixed vector not positive on the dominant class")
    for i, v in enumerate(dom):
        u[v] = sol[i]
    if trans:
        Ttt = T[np.ix_(trans, trans)]
        tset = set(trans)
        known = [v for v in range(n) if v not in tset]
        rhs = T[np.ix_(trans, known)] @ u[known]
        sol_t = np.linalg.solve(np.eye(len(trans)) - Ttt, rhs)
        if sol_t.min() <= 0:
            raise NoPositiveSolutionError("fixed vector not positive upstream")
        for i, v in enumerate(trans):
            u[v] = sol_t[i]
    return u


def shadow_vector(
    g: IndexedGraph,
    F: Potential | None,
    delta: float,
    direction: str = "forward",
    depth: int = DEFAULT_DEPTH,
    normalize_base: str | None = None,
):
    """Normalized positive solution of u(e) = sum_f m(e,f) exp(F(f)-delta) u(f).

    Returns a dict over materialized non-funnel edges (funnel edges map to 0).
    ``direction="backward"`` uses the reversed potential.  Scaled so the total
    boundary mass seen from the base vertex is 1.
    """
    F = F or Potential.zero(g)
    minus = direction == "backward"
    base = normalize_base or g.base_vertex
    if g.tails and depth < 2:
        raise ValueError("tailed graphs need depth >= 2")
    mat = materialize(g, depth if g.tails else 0)
    fvals = F.on(mat, minus=minus)
    greens = []
    for t, spec in enumerate(g.tails):
        tg = TailGreen(spec, F.tail(t), delta, minus=minus)
        if not tg.converged:
            raise DivergenceError("tail resummation diverges at the given exponent")
        greens.append(tg)
    if g.tails:
        fvals_core = {e: (F.values.get(g.rev[e] if minus else e, 0.0)) for e in g.edges}
        jstates, A = junction_matrix(g, fvals_core, _tail_fvals(g, F, minus), delta, greens)
    else:
        jstates, A = _transfer_on(mat, fvals, delta)
    uj = _positive_fixed_vector(jstates, A)
    u = {e: 0.0 for e in mat.edges}
    for e, val in zip(jstates, uj):
        u[e] = float(val)
    # march up each tail on the decaying branch
    for t, spec in enumerate(g.tails):
        tg = greens[t]
        tpot = F.tail(t)
        for n in range(1, mat.depth):
            I, J = spec.pair(n)
            I1, J1 = spec.pair(n + 1)
            fu, fd = tpot.pair(n)
            fu1, fd1 = tpot.pair(n + 1)
            if minus:
                fu, fd = fd, fu
                fu1, fd1 = fd1, fu1
            psi = math.exp(fd - delta)
            phi1 = math.exp(fu1 - delta)
            dn = u[tail_edge_id(t, n, False)]
            g_next = tg.g(n + 1)
            den = 1.0 - (J1 - 1) * phi1 * g_next
            if den <= 0:
                raise DivergenceError("tail march hit a non-contracting level")
            up_next = g_next * I * psi * dn / den
            u[tail_edge_id(t, n + 1, True)] = up_next
            u[tail_edge_id(t, n + 1, False)] = I * psi * dn + (J1 - 1) * phi1 * up_next
    # normalization: unit boundary mass at the base vertex
    funnel = mat.funnel_edge_ids()
    mass = 0.0
    for e in mat.out_edges(base):
        if e in funnel:
            continue
        mass += mat.index[mat.rev[e]] * math.exp(fvals[e] - delta) * u[e]
    if mass <= 0:
        raise NoPositiveSolutionError(f"zero boundary mass at base vertex {base!r}")
    return {e: val / mass for e, val in u.items()}


def shadow_residual(g, F, delta, u, mat=None, minus=False):
    """Sup-norm of the fixed-point defect over interior non-funnel states."""
    F = F or Potential.zero(g)
    mat = mat or materialize(g, DEFAULT_DEPTH if g.tails else 0)
    fvals = F.on(mat, minus=minus)
    funnel = mat.funnel_edge_ids()
    worst = 0.0
    for e in mat.edges:
        if e in funnel or not mat.is_interior(e):
            continue
        acc = 0.0
        for f, m in mat.continuations(e):
            if f in funnel:
                continue
            acc += m * math.exp(fvals[f] - delta) * u[f]
        worst = max(worst, abs(acc - u[e]))
    return worst


# ---------------------------------------------------------------------------
# assembled Gibbs data


@dataclass(frozen=True)
class GibbsData:
    delta: float
    delta_minus: float
    delta_zero: float
    u_plus: dict
    u_minus: dict
    fvals: dict
    base_vertex: str
    depth: int
    residual_plus: float
    residual_minus: float
    normalization: dict
    method: dict = field(default_factory=dict)

    def norm_record(self):
        return self.normalization


def compute_gibbs(
    g: IndexedGraph,
    F: Potential | None = None,
    depth: int = DEFAULT_DEPTH,
    delta_tol: float = 1e-8,
) -> GibbsData:
    """Full thermodynamic solve: exponent, forward/backward shadows, residuals."""
    F = F or Potential.zero(g)
    ce = critical_exponent(g, F)
    if abs(ce.delta - ce.delta_minus) > delta_tol * max(1.0, abs(ce.delta)):
        raise NoPositiveSolutionError(
            f"forward/backward exponents differ: {ce.delta} vs {ce.delta_minus}"
        )
    depth = depth if g.tails else 0
    u_plus = shadow_vector(g, F, ce.delta, "forward", depth=depth)
    u_minus = shadow_vector(g, F, ce.delta, "backward", depth=depth)
    mat = materialize(g, depth)
    res_p = shadow_residual(g, F, ce.delta, u_plus, mat=mat, minus=False)
    res_m = shadow_residual(g, F, ce.delta, u_minus, mat=mat, minus=True)
    record = {
        "convention": "unit boundary mass at base vertex",
        "base_vertex": g.base_vertex,
        "delta": ce.delta,
    }
    return GibbsData(
        delta=ce.delta,
        delta_minus=ce.delta_minus,
        delta_zero=ce.delta_zero,
        u_plus=u_plus,
        u_minus=u_minus,
        fvals=F.on(mat),
        base_vertex=g.base_vertex,
        depth=depth,
        residual_plus=res_p,
        residual_minus=res_m,
        normalization=record,
        method=dict(ce.method, s_tail=ce.s_tail),
    )


# ---------------------------------------------------------------------------
# cocycle, partial sums, cusp bound


def gibbs_cocycle(gd, F, g, path_x_to_v, path_y_to_v, normalized=False):
    """Potential-integral difference of two paths meeting at a common vertex.

    Returns sum(F over y->v) - sum(F over x->v); with ``normalized`` the
    potential is shifted by -delta, adding delta * (len(x->v) - len(y->v)).
    """
    F = F or Potential.zero(g)
    need = 1
    for path in (path_x_to_v, path_y_to_v):
        for e in path:
            if e.startswith("~t"):
                need = max(need, int(e.split(".")[1][1:]) + 1)
    mat = materialize(g, need if g.tails else 0)
    for path in (path_x_to_v, path_y_to_v):
        for a, b in zip(path, path[1:]):
            if mat.term[a] != mat.orig[b]:
                raise GraphError(f"path not composable at {a}->{b}")
    if path_x_to_v and path_y_to_v:
        if mat.term[path_x_to_v[-1]] != mat.term[path_y_to_v[-1]]:
            raise GraphError("paths do not share a terminal vertex")
    fvals = F.on(mat)
    val = sum(fvals[e] for e in path_y_to_v) - sum(fvals[e] for e in path_x_to_v)
    if normalized:
        val += gd.delta * (len(path_x_to_v) - len(path_y_to_v))
    return val


def poincare_partial_sum(g, F, s, n_max, base=None, orders=None):
    """Partial sums of orbit weights discounted by exp(-s n), up to n_max."""
    from .counting import orbit_oracle
    from .graph import propagate_orders

    orders = orders or propagate_orders(g)
    base = base or g.base_vertex
    rep = orbit_oracle(g, orders, F, base, n_max)
    return sum(w * math.exp(-s * n) for n, w in enumerate(rep.per_distance))


def cusp_exponent_bound(ray, tpot=None):
    """Lower bound on the exponent forced by a cuspidal ray.

    One half of the mean of log(i(e_n)) + F(e_n) + F(rev e_n) over a period;
    -inf when the ray never branches.
    """
    if not ray.is_cuspidal():
        raise GraphError("ray is not cuspidal (a downward index exceeds 1)")
    tpot = tpot or TailPotential()
    L = len(ray.period)
    if all(a == 1 for a, _ in ray.period):
        return float("-inf")
    total = 0.0
    for k in range(L):
        n = ray.period_start + k
        I, _ = ray.pair(n)
        fu, fd = tpot.pair(n)
        total += math.log(I) + fu + fd
    return 0.5 * total / L
