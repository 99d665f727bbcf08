import math

import numpy as np
import pytest

from conftest import FINITE_FIXTURES, PIPELINE_FIXTURES, TAILED_FIXTURES, pipeline
from treegibbs import fixtures as fx
from treegibbs.errors import DivergenceError, GraphError
from treegibbs.gibbs import (
    Potential,
    TailPotential,
    compute_gibbs,
    critical_exponent,
    cusp_exponent_bound,
    gibbs_cocycle,
    poincare_partial_sum,
    shadow_residual,
    shadow_vector,
    spectral_radius,
    transfer_matrix,
)
from treegibbs.graph import materialize, propagate_orders, tail_edge_id


def test_transfer_matrix_single_edge():
    g = fx.single_edge(3, 3)
    states, T = transfer_matrix(g, None, 0.0)
    idx = {s: i for i, s in enumerate(states)}
    assert T[idx["e"], idx["ebar"]] == 2.0
    assert T[idx["ebar"], idx["e"]] == 2.0
    assert T[idx["e"], idx["e"]] == 0.0


def test_transfer_matrix_shift_homogeneity():
    g = fx.parallel_edges()
    _, T0 = transfer_matrix(g, None, 0.0)
    _, T1 = transfer_matrix(g, None, 0.7)
    assert np.allclose(T1, T0 * math.exp(-0.7))
    # constant potential c at shift s equals zero potential at s - c
    _, Tc = transfer_matrix(g, Potential.constant(g, 0.3), 0.7)
    _, Tz = transfer_matrix(g, None, 0.4)
    assert np.allclose(Tc, Tz)


def test_critical_exponent_closed_forms():
    assert abs(critical_exponent(fx.single_edge(3, 3)).delta - math.log(2)) < 1e-12
    for r, s in ((2, 4), (4, 4)):
        ce = critical_exponent(fx.biregular_edge(r, s))
        assert abs(ce.delta - 0.5 * math.log(r * s)) < 1e-10


def test_constant_potential_shifts_exponent():
    g = fx.parallel_edges()
    ce0 = critical_exponent(g)
    cec = critical_exponent(g, Potential.constant(g, 0.25))
    assert abs(cec.delta - (ce0.delta + 0.25)) < 1e-12
    assert abs(cec.delta_zero - ce0.delta) < 1e-12


def test_tailed_exponents():
    ce = critical_exponent(fx.cusp_ray(2, 2))
    assert abs(ce.delta - math.log(2)) < 1e-9
    assert abs(ce.s_tail - 0.5 * math.log(2)) < 1e-6
    ce2 = critical_exponent(fx.thick_ray(5))
    assert abs(ce2.delta - math.log(5)) < 1e-9
    # cuspidal rays in the (r+1, s+1)-biregular tree sit at half log(rs)
    ce3 = critical_exponent(fx.cusp_ray(2, 4))
    assert abs(ce3.delta - 0.5 * math.log(8)) < 1e-9


def test_critical_ray_diverges_with_tail_value():
    with pytest.raises(DivergenceError) as exc:
        critical_exponent(fx.critical_ray(5))
    assert abs(exc.value.tail_critical - math.log(5)) < 1e-6


def test_forward_backward_exponents_agree():
    for name in PIPELINE_FIXTURES:
        _, _, gd, _ = pipeline(name)
        assert abs(gd.delta - gd.delta_minus) < 1e-9


def test_shadow_single_edge():
    g = fx.single_edge(3, 3)
    u = shadow_vector(g, None, math.log(2))
    assert abs(u["e"] - 2.0 / 3.0) < 1e-12
    assert abs(u["ebar"] - 2.0 / 3.0) < 1e-12


def test_funnel_edges_carry_zero_shadow():
    _, _, gd, _ = pipeline("funnel_loop")
    assert gd.u_plus["w"] == 0.0 and gd.u_plus["wbar"] == 0.0
    assert gd.u_minus["w"] == 0.0 and gd.u_minus["wbar"] == 0.0
    assert gd.u_plus["l"] > 0


def test_cuspidal_downward_recurrence():
    g, _, gd, _ = pipeline("cusp_24")
    spec = g.tails[0]
    for n in range(2, 10):
        r_prev = spec.pair(n - 1)[0]
        lhs = gd.u_plus[tail_edge_id(0, n, False)]
        rhs = r_prev * math.exp(-gd.delta) * gd.u_plus[tail_edge_id(0, n - 1, False)]
        assert abs(lhs - rhs) < 1e-12 * max(1.0, lhs)


def test_shadow_residuals_within_tolerance():
    for name in FINITE_FIXTURES:
        _, _, gd, _ = pipeline(name)
        assert gd.residual_plus <= 1e-10 and gd.residual_minus <= 1e-10, name
    for name in TAILED_FIXTURES:
        _, _, gd, _ = pipeline(name)
        assert gd.residual_plus <= 1e-8 and gd.residual_minus <= 1e-8, name


def test_normalization_unit_mass_at_base():
    for name in PIPELINE_FIXTURES:
        g, _, gd, _ = pipeline(name)
        mat = materialize(g, gd.depth)
        funnel = mat.funnel_edge_ids()
        tot = sum(
            mat.index[mat.rev[e]] * math.exp(gd.fvals[e] - gd.delta) * gd.u_plus[e]
            for e in mat.out_edges(g.base_vertex)
            if e not in funnel
        )
        assert abs(tot - 1.0) < 1e-12, name


def test_exponent_matches_power_growth():
    for name in FINITE_FIXTURES:
        g = fx.get(name)
        ce = critical_exponent(g)
        _, T = transfer_matrix(g, None, 0.0)
        v = np.ones(T.shape[0])
        acc = 0.0
        for n in range(1, 61):
            v = T @ v
            nrm = np.linalg.norm(v, 1)
            acc += math.log(nrm)
            v /= nrm
            if n == 20:
                l20 = acc
            if n == 60:
                l60 = acc
        growth = (l60 - l20) / 40.0
        assert abs(growth - ce.delta) < 1e-9, name


def test_shadow_conformality_on_cover_ball():
    # per-cone mass of an edge seen from its tail equals exp(F - delta) u(e),
    # and splits across the children cones of the explicit cover ball
    g, _, gd, _ = pipeline("parallel_edges")
    mat = materialize(g, 0)
    for e in g.edges:
        lhs = math.exp(gd.fvals[e] - gd.delta) * gd.u_plus[e]
        rhs = sum(
            m * math.exp(gd.fvals[e] + gd.fvals[f] - 2 * gd.delta) * gd.u_plus[f]
            for f, m in mat.continuations(e)
        )
        assert abs(lhs - rhs) < 1e-13


def test_constant_shift_leaves_chain_invariant():
    from treegibbs.chain import build_chain

    g = fx.parallel_edges()
    orders = propagate_orders(g)
    gd0 = compute_gibbs(g)
    gdc = compute_gibbs(g, Potential.constant(g, 0.4))
    mc0 = build_chain(g, gd0, orders)
    mcc = build_chain(g, gdc, orders)
    assert mc0.states == mcc.states
    assert np.abs(mc0.p - mcc.p).max() < 1e-12


def test_tail_truncation_error_decays_with_depth():
    g = fx.cusp_ray(2, 2)
    ce = critical_exponent(g)
    _, _, gd, _ = pipeline("cusp_22")
    errs_delta = []
    errs_u = []
    for depth in (20, 40, 80):
        states, T = transfer_matrix(g, None, 0.0, depth=depth)
        sigma = spectral_radius(T)
        errs_delta.append(abs(math.log(sigma) - ce.delta))
        # Perron vector of the truncation, normalized like the shadow vector
        v = np.ones(len(states))
        for _ in range(20000):
            w = 0.5 * ((T @ v) / sigma + v)
            w /= np.linalg.norm(w, 1)
            if np.linalg.norm(w - v, 1) < 1e-15:
                v = w
                break
            v = w
        idx = {s: i for i, s in enumerate(states)}
        mat = materialize(g, depth)
        mass = sum(
            mat.index[mat.rev[e]] * math.exp(-math.log(sigma)) * v[idx[e]]
            for e in mat.out_edges("a0")
        )
        u_trunc = {e: v[idx[e]] / mass for e in g.edges}
        errs_u.append(max(abs(u_trunc[e] - gd.u_plus[e]) for e in g.edges))
    assert errs_delta[0] > errs_delta[1] > errs_delta[2]
    assert errs_u[0] > errs_u[1] > errs_u[2]


def test_gibbs_cocycle():
    g, _, gd, _ = pipeline("parallel_edges")
    assert gibbs_cocycle(gd, None, g, ["e1"], ["e1"]) == 0.0
    Fc = Potential.constant(g, 0.3)
    # x at distance 2 from v, y at distance 1: beta = 2 - 1 = 1
    val = gibbs_cocycle(gd, Fc, g, ["e1", "e2bar"], ["e1bar"], normalized=False)
    # paths must share terminal vertex: e1 e2bar ends at a, e1bar ends at a
    assert abs(val - (0.3 * 1 - 0.3 * 2)) < 1e-15  # C = -c * beta with beta = 2 - 1
    norm = gibbs_cocycle(gd, Fc, g, ["e1", "e2bar"], ["e1bar"], normalized=True)
    assert abs(norm - (val + gd.delta * 1)) < 1e-15
    with pytest.raises(GraphError):
        gibbs_cocycle(gd, None, g, ["e1"], ["e1bar"])


def test_poincare_partial_sums():
    g = fx.single_edge(3, 3)
    orders = propagate_orders(g)
    assert poincare_partial_sum(g, None, 0.5, 0, orders=orders) == 3.0
    # s > delta: geometric convergence, increments shrink by 1/4 per two steps
    s = math.log(4)
    vals = [poincare_partial_sum(g, None, s, n, orders=orders) for n in (10, 12, 14)]
    inc1, inc2 = vals[1] - vals[0], vals[2] - vals[1]
    assert abs(inc2 / inc1 - 0.25) < 1e-6
    # s = delta: linear growth of the partial sums
    d = math.log(2)
    v20 = poincare_partial_sum(g, None, d, 20, orders=orders)
    v40 = poincare_partial_sum(g, None, d, 40, orders=orders)
    v60 = poincare_partial_sum(g, None, d, 60, orders=orders)
    assert abs((v60 - v40) - (v40 - v20)) < 1e-9 * abs(v60)


def test_cusp_exponent_bound():
    from treegibbs.graph import TailSpec

    ray_rs = TailSpec(attach="x", prefix=(), period=((2, 1), (4, 1)))
    assert abs(cusp_exponent_bound(ray_rs) - 0.25 * math.log(8)) < 1e-14
    ray_q = TailSpec(attach="x", prefix=(), period=((5, 1),))
    assert abs(cusp_exponent_bound(ray_q) - 0.5 * math.log(5)) < 1e-14
    ray_flat = TailSpec(attach="x", prefix=(), period=((1, 1),))
    assert cusp_exponent_bound(ray_flat) == float("-inf")
    with pytest.raises(GraphError):
        cusp_exponent_bound(TailSpec(attach="x", prefix=(), period=((4, 2),)))
    # potential factors enter through F(e) + F(rev e)
    tp = TailPotential(period=((0.1, 0.2),))
    assert abs(cusp_exponent_bound(ray_q, tp) - 0.5 * (math.log(5) + 0.3)) < 1e-14


def test_shadow_rejects_inconsistent_exponent():
    from treegibbs.errors import NoPositiveSolutionError

    g = fx.single_edge(3, 3)
    with pytest.raises(NoPositiveSolutionError):
        shadow_vector(g, None, math.log(2) + 0.2)


def test_funnel_cover_ball_spheres():
    from treegibbs.cover import build_cover_ball

    ball = build_cover_ball(fx.funnel_loop(), "a", 3)
    sizes = ball.sphere_sizes()
    assert sizes[:3] == [1, 5, 18]


def test_asymmetric_tail_potential_pipeline():
    # nonzero, direction-asymmetric potential on core and tail stresses the
    # reversed-potential bookkeeping: both exponents and all chain identities
    # must still line up
    from treegibbs.chain import build_chain, check_markov_property

    g = fx.cusp_ray(2, 2)
    F = Potential(
        values={"c": 0.07, "cbar": -0.04},
        tail_values=(TailPotential(period=((0.1, -0.05),)),),
    )
    gd = compute_gibbs(g, F, depth=90)
    assert abs(gd.delta - gd.delta_minus) < 1e-10
    assert gd.delta != gd.delta_zero
    assert gd.residual_plus < 1e-12 and gd.residual_minus < 1e-12
    mc = build_chain(g, gd, propagate_orders(g))
    rep = check_markov_property(mc, gd)
    assert rep.max_row_residual < 1e-12
    assert rep.max_stationarity_residual < 1e-12
    assert rep.max_cylinder_residual < 1e-12


def test_tailed_constant_shift_leaves_chain_invariant():
    from treegibbs.chain import build_chain

    g = fx.cusp_ray(2, 4)
    orders = propagate_orders(g)
    gd0 = compute_gibbs(g, None, depth=60)
    gdc = compute_gibbs(g, Potential.constant(g, 0.5), depth=60)
    assert abs(gdc.delta - (gd0.delta + 0.5)) < 1e-9
    mc0 = build_chain(g, gd0, orders)
    mcc = build_chain(g, gdc, orders)
    assert mc0.states == mcc.states
    assert np.abs(mc0.p - mcc.p).max() < 1e-9
