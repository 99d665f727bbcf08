import pytest

from treegibbs import fixtures as fx
from treegibbs.chain import build_chain
from treegibbs.gibbs import compute_gibbs
from treegibbs.graph import propagate_orders

# fixtures whose full pipeline converges (the critical ray is the flagged
# divergence example and is exercised separately)
PIPELINE_FIXTURES = (
    "single_edge_3",
    "biregular_24",
    "biregular_44",
    "parallel_edges",
    "two_loops",
    "cusp_22",
    "cusp_24",
    "cusp_44",
    "thick_ray_5",
    "funnel_loop",
)

FINITE_FIXTURES = ("single_edge_3", "biregular_24", "biregular_44", "parallel_edges", "two_loops")
TAILED_FIXTURES = ("cusp_22", "cusp_24", "cusp_44", "thick_ray_5")

_CACHE = {}


def pipeline(name, depth=90):
    """(graph, orders, gibbs data, chain), cached per fixture name."""
    key = (name, depth)
    if key not in _CACHE:
        g = fx.get(name)
        orders = propagate_orders(g)
        gd = compute_gibbs(g, depth=depth)
        mc = build_chain(g, gd, orders)
        _CACHE[key] = (g, orders, gd, mc)
    return _CACHE[key]


@pytest.fixture(scope="session")
def single_edge_pipeline():
    return pipeline("single_edge_3")


@pytest.fixture(scope="session")
def cusp22_pipeline():
    return pipeline("cusp_22")


@pytest.fixture(scope="session")
def thick_ray_pipeline():
    return pipeline("thick_ray_5")


# shared hypothesis strategy: small random edge-indexed graphs
try:
    from hypothesis import strategies as st

    @st.composite
    def small_graphs(draw):
        from treegibbs.graph import IndexedGraph

        n = draw(st.integers(min_value=1, max_value=3))
        vertices = tuple(f"v{i}" for i in range(n))
        n_edges = draw(st.integers(min_value=1, max_value=3))
        edges, rev, orig, term, index = [], {}, {}, {}, {}
        for k in range(n_edges):
            u = draw(st.integers(min_value=0, max_value=n - 1))
            w = draw(st.integers(min_value=0, max_value=n - 1))
            e, eb = f"e{k}", f"e{k}r"
            edges += [e, eb]
            rev[e], rev[eb] = eb, e
            orig[e], term[e] = f"v{u}", f"v{w}"
            orig[eb], term[eb] = f"v{w}", f"v{u}"
            index[e] = draw(st.integers(min_value=1, max_value=4))
            index[eb] = draw(st.integers(min_value=1, max_value=4))
        return IndexedGraph(
            vertices=vertices, edges=tuple(edges), rev=rev, orig=orig, term=term, index=index
        )
except ImportError:  # pragma: no cover
    pass
