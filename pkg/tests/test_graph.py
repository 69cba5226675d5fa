import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iac.exceptions import MoreThanOneLoopError, UnknownVertexError
from iac.graph import (
    IacGraph,
    PseudoforestState,
    build_graph,
    check_proposition1,
    components,
    to_dot,
    traversal_order,
)
from iac.feasibility import make_max_dof_config
from iac.planner import AlignmentPlan, build_alignment_plan

from oracles import flood_components


def graph_of(n, edges):
    return IacGraph(tuple(range(n)), tuple(edges))


def test_build_graph_c8(c8):
    g = build_graph(c8, build_alignment_plan(c8))
    assert len(g.vertices) == 6 and len(g.edges) == 6
    assert all(u[0] != v[0] or u[:2] != v[:2] for u, v, _ in g.edges)
    assert all(1 <= label <= 2 and u[0] > label and v[0] > label for u, v, label in g.edges)


def test_build_graph_empty_plan(c8):
    g = build_graph(c8, AlignmentPlan(0, ()))
    assert len(g.vertices) == 6 and not g.edges
    comps = components(g)
    assert len(comps) == 6 and all(c.n_edges == 0 and c.cycles == 0 for c in comps)


def test_build_graph_c4(c4):
    g = build_graph(c4, build_alignment_plan(c4))
    assert len(g.vertices) == 3 and len(g.edges) == 3


def test_components_two_disjoint_edges():
    comps = components(graph_of(4, [(0, 1, 1), (2, 3, 1)]))
    assert [(c.n_vertices, c.n_edges, c.cycles) for c in comps] == [(2, 1, 0), (2, 1, 0)]


def test_components_triangle():
    (c,) = components(graph_of(3, [(0, 1, 1), (1, 2, 1), (2, 0, 2)]))
    assert c.cycles == 1


def test_components_parallel_edges():
    (c,) = components(graph_of(2, [(0, 1, 1), (0, 1, 2)]))
    assert (c.n_edges, c.cycles) == (2, 1)


def test_proposition1_examples(c8):
    g = build_graph(c8, build_alignment_plan(c8))
    assert check_proposition1(g)
    assert all(c.cycles == 1 for c in components(g))
    dense = graph_of(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1), (0, 1, 2), (1, 2, 2)])
    assert components(dense)[0].cycles == 3
    assert not check_proposition1(dense)
    assert check_proposition1(graph_of(4, [(0, 1, 1), (1, 2, 1)]))


def test_try_add_edge_examples():
    s = PseudoforestState(range(5))
    assert s.try_add_edge(0, 1)
    assert s.try_add_edge(1, 2)
    assert s.try_add_edge(2, 0)  # closes a cycle in an unflagged component
    assert s.is_cyclic(0)
    assert not s.try_add_edge(0, 1)  # second cycle rejected
    assert s.try_add_edge(3, 0)  # tree merged into cyclic component
    assert s.is_cyclic(3)
    assert s.try_add_edge(4, 4)  # self-loop is a cycle
    assert not s.try_add_edge(4, 0)  # two cyclic components never merge


def test_try_add_edge_unknown_vertex():
    with pytest.raises(UnknownVertexError):
        PseudoforestState(range(2)).try_add_edge(0, 9)


def test_rollback_restores_state():
    s = PseudoforestState(range(4))
    s.try_add_edge(0, 1)
    m = s.mark()
    s.try_add_edge(1, 2)
    s.try_add_edge(2, 0)
    s.rollback(m)
    assert not s.is_cyclic(0)
    assert s.find(2) == 2
    assert s.component_size(0) == 2


def test_probe_does_not_mutate():
    s = PseudoforestState(range(3))
    s.try_add_edge(0, 1)
    assert s.probe(0, 1) == "close-cycle"
    assert s.probe(0, 2) == "merge-trees"
    assert not s.is_cyclic(0)


def test_traversal_triangle():
    g = graph_of(3, [(0, 1, 1), (1, 2, 1), (2, 0, 2)])
    t = traversal_order(components(g)[0], g)
    assert len(t.cycle) == 3 and not t.tree
    assert t.seed == 0 == t.cycle[0].src == t.cycle[-1].dst


def test_traversal_star():
    g = graph_of(5, [(0, 3, 1), (3, 1, 1), (3, 2, 1), (4, 3, 1)])
    t = traversal_order(components(g)[0], g)
    assert t.seed == 3 and not t.cycle
    assert len(t.tree) == 4 and all(e.src == 3 for e in t.tree)


def test_traversal_two_cycle_with_pendant():
    g = graph_of(3, [(0, 1, 1), (0, 1, 2), (1, 2, 1)])
    t = traversal_order(components(g)[0], g)
    assert len(t.cycle) == 2 and [e.dst for e in t.tree] == [2]


def test_traversal_rejects_two_loops():
    g = graph_of(2, [(0, 1, 1), (0, 1, 2), (0, 1, 3)])
    with pytest.raises(MoreThanOneLoopError):
        traversal_order(components(g)[0], g)


def test_dot_export(c4):
    dot = to_dot(build_graph(c4, build_alignment_plan(c4)))
    assert dot.startswith("graph iac {") and '"2.1.1"' in dot and "label=" in dot


@pytest.mark.parametrize("K, M", [(K, M) for K in range(3, 8) for M in (2, 4, 6, 8) if K - 2 <= M])
def test_max_dof_graph_is_balanced(K, M):
    c = make_max_dof_config(K, M)
    g = build_graph(c, build_alignment_plan(c))
    assert len(g.edges) == len(g.vertices)
    assert all(comp.cycles == 1 for comp in components(g))


multigraphs = st.integers(1, 9).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(1, 3)),
                 max_size=12),
    )
)


@given(multigraphs)
def test_components_match_oracles(data):
    n, edges = data
    g = graph_of(n, edges)
    comps = components(g)
    assert sorted(c.vertices for c in comps) == flood_components(range(n), edges)
    nxg = nx.MultiGraph()
    nxg.add_nodes_from(range(n))
    nxg.add_edges_from((u, v) for u, v, _ in edges)
    assert sorted(tuple(sorted(c)) for c in nx.connected_components(nxg)) == sorted(
        c.vertices for c in comps
    )
    assert sum(c.n_vertices for c in comps) == n
    assert sum(c.n_edges for c in comps) == len(edges)
    assert sorted(i for c in comps for i in c.edge_indices) == list(range(len(edges)))


@given(multigraphs)
def test_incremental_matches_batch(data):
    n, edges = data
    s = PseudoforestState(range(n))
    kept = []
    for e in edges:
        accepted = s.try_add_edge(e[0], e[1], e[2])
        assert accepted == check_proposition1(graph_of(n, kept + [e]))
        if accepted:
            kept.append(e)
    assert check_proposition1(graph_of(n, kept))


@given(multigraphs)
def test_traversal_covers_component(data):
    n, edges = data
    g = graph_of(n, edges)
    for comp in components(g):
        if comp.cycles > 1:
            continue
        t = traversal_order(comp, g)
        used = sorted(e.index for e in t.cycle + t.tree)
        assert used == sorted(comp.edge_indices)
        reached = {t.seed} | {e.dst for e in t.cycle + t.tree}
        assert reached == set(comp.vertices)
        # every tree edge starts at an already reached vertex
        seen = {t.seed} | {e.dst for e in t.cycle}
        for e in t.tree:
            assert e.src in seen
            seen.add(e.dst)
