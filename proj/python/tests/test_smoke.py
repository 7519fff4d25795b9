"""Smoke tests for the ctgraph extension module."""

import pytest

ctgraph = pytest.importorskip("ctgraph")


def test_bound_values():
    assert ctgraph.bound(5) == 1
    assert ctgraph.bound(8) == 2
    assert ctgraph.bound(15) == 4
    assert ctgraph.bound(4) == 0


def test_parse_and_format_round_trip():
    g = ctgraph.parse_graph("p 3 2\ne 1 2\ne 2 3\n")
    assert g.n == 3 and g.m == 2
    assert g.has_edge(0, 1) and not g.has_edge(0, 2)
    again = ctgraph.parse_graph(ctgraph.format_graph(g))
    assert again.edges() == g.edges()


def test_parse_errors():
    with pytest.raises(ValueError):
        ctgraph.parse_graph("p 2 1\ne 1 1\n")


def test_recognition():
    assert ctgraph.is_four_chordal(ctgraph.complete_graph(4))
    assert not ctgraph.is_four_chordal(ctgraph.complete_graph(3))
    c4 = ctgraph.Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert not ctgraph.is_chordal(c4)
    assert ctgraph.count_maximal_triangles(ctgraph.h_graph(1)) == 1


def test_solve_matches_the_family():
    for k in range(3):
        g = ctgraph.h_graph(k)
        res = ctgraph.solve(g)
        assert res["size"] == 2 * k + 2
        assert ctgraph.is_transversal(g, res["red"])
        assert 7 * res["size"] == 2 * g.n + res["t"] - res["saved"]


def test_solve_rejects_bad_input():
    with pytest.raises(ValueError):
        ctgraph.solve(ctgraph.Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)]))


def test_oracle_agrees_on_lower_bound_graphs():
    for n in (5, 10, 12):
        g = ctgraph.lower_bound_graph(n)
        res = ctgraph.min_transversal(g, cap=6)
        assert not res["cap_exceeded"]
        assert res["minimum"] == ctgraph.bound(n)
        assert ctgraph.solve(g)["size"] == ctgraph.bound(n)


def test_trace_replay():
    g = ctgraph.random_four_chordal(7, 12, 6)
    res = ctgraph.solve(g, with_trace=True)
    assert ctgraph.replay_verify(res["trace"], g) is None
    tampered = res["trace"].replace('"saved"', '"paid"', 1)
    if tampered != res["trace"]:
        assert ctgraph.replay_verify(tampered, g) is not None


def test_determinism():
    g = ctgraph.random_four_chordal(99, 14, 6)
    a = ctgraph.solve(g, with_trace=True)
    b = ctgraph.solve(g, with_trace=True)
    assert a["trace"] == b["trace"]
    assert a["red"] == b["red"]
