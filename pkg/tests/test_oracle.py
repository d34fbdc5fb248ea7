import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlogismos.costgraph import CostMatrix, build_graph, extract_surface, random_instance
from qlogismos.ising import ResourceError
from qlogismos.oracle import (
    OracleMismatchError,
    brute_force_qubo,
    cross_check,
    max_flow_highest_label,
    preflow_push_mincut,
    verify_cut,
)
from qlogismos.qubo import QuboProblem, build_qubo


def min_cut_by_enumeration(n, edges, s, t):
    others = [v for v in range(n) if v not in (s, t)]
    best = None
    for mask in range(1 << len(others)):
        side = {s} | {v for i, v in enumerate(others) if mask >> i & 1}
        cap = sum(c for u, v, c in edges if u in side and v not in side)
        best = cap if best is None else min(best, cap)
    return best


def test_diamond():
    edges = [(0, 1, 3), (0, 2, 2), (1, 3, 2), (2, 3, 3)]
    flow, _ = max_flow_highest_label(4, edges, 0, 3)
    assert flow == 4 == min_cut_by_enumeration(4, edges, 0, 3)


def test_single_edge():
    assert max_flow_highest_label(2, [(0, 1, 7)], 0, 1)[0] == 7


def test_disconnected():
    assert max_flow_highest_label(4, [(0, 1, 3), (2, 3, 4)], 0, 3)[0] == 0


@given(
    st.integers(3, 8),
    st.floats(0.1, 0.9),
    st.booleans(),
    st.integers(0, 2**32 - 1),
)
@settings(max_examples=200, deadline=None)
def test_max_flow_equals_enumerated_min_cut(n, density, integral, seed):
    rng = np.random.default_rng(seed)
    edges = []
    for u, v in itertools.permutations(range(n), 2):
        if rng.random() < density:
            c = int(rng.integers(0, 10)) if integral else float(rng.uniform(0, 5))
            edges.append((u, v, c))
    flow, _ = max_flow_highest_label(n, edges, 0, n - 1)
    assert flow == pytest.approx(min_cut_by_enumeration(n, edges, 0, n - 1), abs=1e-9)


def test_single_column_certificate(single_column_graph):
    g = single_column_graph
    cert = preflow_push_mincut(g)
    assert cert.flow_value == 0
    assert cert.source_side == [0, g.source_id]
    assert cert.separates and cert.cut_edges == []


def test_certificate_never_cuts_constraint_edges():
    g = build_graph(CostMatrix.from_lists([[0, 5, 2], [1, 9, 0], [4, 4, 1]], delta=1))
    cert = preflow_push_mincut(g)
    assert cert.flow_value > 0
    assert all(kind == "terminal" for _, _, _, kind in cert.cut_edges)
    assert sum(c for _, _, c, _ in cert.cut_edges) == cert.flow_value


def test_brute_force_examples(single_column_graph):
    e0, mins = brute_force_qubo(build_qubo(single_column_graph))
    assert e0 == -5 and mins == [[1, 0, 1, 0]]
    zero = QuboProblem(size=3, epsilon=1, source_var=1, sink_var=2)
    e0, mins = brute_force_qubo(zero)
    assert e0 == 0 and len(mins) == 8
    with pytest.raises(ResourceError):
        brute_force_qubo(QuboProblem(size=25, epsilon=1, source_var=0, sink_var=1), cap=30)


def test_degenerate_fixture_has_two_minimizers(fixture_path):
    from qlogismos import load_instance

    g = build_graph(load_instance(fixture_path("degenerate")))
    e0, mins = brute_force_qubo(build_qubo(g))
    assert len(mins) == 2
    surfaces = [extract_surface([i for i, b in enumerate(m) if b], g).levels for m in mins]
    assert {tuple(s.values()) for s in surfaces} == {(1, 1), (2, 2)}


def test_brute_force_block_boundaries():
    g = build_graph(random_instance(np.random.default_rng(9), max_qubits=12))
    q = build_qubo(g)
    assert brute_force_qubo(q, block=5) == brute_force_qubo(q)


def test_verify_cut(single_column_graph):
    g = single_column_graph
    s, t = g.source_id, g.sink_id
    res = verify_cut(g, {s})
    assert res["separates"] and res["cut_capacity"] == 1 and not res["is_minimum"]
    assert not verify_cut(g, {s, t, 0})["separates"]
    assert verify_cut(g, {s, 0})["is_minimum"]


def test_cross_check_examples():
    report = cross_check(*_qg(CostMatrix.from_lists(terminal_weights=[[0, 0]])))
    assert report.E0 == -1 and report.flow == 0 and report.consistent
    report = cross_check(*_qg(CostMatrix.from_lists([[0, 0, 0], [3, 1, 6]], delta=1)))
    assert report.consistent


def test_cross_check_reports_mismatch():
    q, g = _qg(CostMatrix.from_lists([[2, 0, 5]]))
    q.add(0, 0, -100)
    with pytest.raises(OracleMismatchError, match="E0="):
        cross_check(q, g)
    assert cross_check(q, g, raise_on_mismatch=False).consistent is False


def _qg(cm):
    g = build_graph(cm)
    return build_qubo(g), g


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_min_cuts_are_closed_and_smooth(seed):
    cm = random_instance(np.random.default_rng(seed), max_qubits=12)
    g = build_graph(cm)
    q = build_qubo(g)
    _, mins = brute_force_qubo(q)
    sides = [preflow_push_mincut(g).source_side] + [[i for i, b in enumerate(m) if b] for m in mins]
    for side in sides:
        surf = extract_surface(side, g)
        assert surf.smoothness_violations(g.adjacency, g.delta) == []


def test_real_valued_cross_check():
    q, g = _qg(CostMatrix.from_lists([[0.3, 2.7, 1.1], [0.5, 0.25, 3.0]], delta=1))
    assert cross_check(q, g).consistent
