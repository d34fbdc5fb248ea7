"""Exact classical references for the cut QUBO.

* :func:`preflow_push_mincut` - highest-label preflow-push max-flow with the
  gap heuristic; the reported cut is the set reachable from the source in
  the final residual graph.
* :func:`brute_force_qubo` - exhaustive minimum of ``x^T Q x``.
* :func:`verify_cut` / :func:`cross_check` - tie the two together.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .costgraph import LogismosGraph
from .ising import ResourceError, basis_bits
from .qubo import QuboProblem

BRUTE_FORCE_HARD_CAP = 24
BRUTE_FORCE_DEFAULT_CAP = 20
FLOAT_TOL = 1e-9


class OracleMismatchError(AssertionError):
    """The two exact references disagree on an instance."""


@dataclass
class CutCertificate:
    flow_value: float
    source_side: list
    cut_edges: list
    separates: bool


class _Residual:
    """Paired-arc residual network (arc ``a ^ 1`` is the reverse of ``a``)."""

    def __init__(self, num_vertices: int):
        self.n = num_vertices
        self.head: list = []
        self.cap: list = []
        self.adj: list = [[] for _ in range(num_vertices)]

    def add_edge(self, u: int, v: int, c) -> None:
        self.adj[u].append(len(self.head))
        self.head.append(v)
        self.cap.append(c)
        self.adj[v].append(len(self.head))
        self.head.append(u)
        self.cap.append(0)


def max_flow_highest_label(num_vertices: int, edges, s: int, t: int):
    """Maximum s-t flow on ``edges = [(u, v, capacity), ...]``.

    Returns ``(flow_value, residual)``. Capacities may be ints or floats;
    ints stay exact.
    """
    R = _Residual(num_vertices)
    for u, v, c in edges:
        if c < 0:
            raise ValueError("capacities must be non-negative")
        if u != v:
            R.add_edge(u, v, c)
    n = num_vertices
    head, cap, adj = R.head, R.cap, R.adj
    excess = [0] * n
    count = [0] * (2 * n + 1)
    current = [0] * n
    buckets: list = [[] for _ in range(2 * n + 1)]
    active = [False] * n

    # exact distance-to-sink labels speed things up; unreachable nodes get n
    height = [n] * n
    height[t] = 0
    queue = deque([t])
    while queue:
        v = queue.popleft()
        for a in adj[v]:
            u = head[a]
            if cap[a ^ 1] > 0 and height[u] == n and u != s:
                height[u] = height[v] + 1
                queue.append(u)
    height[s] = n
    for v in range(n):
        count[height[v]] += 1

    def activate(v):
        if v != s and v != t and not active[v] and excess[v] > 0:
            active[v] = True
            buckets[height[v]].append(v)

    for a in adj[s]:
        c = cap[a]
        if c > 0:
            v = head[a]
            cap[a] -= c
            cap[a ^ 1] += c
            excess[v] += c
            excess[s] -= c
            activate(v)

    top = 2 * n
    while top >= 0:
        if not buckets[top]:
            top -= 1
            continue
        u = buckets[top].pop()
        active[u] = False
        if height[u] != top:
            # stale entry left behind by a gap relabel
            activate(u)
            top = max(top, height[u])
            continue
        # discharge u
        arcs = adj[u]
        while excess[u] > 0:
            if current[u] == len(arcs):
                old = height[u]
                new = 2 * n
                for a in arcs:
                    if cap[a] > 0:
                        new = min(new, height[head[a]] + 1)
                count[old] -= 1
                height[u] = new
                count[new] += 1
                current[u] = 0
                if count[old] == 0 and old < n:
                    # gap: nothing between old and n can still reach the sink
                    for v in range(n):
                        if old < height[v] < n and v != s:
                            count[height[v]] -= 1
                            height[v] = n + 1
                            count[n + 1] += 1
                    if height[u] < n + 1:
                        count[height[u]] -= 1
                        height[u] = n + 1
                        count[n + 1] += 1
                if height[u] >= 2 * n:
                    break
                continue
            a = arcs[current[u]]
            v = head[a]
            if cap[a] > 0 and height[u] == height[v] + 1:
                d = excess[u] if excess[u] < cap[a] else cap[a]
                cap[a] -= d
                cap[a ^ 1] += d
                excess[u] -= d
                excess[v] += d
                activate(v)
            else:
                current[u] += 1
        if excess[u] > 0:
            activate(u)
        top = min(2 * n, max(top, height[u]))
    return excess[t], R


def residual_source_side(residual: _Residual, s: int) -> list:
    seen = [False] * residual.n
    seen[s] = True
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for a in residual.adj[u]:
            v = residual.head[a]
            if residual.cap[a] > 0 and not seen[v]:
                seen[v] = True
                queue.append(v)
    return [v for v in range(residual.n) if seen[v]]


def cut_edges(graph: LogismosGraph, source_side) -> list:
    inside = set(source_side)
    return [
        (e.tail, e.head, e.capacity, e.kind)
        for e in graph.edges
        if e.tail in inside and e.head not in inside
    ]


def preflow_push_mincut(graph: LogismosGraph) -> CutCertificate:
    edges = [(e.tail, e.head, e.capacity) for e in graph.edges]
    flow, R = max_flow_highest_label(graph.num_vertices, edges, graph.source_id, graph.sink_id)
    side = residual_source_side(R, graph.source_id)
    return CutCertificate(
        flow_value=flow,
        source_side=side,
        cut_edges=cut_edges(graph, side),
        separates=graph.sink_id not in side,
    )


def brute_force_qubo(
    qubo: QuboProblem,
    cap: int = BRUTE_FORCE_DEFAULT_CAP,
    tol: float | None = None,
    block: int = 1 << 16,
):
    """Exhaustive minimum of the QUBO and every bitstring attaining it.

    Minimizers are ordered by basis index (bit ``i`` = variable ``i``).
    Integer-coefficient problems are compared exactly; otherwise within
    ``tol`` (default 1e-9).
    """
    n = qubo.size
    if n > min(cap, BRUTE_FORCE_HARD_CAP):
        raise ResourceError(f"brute force over {n} variables exceeds cap {min(cap, BRUTE_FORCE_HARD_CAP)}")
    integral = all(float(c).is_integer() for c in qubo.terms.values())
    if tol is None:
        tol = 0 if integral else FLOAT_TOL
    dtype = np.int64 if integral else np.float64
    terms = [(i, j, dtype(c)) for (i, j), c in qubo.terms.items()]
    best = None
    winners: list = []
    for start in range(0, 1 << n, block):
        stop = min(start + block, 1 << n)
        x = basis_bits(n, start, stop).astype(dtype)
        f = np.zeros(stop - start, dtype=dtype)
        for i, j, c in terms:
            f += c * (x[:, i] if i == j else x[:, i] * x[:, j])
        m = f.min()
        if best is None or m < best - tol:
            best = m
            winners = []
        if m <= best + tol:
            winners.extend((start + np.flatnonzero(f <= best + tol)).tolist())
    best = int(best) if integral else float(best)
    return best, [[(k >> i) & 1 for i in range(n)] for k in winners]


def verify_cut(graph: LogismosGraph, source_set, flow_value=None) -> dict:
    """Check the two criteria: separation of s from t and minimum capacity."""
    side = set(int(v) for v in source_set)
    separates = graph.source_id in side and graph.sink_id not in side
    capacity = sum(c for _, _, c, _ in cut_edges(graph, side))
    if flow_value is None:
        flow_value = preflow_push_mincut(graph).flow_value
    if isinstance(capacity, int) and isinstance(flow_value, int):
        minimum = capacity == flow_value
    else:
        minimum = abs(capacity - flow_value) <= FLOAT_TOL * max(1.0, abs(flow_value))
    return {
        "separates": separates,
        "cut_capacity": capacity,
        "flow_value": flow_value,
        "is_minimum": bool(separates and minimum),
    }


@dataclass
class OracleReport:
    flow: float
    source_side: list
    epsilon: float
    E0: float | None = None
    minimizers: list | None = None
    consistent: bool | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "flow": self.flow,
            "source_side": self.source_side,
            "epsilon": self.epsilon,
            "E0": self.E0,
            "minimizers": (
                ["".join(map(str, m)) for m in self.minimizers]
                if self.minimizers is not None
                else None
            ),
            "consistent": self.consistent,
            "notes": self.notes,
        }


def _equal(a, b) -> bool:
    if isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer)):
        return a == b
    return abs(a - b) <= FLOAT_TOL * max(1.0, abs(a), abs(b))


def cross_check(
    qubo: QuboProblem,
    graph: LogismosGraph,
    cap: int = BRUTE_FORCE_DEFAULT_CAP,
    raise_on_mismatch: bool = True,
) -> OracleReport:
    """Confirm ``min F_C == maxflow - epsilon`` by independent computations."""
    cert = preflow_push_mincut(graph)
    e0, mins = brute_force_qubo(qubo, cap=cap)
    ok = _equal(e0, cert.flow_value - qubo.epsilon)
    report = OracleReport(
        flow=cert.flow_value,
        source_side=cert.source_side,
        epsilon=qubo.epsilon,
        E0=e0,
        minimizers=mins,
        consistent=ok,
    )
    if not ok and raise_on_mismatch:
        raise OracleMismatchError(
            "brute-force minimum and max-flow disagree: "
            f"E0={e0}, flow={cert.flow_value}, epsilon={qubo.epsilon}\n"
            f"graph={json.dumps(graph.to_dict())}"
        )
    return report
