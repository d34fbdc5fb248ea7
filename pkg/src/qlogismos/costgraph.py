"""LOGISMOS graph construction for single-surface detection.

A cost matrix assigns every node ``(column, level)`` an on-surface cost.
Differencing the costs down each column gives node terminal weights; the
graph then gets three families of edges:

* intra-column edges ``(x, k) -> (x, k-1)`` that make the source side of
  any finite cut downward closed in every column,
* inter-column edges ``(x, k) -> (x', max(1, k - delta))`` that bound the
  level difference of adjacent surface nodes by ``delta``,
* terminal edges from the source to negatively weighted nodes and from
  positively weighted nodes to the sink.

Levels are 1-based (bottom to top). Node ids are 0-based and follow
``column_rank * K + (k - 1)``; with ragged columns the offset is the
running sum of the preceding column heights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np

INTRA = "intra"
INTER = "inter"
TERMINAL = "terminal"
EDGE_KINDS = (INTRA, INTER, TERMINAL)

DEFAULT_DELTA = 2


class ConstructionError(ValueError):
    """Raised when an instance violates a cost-matrix or graph invariant."""


class SurfaceError(ValueError):
    """Base class for failures while reading a surface off a source set."""


class ClosureViolationError(SurfaceError):
    """The source set is not downward closed in some column."""


class InfeasibleSurfaceError(SurfaceError):
    """Some column has no node in the source set."""


@dataclass(frozen=True)
class CostMatrix:
    """Per-column node costs plus column adjacency and smoothness.

    ``costs[r][k-1]`` is the cost of level ``k`` in the column ranked ``r``.
    When ``terminal_weights`` is given it is used verbatim instead of
    differencing ``costs`` (fixtures specified directly by weights).
    """

    columns: tuple
    costs: tuple
    adjacency: tuple
    delta: int = DEFAULT_DELTA
    terminal_weights: tuple | None = None

    def __post_init__(self):
        values = self.terminal_weights if self.terminal_weights is not None else self.costs
        if len(self.columns) == 0:
            raise ConstructionError("instance has no columns")
        if len(set(self.columns)) != len(self.columns):
            raise ConstructionError("column identifiers must be unique")
        if len(values) != len(self.columns):
            raise ConstructionError(
                f"expected {len(self.columns)} cost columns, got {len(values)}"
            )
        for col, vals in zip(self.columns, values):
            if len(vals) < 1:
                raise ConstructionError(f"column {col!r} is empty (K_x >= 1 required)")
            for v in vals:
                if not np.isfinite(v):
                    raise ConstructionError(f"column {col!r} has a non-finite value")
        if self.terminal_weights is not None and self.costs:
            if [len(c) for c in self.costs] != [len(w) for w in self.terminal_weights]:
                raise ConstructionError("costs and terminal_weights shapes differ")
        if isinstance(self.delta, bool) or int(self.delta) != self.delta or self.delta < 0:
            raise ConstructionError(f"delta must be a non-negative integer, got {self.delta!r}")
        known = set(self.columns)
        seen = set()
        for pair in self.adjacency:
            a, b = pair
            if a not in known or b not in known:
                raise ConstructionError(f"adjacency pair {pair!r} names an unknown column")
            if a == b:
                raise ConstructionError(f"adjacency contains self-pair {pair!r}")
            key = frozenset((a, b))
            if key in seen:
                raise ConstructionError(f"adjacency contains duplicate pair {pair!r}")
            seen.add(key)

    @classmethod
    def from_lists(
        cls,
        costs: Sequence[Sequence[float]] | None = None,
        *,
        columns: Sequence[Hashable] | None = None,
        adjacency: Iterable[tuple] | None = None,
        delta: int = DEFAULT_DELTA,
        terminal_weights: Sequence[Sequence[float]] | None = None,
    ) -> "CostMatrix":
        """Build from nested lists; columns default to ``0..m-1`` in a chain."""
        values = terminal_weights if terminal_weights is not None else costs
        if values is None:
            raise ConstructionError("either costs or terminal_weights is required")
        if columns is None:
            columns = list(range(len(values)))
        if adjacency is None:
            adjacency = chain_adjacency(columns)
        return cls(
            columns=tuple(columns),
            costs=tuple(tuple(c) for c in costs) if costs is not None else (),
            adjacency=tuple(tuple(p) for p in adjacency),
            delta=delta,
            terminal_weights=(
                tuple(tuple(w) for w in terminal_weights)
                if terminal_weights is not None
                else None
            ),
        )

    @property
    def heights(self) -> tuple:
        values = self.terminal_weights if self.terminal_weights is not None else self.costs
        return tuple(len(v) for v in values)

    def weights(self) -> list:
        if self.terminal_weights is not None:
            return [list(w) for w in self.terminal_weights]
        return compute_terminal_weights(self.costs)


def chain_adjacency(columns: Sequence[Hashable]) -> list:
    """Neighbour pairs of a 2-D image: consecutive columns."""
    return [(columns[i], columns[i + 1]) for i in range(len(columns) - 1)]


def grid_adjacency(nx: int, ny: int) -> tuple[list, list]:
    """Columns and 4-neighbour pairs for a 3-D image with an ``nx x ny`` column grid.

    Columns are identified by ``(i, j)`` tuples ranked row-major.
    """
    columns = [(i, j) for i in range(nx) for j in range(ny)]
    pairs = []
    for i in range(nx):
        for j in range(ny):
            if i + 1 < nx:
                pairs.append(((i, j), (i + 1, j)))
            if j + 1 < ny:
                pairs.append(((i, j), (i, j + 1)))
    return columns, pairs


def compute_terminal_weights(costs: Sequence[Sequence[float]]) -> list:
    """Terminal weights per column: -1 at level 1, cost differences above.

    >>> compute_terminal_weights([[5, 2, 7]])
    [[-1, -3, 5]]
    """
    weights = []
    for r, col in enumerate(costs):
        if len(col) == 0:
            raise ConstructionError(f"column {r} is empty")
        w = [-1]
        for k in range(1, len(col)):
            w.append(col[k] - col[k - 1])
        weights.append(w)
    return weights


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    capacity: float
    kind: str


@dataclass
class LogismosGraph:
    """Directed capacitated s-t graph built from a :class:`CostMatrix`.

    ``weights[r][k-1]`` is the terminal weight of node ``(columns[r], k)``.
    ``big_m`` is the finite stand-in for the infinite capacity of the
    intra/inter constraint edges. It equals the QUBO penalty (one plus the
    total terminal capacity), which exceeds every cut avoiding those edges.
    """

    columns: tuple
    heights: tuple
    adjacency: tuple
    delta: int
    weights: list
    edges: list = field(default_factory=list)
    big_m: float = 1

    def __post_init__(self):
        self._offsets = np.concatenate([[0], np.cumsum(self.heights)]).astype(int).tolist()
        self._rank = {c: r for r, c in enumerate(self.columns)}

    @property
    def node_count(self) -> int:
        return self._offsets[-1]

    @property
    def source_id(self) -> int:
        return self.node_count

    @property
    def sink_id(self) -> int:
        return self.node_count + 1

    @property
    def num_vertices(self) -> int:
        return self.node_count + 2

    def node_id(self, column, level: int) -> int:
        r = self._rank[column]
        if not 1 <= level <= self.heights[r]:
            raise KeyError(f"level {level} outside column {column!r}")
        return self._offsets[r] + level - 1

    def node_position(self, node: int) -> tuple:
        """Inverse of :meth:`node_id`: ``(column, level)`` for an image node."""
        if not 0 <= node < self.node_count:
            raise KeyError(f"{node} is not an image node")
        r = int(np.searchsorted(self._offsets, node, side="right")) - 1
        return self.columns[r], node - self._offsets[r] + 1

    def node_index(self) -> list:
        return [
            (col, k, self._offsets[r] + k - 1)
            for r, col in enumerate(self.columns)
            for k in range(1, self.heights[r] + 1)
        ]

    def column_nodes(self, column) -> list:
        r = self._rank[column]
        return list(range(self._offsets[r], self._offsets[r + 1]))

    def node_weight(self, node: int) -> float:
        col, k = self.node_position(node)
        return self.weights[self._rank[col]][k - 1]

    def edges_of_kind(self, kind: str) -> list:
        return [e for e in self.edges if e.kind == kind]

    def terminal_capacity(self) -> float:
        return sum(e.capacity for e in self.edges if e.kind == TERMINAL)

    def to_dict(self) -> dict:
        return {
            "columns": [_jsonable(c) for c in self.columns],
            "heights": list(self.heights),
            "adjacency": [[_jsonable(a), _jsonable(b)] for a, b in self.adjacency],
            "delta": self.delta,
            "weights": [list(w) for w in self.weights],
            "nodes": self.node_count,
            "source": self.source_id,
            "sink": self.sink_id,
            "epsilon": self.big_m,
            "big_m": self.big_m,
            "node_index": [[_jsonable(c), k, i] for c, k, i in self.node_index()],
            "edges": [[e.tail, e.head, e.capacity, e.kind] for e in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogismosGraph":
        """Rebuild a graph from :meth:`to_dict` output and check it is consistent.

        The edge list is regenerated from the stored weights, adjacency and
        delta; a stored edge list that disagrees is rejected.
        """
        try:
            cm = CostMatrix.from_lists(
                columns=[_hashable(c) for c in data["columns"]],
                adjacency=[(_hashable(a), _hashable(b)) for a, b in data["adjacency"]],
                delta=data["delta"],
                terminal_weights=data["weights"],
            )
        except KeyError as exc:
            raise ConstructionError(f"graph file is missing key {exc}") from None
        graph = build_graph(cm)
        if "heights" in data and list(data["heights"]) != list(graph.heights):
            raise ConstructionError("graph file heights disagree with its weights")
        if "edges" in data:
            stored = sorted((int(u), int(v), float(c), str(k)) for u, v, c, k in data["edges"])
            rebuilt = sorted((e.tail, e.head, float(e.capacity), e.kind) for e in graph.edges)
            if stored != rebuilt:
                raise ConstructionError("graph file edge list disagrees with its weights")
        return graph


def _jsonable(col):
    return list(col) if isinstance(col, tuple) else col


def _hashable(col):
    return tuple(col) if isinstance(col, list) else col


def build_intra_edges(graph: LogismosGraph, capacity: float) -> list:
    edges = []
    for col in graph.columns:
        for k in range(graph.heights[graph._rank[col]], 1, -1):
            edges.append(Edge(graph.node_id(col, k), graph.node_id(col, k - 1), capacity, INTRA))
    return edges


def build_inter_edges(graph: LogismosGraph, capacity: float) -> list:
    """Smoothness arcs ``(x, k) -> (x', max(1, k - delta))`` in both directions."""
    edges = []
    for a, b in graph.adjacency:
        for x, y in ((a, b), (b, a)):
            ky = graph.heights[graph._rank[y]]
            for k in range(1, graph.heights[graph._rank[x]] + 1):
                target = min(max(1, k - graph.delta), ky)
                edges.append(Edge(graph.node_id(x, k), graph.node_id(y, target), capacity, INTER))
    return edges


def attach_terminals(graph: LogismosGraph) -> list:
    edges = []
    s, t = graph.source_id, graph.sink_id
    for r, col in enumerate(graph.columns):
        for k, w in enumerate(graph.weights[r], start=1):
            v = graph.node_id(col, k)
            if w < 0:
                edges.append(Edge(s, v, -w, TERMINAL))
            elif w > 0:
                edges.append(Edge(v, t, w, TERMINAL))
    return edges


def build_graph(cost_matrix: CostMatrix) -> LogismosGraph:
    """Assemble the full LOGISMOS graph for ``cost_matrix``."""
    graph = LogismosGraph(
        columns=cost_matrix.columns,
        heights=cost_matrix.heights,
        adjacency=cost_matrix.adjacency,
        delta=int(cost_matrix.delta),
        weights=cost_matrix.weights(),
    )
    terminal = attach_terminals(graph)
    big_m = 1 + sum(e.capacity for e in terminal)
    graph.big_m = big_m
    graph.edges = build_intra_edges(graph, big_m) + build_inter_edges(graph, big_m) + terminal
    return graph


@dataclass(frozen=True)
class SurfaceFunction:
    """Surface level ``s(x)`` for every column ``x``."""

    levels: dict

    def __getitem__(self, column) -> int:
        return self.levels[column]

    def smoothness_violations(self, adjacency: Iterable[tuple], delta: int) -> list:
        return [
            (a, b) for a, b in adjacency if abs(self.levels[a] - self.levels[b]) > delta
        ]

    def total_cost(self, cost_matrix: CostMatrix) -> float:
        ranks = {c: r for r, c in enumerate(cost_matrix.columns)}
        return sum(cost_matrix.costs[ranks[c]][k - 1] for c, k in self.levels.items())


def extract_surface(source_set: Iterable[int], graph: LogismosGraph) -> SurfaceFunction:
    """Highest source-side node in every column.

    ``source_set`` may contain the source and sink ids; they are ignored.

    Raises
    ------
    ClosureViolationError
        If some column's source-side levels are not a prefix ``1..k``.
    InfeasibleSurfaceError
        If some column has no source-side node.
    """
    members = set(int(v) for v in source_set)
    levels = {}
    for r, col in enumerate(graph.columns):
        inside = [k for k in range(1, graph.heights[r] + 1) if graph.node_id(col, k) in members]
        if not inside:
            raise InfeasibleSurfaceError(f"column {col!r} has no node in the source set")
        top = max(inside)
        if len(inside) != top:
            missing = sorted(set(range(1, top + 1)) - set(inside))
            raise ClosureViolationError(
                f"column {col!r}: level {top} is in the source set but levels {missing} are not"
            )
        levels[col] = top
    return SurfaceFunction(levels)


def instance_from_dict(data: dict) -> CostMatrix:
    """Parse the instance JSON schema.

    ``columns`` is either a column count (2-D chain) or a grid shape
    ``[nx, ny]`` (3-D, 4-neighbour adjacency). Exactly one of ``costs`` or
    ``terminal_weights`` must be present; ``delta`` defaults to 2.
    """
    if not isinstance(data, dict):
        raise ConstructionError("instance must be a JSON object")
    costs = data.get("costs")
    weights = data.get("terminal_weights")
    if costs is None and weights is None:
        raise ConstructionError("instance needs 'costs' or 'terminal_weights'")
    values = weights if weights is not None else costs
    if not isinstance(values, list) or not all(isinstance(v, list) for v in values):
        raise ConstructionError("costs/terminal_weights must be a list of per-column lists")
    spec = data.get("columns", len(values))
    if isinstance(spec, int) and not isinstance(spec, bool):
        columns = list(range(spec))
        adjacency = chain_adjacency(columns)
    elif isinstance(spec, list) and len(spec) == 2 and all(isinstance(v, int) for v in spec):
        columns, adjacency = grid_adjacency(*spec)
    else:
        raise ConstructionError(f"'columns' must be an int or [nx, ny], got {spec!r}")
    if len(columns) != len(values):
        raise ConstructionError(
            f"'columns' describes {len(columns)} columns but {len(values)} are given"
        )
    height = data.get("height")
    if height is not None and any(len(v) != height for v in values):
        raise ConstructionError(f"every column must have height K={height}")
    return CostMatrix.from_lists(
        costs=costs if weights is None else None,
        columns=columns,
        adjacency=adjacency,
        delta=data.get("delta", DEFAULT_DELTA),
        terminal_weights=weights,
    )


def load_instance(path: str | Path) -> CostMatrix:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConstructionError(f"malformed JSON in {path}: {exc}") from None
    return instance_from_dict(data)


def random_cost_matrix(
    rng: np.random.Generator,
    n_columns: int,
    height: int,
    delta: int,
    low: int = 0,
    high: int = 10,
) -> CostMatrix:
    """Chain instance with integer costs drawn uniformly from ``[low, high]``."""
    costs = rng.integers(low, high + 1, size=(n_columns, height)).tolist()
    return CostMatrix.from_lists(costs, delta=delta)


def random_instance(
    rng: np.random.Generator,
    columns: tuple = (2, 4),
    max_height: int = 4,
    max_qubits: int = 14,
    deltas: Sequence[int] = (0, 1, 2),
) -> CostMatrix:
    """Random chain instance whose QUBO (nodes plus s and t) fits ``max_qubits``."""
    while True:
        m = int(rng.integers(columns[0], columns[1] + 1))
        k = int(rng.integers(1, max_height + 1))
        if m * k + 2 <= max_qubits:
            break
    return random_cost_matrix(rng, m, k, int(rng.choice(deltas)))
