"""Cut QUBO for a LOGISMOS graph.

Every edge ``i -> j`` with capacity ``w`` contributes ``w * (x_i - x_i x_j)``,
which is ``w`` exactly when the edge crosses from the source side
(``x = 1``) to the sink side (``x = 0``). The source/sink pair adds the
penalty ``eps * (-x_s + x_s x_t)`` so that a valid cut (``x_s = 1``,
``x_t = 0``) scores ``cut_capacity - eps < 0`` while every invalid
assignment scores ``>= 0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .costgraph import LogismosGraph


class QuboInputError(ValueError):
    pass


@dataclass
class QuboProblem:
    """Sparse ``x^T Q x`` over ``size`` binary variables.

    ``terms`` maps ordered pairs ``(i, j)`` to ``Q_ij``; ``(i, i)`` holds the
    diagonal. Variables ``0..n-1`` are image nodes, then source, then sink.
    """

    size: int
    epsilon: float
    source_var: int
    sink_var: int
    terms: dict = field(default_factory=dict)

    def add(self, i: int, j: int, coeff: float) -> None:
        key = (int(i), int(j))
        self.terms[key] = self.terms.get(key, 0) + coeff

    def dense(self) -> np.ndarray:
        Q = np.zeros((self.size, self.size))
        for (i, j), c in self.terms.items():
            Q[i, j] += c
        return Q

    def _check(self, bitstring) -> np.ndarray:
        x = np.asarray(bitstring, dtype=int)
        if x.ndim != 1 or x.shape[0] != self.size:
            raise QuboInputError(
                f"bitstring has length {x.size}, expected {self.size}"
            )
        if np.any((x != 0) & (x != 1)):
            raise QuboInputError("bitstring entries must be 0 or 1")
        return x

    def evaluate(self, bitstring: Sequence[int]) -> float:
        """Objective value ``x^T Q x`` including the penalty terms."""
        x = self._check(bitstring)
        total = 0
        for (i, j), c in self.terms.items():
            if x[i] and x[j]:
                total += c
        return total

    def classify(self, bitstring: Sequence[int]) -> dict:
        """Whether ``bitstring`` is a valid s-t cut and, if so, its capacity."""
        x = self._check(bitstring)
        energy = self.evaluate(x)
        valid = bool(x[self.source_var] == 1 and x[self.sink_var] == 0)
        return {
            "valid_cut": valid,
            "cut_capacity": energy + self.epsilon if valid else None,
            "energy": energy,
        }

    def row_balance_residuals(self) -> np.ndarray:
        """``Q_ii + sum_{j != i} Q_ij`` per row; zero for every cut QUBO."""
        res = np.zeros(self.size)
        for (i, j), c in self.terms.items():
            res[i] += c
        return res

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "epsilon": self.epsilon,
            "source_var": self.source_var,
            "sink_var": self.sink_var,
            "terms": [[i, j, c] for (i, j), c in sorted(self.terms.items())],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuboProblem":
        try:
            q = cls(
                size=int(data["size"]),
                epsilon=data["epsilon"],
                source_var=int(data["source_var"]),
                sink_var=int(data["sink_var"]),
            )
            for i, j, c in data["terms"]:
                if not (0 <= i < q.size and 0 <= j < q.size):
                    raise QuboInputError(f"term ({i}, {j}) out of range")
                q.add(i, j, c)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, QuboInputError):
                raise
            raise QuboInputError(f"malformed QUBO: {exc}") from None
        return q

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "QuboProblem":
        return cls.from_dict(json.loads(text))


def penalty_epsilon(graph: LogismosGraph) -> float:
    """One plus the total terminal capacity.

    The constraint edges are left out: their capacity is this very value.
    """
    return 1 + graph.terminal_capacity()


def build_qubo(graph: LogismosGraph) -> QuboProblem:
    eps = penalty_epsilon(graph)
    s, t = graph.source_id, graph.sink_id
    q = QuboProblem(size=graph.num_vertices, epsilon=eps, source_var=s, sink_var=t)
    for e in graph.edges:
        q.add(e.tail, e.tail, e.capacity)
        q.add(e.tail, e.head, -e.capacity)
    q.add(s, s, -eps)
    q.add(s, t, eps)
    return q
