"""Diagonal problem Hamiltonian obtained from a QUBO by ``x = (1 - z) / 2``.

Bit ``i`` of a basis-state index is the value of variable ``i``
(little-endian), so index ``sum_i x_i 2**i`` has spin ``z_i = 1 - 2 x_i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .qubo import QuboProblem

DEFAULT_QUBIT_CAP = 24


class ResourceError(RuntimeError):
    """Requested register exceeds the configured qubit cap."""


class StateError(ValueError):
    """Statevector has the wrong shape or is not normalized."""


def check_cap(num_qubits: int, cap: int = DEFAULT_QUBIT_CAP) -> None:
    if num_qubits > cap:
        raise ResourceError(f"{num_qubits} qubits exceeds the cap of {cap}")


def basis_bits(num_qubits: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows of 0/1 values for basis indices ``start..stop-1``; column ``i`` is bit ``i``."""
    if stop is None:
        stop = 1 << num_qubits
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(num_qubits, dtype=np.int64)) & 1).astype(np.int8)


def index_to_bits(index: int, num_qubits: int) -> list:
    return [(index >> i) & 1 for i in range(num_qubits)]


def bits_to_index(bits) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


@dataclass
class IsingHamiltonian:
    """``offset + sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j``."""

    num_qubits: int
    offset: float = 0.0
    linear: dict = field(default_factory=dict)
    quadratic: dict = field(default_factory=dict)

    def energy(self, spins) -> float:
        """Energy of one spin configuration (entries +1/-1)."""
        z = np.asarray(spins)
        e = self.offset
        for i, h in self.linear.items():
            e += h * z[i]
        for (i, j), J in self.quadratic.items():
            e += J * z[i] * z[j]
        return e

    def energy_of_bits(self, bits) -> float:
        return self.energy(1 - 2 * np.asarray(bits, dtype=int))

    def diagonal_energies(self, cap: int = DEFAULT_QUBIT_CAP, block: int = 1 << 16) -> np.ndarray:
        """Energies of all ``2**n`` basis states; the minimum is the ground energy.

        Evaluated block by block over basis indices; each entry depends only on
        its own index, so the result does not depend on ``block``.
        """
        n = self.num_qubits
        check_cap(n, cap)
        out = np.empty(1 << n)
        h = np.zeros(n)
        for i, v in self.linear.items():
            h[i] = v
        pairs = list(self.quadratic.items())
        for start in range(0, 1 << n, block):
            stop = min(start + block, 1 << n)
            z = 1.0 - 2.0 * basis_bits(n, start, stop)
            e = np.full(stop - start, float(self.offset))
            e += z @ h
            for (i, j), J in pairs:
                e += J * z[:, i] * z[:, j]
            out[start:stop] = e
        return out

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "offset": self.offset,
            "linear": [[i, h] for i, h in sorted(self.linear.items())],
            "quadratic": [[i, j, J] for (i, j), J in sorted(self.quadratic.items())],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict())


def qubo_to_ising(qubo: QuboProblem) -> IsingHamiltonian:
    offset = 0.0
    linear: dict = {}
    quadratic: dict = {}

    def bump(d, key, v):
        d[key] = d.get(key, 0.0) + v

    for (i, j), c in qubo.terms.items():
        if c == 0:
            continue
        if i == j:
            # x_i = (1 - z_i) / 2
            offset += c / 2
            bump(linear, i, -c / 2)
        else:
            # x_i x_j = (1 - z_i - z_j + z_i z_j) / 4
            offset += c / 4
            bump(linear, i, -c / 4)
            bump(linear, j, -c / 4)
            bump(quadratic, (min(i, j), max(i, j)), c / 4)
    linear = {k: v for k, v in linear.items() if v != 0}
    quadratic = {k: v for k, v in quadratic.items() if v != 0}
    return IsingHamiltonian(qubo.size, offset, linear, quadratic)


def diagonal_energies(hamiltonian: IsingHamiltonian, cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    return hamiltonian.diagonal_energies(cap=cap)


def expectation_from_energies(energies: np.ndarray, state: np.ndarray, atol: float = 1e-8) -> float:
    psi = np.asarray(state)
    if psi.shape != energies.shape:
        raise StateError(f"state has shape {psi.shape}, expected {energies.shape}")
    probs = psi.real**2 + psi.imag**2
    norm = probs.sum()
    if abs(norm - 1.0) > atol:
        raise StateError(f"state norm^2 is {norm:.12g}, not 1")
    return float(np.dot(probs, energies))


def expectation(hamiltonian: IsingHamiltonian, state: np.ndarray, cap: int = DEFAULT_QUBIT_CAP) -> float:
    """``<psi| H |psi>`` for a normalized statevector."""
    return expectation_from_energies(hamiltonian.diagonal_energies(cap=cap), state)
