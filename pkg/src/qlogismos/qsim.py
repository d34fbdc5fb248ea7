"""Statevector simulator for QAOA circuits with a diagonal cost Hamiltonian.

The cost layer is an elementwise phase ``exp(-i gamma E(z))``; the mixer
``exp(-i beta sum_i X_i)`` factorizes into the same single-qubit rotation
on every qubit. Amplitudes are complex128, indexed little-endian
(bit ``i`` of the index is qubit ``i``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ising import (
    DEFAULT_QUBIT_CAP,
    IsingHamiltonian,
    StateError,
    check_cap,
    expectation_from_energies,
    index_to_bits,
)


def format_bits(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


@dataclass(frozen=True)
class QaoaParameters:
    gammas: tuple
    betas: tuple

    def __post_init__(self):
        if len(self.gammas) != len(self.betas):
            raise ValueError("gammas and betas must have the same length")
        if len(self.gammas) < 1:
            raise ValueError("QAOA depth must be at least 1")

    @property
    def depth(self) -> int:
        return len(self.gammas)

    @classmethod
    def from_vector(cls, theta: Sequence[float]) -> "QaoaParameters":
        """Split ``theta = (gamma_1..gamma_p, beta_1..beta_p)``."""
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1 or theta.size % 2:
            raise ValueError("theta must be a flat vector of even length")
        p = theta.size // 2
        return cls(tuple(theta[:p]), tuple(theta[p:]))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.gammas, self.betas]).astype(float)


@dataclass
class SampleSet:
    shots: int
    counts: dict
    energies: dict = field(default_factory=dict)

    @property
    def mean_energy(self) -> float:
        return sum(self.energies[b] * c for b, c in self.counts.items()) / self.shots

    @property
    def min_energy(self) -> float:
        return min(self.energies[b] for b in self.counts)

    def frequencies(self) -> dict:
        return {b: c / self.shots for b, c in self.counts.items()}


def uniform_superposition(n: int, cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """``|+>^n``, the ground state of ``-sum_i X_i``."""
    if n < 1:
        raise ValueError("need at least one qubit")
    check_cap(n, cap)
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)


def apply_cost_layer(state: np.ndarray, gamma: float, energies: np.ndarray) -> np.ndarray:
    return state * np.exp(-1j * gamma * energies)


def apply_mixer_layer(state: np.ndarray, beta: float) -> np.ndarray:
    """Apply ``[[cos b, -i sin b], [-i sin b, cos b]]`` to every qubit."""
    n = int(state.size).bit_length() - 1
    c, s = np.cos(beta), -1j * np.sin(beta)
    out = state.copy()
    for q in range(n):
        v = out.reshape(-1, 2, 1 << q)
        lo = v[:, 0, :].copy()
        hi = v[:, 1, :]
        v[:, 0, :] = c * lo + s * hi
        v[:, 1, :] = s * lo + c * hi
    return out


class QaoaCircuit:
    """QAOA ansatz bound to one Hamiltonian; the diagonal is computed once."""

    def __init__(
        self,
        hamiltonian: IsingHamiltonian,
        mixer: bool = True,
        cap: int = DEFAULT_QUBIT_CAP,
    ):
        check_cap(hamiltonian.num_qubits, cap)
        self.hamiltonian = hamiltonian
        self.num_qubits = hamiltonian.num_qubits
        self.mixer = mixer
        self.cap = cap
        self.energies = hamiltonian.diagonal_energies(cap=cap)

    def run(self, params: QaoaParameters) -> np.ndarray:
        psi = uniform_superposition(self.num_qubits, self.cap)
        for gamma, beta in zip(params.gammas, params.betas):
            psi = apply_cost_layer(psi, gamma, self.energies)
            if self.mixer:
                psi = apply_mixer_layer(psi, beta)
        return psi

    def expectation(self, params: QaoaParameters) -> float:
        return expectation_from_energies(self.energies, self.run(params))

    def sample(self, state: np.ndarray, shots: int, rng) -> SampleSet:
        return sample(state, shots, rng, energies=self.energies)


def run_circuit(
    params: QaoaParameters,
    hamiltonian: IsingHamiltonian,
    mixer: bool = True,
    cap: int = DEFAULT_QUBIT_CAP,
) -> np.ndarray:
    """Final state ``U_M(b_p) U_C(g_p) ... U_M(b_1) U_C(g_1) |+>^n``."""
    return QaoaCircuit(hamiltonian, mixer=mixer, cap=cap).run(params)


def sample(
    state: np.ndarray,
    shots: int,
    rng_seed=None,
    energies: np.ndarray | None = None,
) -> SampleSet:
    """Draw ``shots`` computational-basis measurements.

    ``rng_seed`` may be an int seed or a ``numpy.random.Generator``. Keys of
    the returned counts are bitstrings ordered qubit 0 first.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.abs(state) ** 2
    total = probs.sum()
    if abs(total - 1.0) > 1e-8:
        raise StateError(f"state norm^2 is {total:.12g}, not 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    n = int(state.size).bit_length() - 1
    draws = rng.choice(state.size, size=shots, p=probs / total)
    idx, cnt = np.unique(draws, return_counts=True)
    counts = {}
    found = {}
    for i, c in zip(idx.tolist(), cnt.tolist()):
        key = format_bits(index_to_bits(i, n))
        counts[key] = c
        if energies is not None:
            found[key] = float(energies[i])
    return SampleSet(shots=shots, counts=counts, energies=found)
