import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlogismos.costgraph import build_graph, random_instance
from qlogismos.ising import (
    IsingHamiltonian,
    ResourceError,
    StateError,
    basis_bits,
    diagonal_energies,
    expectation,
    qubo_to_ising,
)
from qlogismos.qubo import QuboProblem, build_qubo


def dense_qubo_values(qubo):
    X = basis_bits(qubo.size).astype(float)
    return np.einsum("bi,ij,bj->b", X, qubo.dense(), X)


def test_two_variable_expansion():
    q = QuboProblem(size=2, epsilon=1, source_var=0, sink_var=1)
    q.add(0, 0, 3)
    q.add(0, 1, -3)
    h = qubo_to_ising(q)
    assert h.offset == 0.75
    assert h.linear == {0: -0.75, 1: 0.75}
    assert h.quadratic == {(0, 1): -0.75}
    assert h.energy_of_bits([1, 0]) == 3


def test_zero_qubo():
    h = qubo_to_ising(QuboProblem(size=3, epsilon=1, source_var=1, sink_var=2))
    assert h.offset == 0 and not h.linear and not h.quadratic
    assert np.all(diagonal_energies(h) == 0)


def test_one_qubit_energies():
    h = IsingHamiltonian(1, offset=2.0, linear={0: 0.5})
    assert diagonal_energies(h).tolist() == [2.5, 1.5]


def test_single_column_ground_energy(single_column_graph):
    h = qubo_to_ising(build_qubo(single_column_graph))
    assert diagonal_energies(h).min() == -5


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_energies_match_qubo(seed):
    g = build_graph(random_instance(np.random.default_rng(seed), columns=(1, 4), max_qubits=12))
    q = build_qubo(g)
    e = diagonal_energies(qubo_to_ising(q))
    assert np.max(np.abs(e - dense_qubo_values(q))) <= 1e-12
    for idx in np.random.default_rng(seed).integers(0, e.size, size=16):
        bits = [(int(idx) >> i) & 1 for i in range(q.size)]
        assert e[idx] == pytest.approx(q.evaluate(bits), abs=1e-12)


def test_block_size_does_not_change_result():
    g = build_graph(random_instance(np.random.default_rng(5), max_qubits=12))
    h = qubo_to_ising(build_qubo(g))
    assert np.array_equal(h.diagonal_energies(block=7), h.diagonal_energies())


def test_qubit_cap():
    with pytest.raises(ResourceError):
        IsingHamiltonian(30).diagonal_energies()
    with pytest.raises(ResourceError):
        IsingHamiltonian(10).diagonal_energies(cap=8)


def test_expectation_examples(single_column_graph):
    h = qubo_to_ising(build_qubo(single_column_graph))
    e = diagonal_energies(h)
    basis = np.zeros(16, dtype=complex)
    basis[5] = 1
    assert expectation(h, basis) == e[5]
    plus = np.full(16, 0.25, dtype=complex)
    assert expectation(h, plus) == pytest.approx(e.mean(), abs=1e-12)
    one = IsingHamiltonian(1, offset=1.0, linear={0: 3.0})
    assert expectation(one, np.array([1, 1j]) / np.sqrt(2)) == pytest.approx(1.0)
    with pytest.raises(StateError):
        expectation(h, 2 * plus)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_expectation_bounded_below_by_ground_energy(seed):
    rng = np.random.default_rng(seed)
    g = build_graph(random_instance(rng, columns=(1, 3), max_qubits=8))
    h = qubo_to_ising(build_qubo(g))
    psi = rng.normal(size=1 << h.num_qubits) + 1j * rng.normal(size=1 << h.num_qubits)
    psi /= np.linalg.norm(psi)
    assert expectation(h, psi) >= diagonal_energies(h).min() - 1e-12


def test_coefficient_dump_is_json():
    import json

    h = qubo_to_ising(build_qubo(build_graph(random_instance(np.random.default_rng(1)))))
    data = json.loads(h.dumps())
    assert data["num_qubits"] == h.num_qubits
