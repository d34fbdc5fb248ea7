"""Hybrid QAOA loop: SPSA over the circuit angles, then bitstring read-out."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .costgraph import LogismosGraph, SurfaceError, extract_surface
from .ising import DEFAULT_QUBIT_CAP, check_cap, index_to_bits, qubo_to_ising
from .qsim import QaoaCircuit, QaoaParameters, SampleSet, format_bits
from .qubo import QuboProblem, build_qubo

DEFAULT_P_FLOOR = 1e-6
ENERGY_TIE_TOL = 1e-9


class OptimizationAborted(RuntimeError):
    """The objective returned a non-finite value; ``trace`` holds the history so far."""

    def __init__(self, message: str, trace: "OptimizationTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass
class SpsaConfig:
    """SPSA gains ``a_k = a0 / (k + 1 + A)**alpha`` and ``c_k = c0 / (k + 1)**gamma``.

    With ``a0=None`` the gain is calibrated at the start point so that the
    first update moves each coordinate by about ``target_step``. ``A=None``
    sets the stability offset to a tenth of ``maxiter``.
    """

    maxiter: int = 250
    a0: float | None = None
    A: float | None = None
    c0: float = 0.1
    alpha: float = 0.602
    gamma: float = 0.101
    tol: float = 1e-6
    patience: int = 25
    seed: int = 0
    target_step: float = 0.1
    calibration_samples: int = 10

    def __post_init__(self):
        if self.maxiter < 1:
            raise ValueError("maxiter must be >= 1")
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if not (0 < self.alpha < 1 and 0 < self.gamma < 1):
            raise ValueError("decay exponents must lie in (0, 1)")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.A is None:
            self.A = 0.1 * self.maxiter
        if self.A < 0:
            raise ValueError("stability offset A must be >= 0")


@dataclass
class IterationRecord:
    iteration: int
    theta: list
    energy: float


@dataclass
class OptimizationTrace:
    records: list = field(default_factory=list)
    best_energy: float = math.inf
    best_theta: list = field(default_factory=list)
    best_history: list = field(default_factory=list)
    nfev: int = 0
    a0: float | None = None
    stop_reason: str = ""

    def to_dict(self) -> dict:
        return {
            "records": [[r.iteration, r.theta, r.energy] for r in self.records],
            "best_energy": self.best_energy,
            "best_theta": self.best_theta,
            "nfev": self.nfev,
            "a0": self.a0,
            "stop_reason": self.stop_reason,
        }


def _rademacher(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.integers(0, 2, size=size) * 2.0 - 1.0


def calibrate_gain(objective, theta, config: SpsaConfig, rng, trace) -> float:
    total = 0.0
    for _ in range(config.calibration_samples):
        delta = _rademacher(rng, theta.size)
        fp = objective(theta + config.c0 * delta)
        fm = objective(theta - config.c0 * delta)
        trace.nfev += 2
        _require_finite(fp, fm, trace=trace)
        total += abs(fp - fm) / (2 * config.c0)
    magnitude = total / config.calibration_samples
    if magnitude == 0:
        return config.target_step
    return config.target_step * (config.A + 1) ** config.alpha / magnitude


def _require_finite(*values, trace):
    for v in values:
        if not np.isfinite(v):
            trace.stop_reason = "non-finite objective"
            raise OptimizationAborted(f"objective returned {v}", trace)


def spsa_minimize(
    objective: Callable[[np.ndarray], float],
    theta0: Sequence[float],
    config: SpsaConfig | None = None,
    rng: np.random.Generator | None = None,
):
    """Minimize ``objective`` with two-sided simultaneous perturbations.

    Stops after ``config.maxiter`` updates, or earlier once the best energy
    has not dropped by ``config.tol`` for ``config.patience`` consecutive
    updates. Returns ``(best_theta, best_energy, trace)``.
    """
    config = config or SpsaConfig()
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    theta = np.array(theta0, dtype=float)
    trace = OptimizationTrace()

    a0 = config.a0
    if a0 is None:
        a0 = calibrate_gain(objective, theta, config, rng, trace)
    trace.a0 = a0

    energy = objective(theta)
    trace.nfev += 1
    _require_finite(energy, trace=trace)
    trace.records.append(IterationRecord(0, theta.tolist(), float(energy)))
    best_e, best_theta = float(energy), theta.copy()
    trace.best_history.append(best_e)
    stall = 0
    trace.stop_reason = "maxiter"

    for k in range(config.maxiter):
        ak = a0 / (k + 1 + config.A) ** config.alpha
        ck = config.c0 / (k + 1) ** config.gamma
        delta = _rademacher(rng, theta.size)
        fp = objective(theta + ck * delta)
        fm = objective(theta - ck * delta)
        trace.nfev += 2
        _require_finite(fp, fm, trace=trace)
        grad = (fp - fm) / (2 * ck) * delta
        theta = theta - ak * grad
        energy = objective(theta)
        trace.nfev += 1
        _require_finite(energy, trace=trace)
        trace.records.append(IterationRecord(k + 1, theta.tolist(), float(energy)))
        if energy < best_e - config.tol:
            best_e, best_theta = float(energy), theta.copy()
            stall = 0
        else:
            if energy < best_e:
                best_e, best_theta = float(energy), theta.copy()
            stall += 1
        trace.best_history.append(best_e)
        if stall >= config.patience:
            trace.stop_reason = "no improvement"
            break

    trace.best_energy = best_e
    trace.best_theta = best_theta.tolist()
    return best_theta, best_e, trace


def select_best_bitstring(
    outcome,
    energies: np.ndarray,
    p_floor: float = DEFAULT_P_FLOOR,
) -> list:
    """Decode a solution from a final state or from measurement samples.

    For a statevector: lowest energy among basis states with probability of
    at least ``p_floor``, ties going to the more probable state, then the
    lower index. For a :class:`SampleSet`: lowest-energy sampled bitstring,
    ties going to the more frequent one.
    """
    if isinstance(outcome, SampleSet):
        if not outcome.energies:
            raise ValueError("sample set carries no energies")
        best = min(
            outcome.counts,
            key=lambda b: (outcome.energies[b], -outcome.counts[b], int(b[::-1], 2)),
        )
        return [int(c) for c in best]

    state = np.asarray(outcome)
    n = int(state.size).bit_length() - 1
    probs = np.abs(state) ** 2
    support = np.flatnonzero(probs >= p_floor)
    if support.size == 0:
        support = np.array([int(np.argmax(probs))])
    e_min = energies[support].min()
    ties = support[energies[support] <= e_min + ENERGY_TIE_TOL]
    order = np.lexsort((ties, -probs[ties]))
    return index_to_bits(int(ties[order[0]]), n)


@dataclass
class SolveResult:
    bitstring: list
    objective: float
    energy: float
    source_set: list
    background_set: list
    surface: dict | None
    valid_cut: bool
    cut_capacity: float | None
    depth: int
    theta: list
    restart: int
    restart_objectives: list
    trace: OptimizationTrace
    wall_seconds: float = 0.0
    num_nodes: int = 0
    columns: list | None = None
    heights: list | None = None

    def to_dict(self, include_timing: bool = False, include_trace: bool = True) -> dict:
        n = self.num_nodes
        d = {
            "bitstring": format_bits(self.bitstring[:n]),
            "q_s": int(self.bitstring[n]),
            "q_t": int(self.bitstring[n + 1]),
            "objective": self.objective,
            "energy": self.energy,
            "valid_cut": self.valid_cut,
            "cut_capacity": self.cut_capacity,
            "source_set": self.source_set,
            "background_set": self.background_set,
            "segmentation_set": [v for v in self.source_set if v < n],
            "surface": (
                [[_col_json(c), k] for c, k in self.surface.items()]
                if self.surface is not None
                else None
            ),
            "columns": [_col_json(c) for c in self.columns] if self.columns is not None else None,
            "heights": self.heights,
            "depth": self.depth,
            "theta": self.theta,
            "restart": self.restart,
            "restart_objectives": self.restart_objectives,
        }
        if include_trace:
            d["trace"] = self.trace.to_dict()
        if include_timing:
            d["wall_seconds"] = self.wall_seconds
        return d


def _col_json(c):
    return list(c) if isinstance(c, tuple) else c


def _theta0(rng: np.random.Generator, depth: int) -> np.ndarray:
    return rng.uniform(0.0, 0.1, size=2 * depth)


def qaoa_solve(
    qubo: QuboProblem,
    depth: int = 5,
    spsa_config: SpsaConfig | None = None,
    restarts: int = 1,
    *,
    shots: int = 0,
    mixer: bool = True,
    graph: LogismosGraph | None = None,
    cap: int = DEFAULT_QUBIT_CAP,
    p_floor: float = DEFAULT_P_FLOOR,
) -> SolveResult:
    """Run ``restarts`` independent SPSA-optimized QAOA circuits and keep the best.

    ``shots=0`` optimizes the exact expectation; otherwise each objective
    call is a sample mean over ``shots`` measurements. Restart ``r`` draws
    all of its randomness from ``default_rng(config.seed + r)``. The best
    restart has the lowest decoded objective, then the lowest optimized
    energy, then the lowest index. Passing ``graph`` fills in the surface.
    """
    if depth < 1:
        raise ValueError("QAOA depth p must be >= 1")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if shots < 0:
        raise ValueError("shots must be >= 0")
    check_cap(qubo.size, cap)
    config = spsa_config or SpsaConfig()
    started = time.perf_counter()
    circuit = QaoaCircuit(qubo_to_ising(qubo), mixer=mixer, cap=cap)

    runs = []
    for r in range(restarts):
        rng = np.random.default_rng(config.seed + r)
        theta0 = _theta0(rng, depth)
        if shots == 0:
            def objective(theta):
                return circuit.expectation(QaoaParameters.from_vector(theta))
        else:
            def objective(theta, rng=rng):
                psi = circuit.run(QaoaParameters.from_vector(theta))
                return circuit.sample(psi, shots, rng).mean_energy
        theta, e_best, trace = spsa_minimize(objective, theta0, config, rng)
        psi = circuit.run(QaoaParameters.from_vector(theta))
        if shots == 0:
            bits = select_best_bitstring(psi, circuit.energies, p_floor)
        else:
            bits = select_best_bitstring(circuit.sample(psi, shots, rng), circuit.energies)
        runs.append((qubo.evaluate(bits), e_best, r, bits, theta, trace))

    objective_value, e_best, r_best, bits, theta, trace = min(runs, key=lambda t: t[:3])
    cls = qubo.classify(bits)
    source = [i for i, b in enumerate(bits) if b == 1]
    background = [i for i, b in enumerate(bits) if b == 0]
    surface = None
    if graph is not None and cls["valid_cut"]:
        try:
            surface = extract_surface(source, graph).levels
        except SurfaceError:
            surface = None
    return SolveResult(
        bitstring=list(bits),
        objective=objective_value,
        energy=e_best,
        source_set=source,
        background_set=background,
        surface=surface,
        valid_cut=cls["valid_cut"],
        cut_capacity=cls["cut_capacity"],
        depth=depth,
        theta=[float(v) for v in theta],
        restart=r_best,
        restart_objectives=[t[0] for t in runs],
        trace=trace,
        wall_seconds=time.perf_counter() - started,
        num_nodes=qubo.size - 2,
        columns=list(graph.columns) if graph is not None else None,
        heights=list(graph.heights) if graph is not None else None,
    )


def solve_graph(graph: LogismosGraph, depth: int = 5, spsa_config=None, restarts: int = 1, **kwargs) -> SolveResult:
    return qaoa_solve(build_qubo(graph), depth, spsa_config, restarts, graph=graph, **kwargs)
