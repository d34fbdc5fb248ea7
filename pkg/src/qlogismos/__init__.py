"""Optimal surface segmentation as a min s-t cut QUBO, solved with simulated QAOA."""

from .costgraph import (
    ClosureViolationError,
    ConstructionError,
    CostMatrix,
    InfeasibleSurfaceError,
    LogismosGraph,
    SurfaceFunction,
    build_graph,
    compute_terminal_weights,
    extract_surface,
    load_instance,
)
from .ising import IsingHamiltonian, ResourceError, StateError, qubo_to_ising
from .optimize import SolveResult, SpsaConfig, qaoa_solve, solve_graph, spsa_minimize
from .oracle import brute_force_qubo, cross_check, preflow_push_mincut, verify_cut
from .qsim import QaoaParameters, run_circuit, sample
from .qubo import QuboProblem, build_qubo, penalty_epsilon

__version__ = "0.1.0"
