"""Imaginary-time evolution by drifted real-time Pauli rotations."""

from .engine import (
    LinearSystem,
    QiteConfig,
    TrajectoryRecord,
    TrajectoryResult,
    build_linear_system,
    run_trajectory,
    solve_truncated,
    step_deterministic,
    step_drift,
    step_full_qite,
)
from .hamio import ProblemDocument, parse, serialize
from .paulis import PauliString, PauliSum, commutes, multiply, to_dense
from .pool import OperatorPool, build_uccsd_pool, load_pool, pool_for
from .state import (
    StateVector,
    apply_pauli_rotation,
    exact_diagonalize,
    exact_ite_step,
    expectation,
    expectation_sum,
    from_bitstring,
)

__all__ = [
    "PauliString",
    "PauliSum",
    "multiply",
    "commutes",
    "to_dense",
    "StateVector",
    "from_bitstring",
    "apply_pauli_rotation",
    "expectation",
    "expectation_sum",
    "exact_ite_step",
    "exact_diagonalize",
    "OperatorPool",
    "build_uccsd_pool",
    "load_pool",
    "pool_for",
    "ProblemDocument",
    "parse",
    "serialize",
    "LinearSystem",
    "QiteConfig",
    "TrajectoryRecord",
    "TrajectoryResult",
    "build_linear_system",
    "solve_truncated",
    "step_full_qite",
    "step_drift",
    "step_deterministic",
    "run_trajectory",
]

__version__ = "0.1.0"
