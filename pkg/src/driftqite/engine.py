"""Algorithm core: linear-system assembly, truncated solve, state stepping.

Each imaginary-time step solves S a = b built from expectation values of
the current state, then advances the state either by the full product of
pool rotations, by one drifted rotation sampled with probability
|a_i|/||a||_1, or by the deterministic argmax choice.  The unitary
convention is U = e^{+i a_i P_i dt}; the matching b-vector sign is
b_j = +c^{-1/2} Im<H P_j>, pinned by the one-qubit descent test.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, SingularSystemError
from .paulis import DEFAULT_ORACLE_CAP, PauliSum
from .pool import OperatorPool
from .state import (
    CompiledStrings,
    CompiledSum,
    StateVector,
    apply_pauli_rotation,
    exact_ite_step,
    expectation_sum,
    from_bitstring,
)

A_COEFF_EPS = 1e-14          # rotations below this angle coefficient are skipped
L1_STOP = 1e-8               # fixed-point stop on ||a||_1
ENERGY_STOP = 1e-9           # energy-plateau stop window tolerance
ENERGY_STOP_WINDOW = 20
C_FLOOR_EXACT = 1e-6

METHODS = ("full_qite", "drift_single_path", "drift_channel", "deterministic", "exact_ite")


@dataclass
class LinearSystem:
    """S a = b data plus SVD diagnostics (filled by solve_truncated)."""

    s_matrix: np.ndarray
    b_vector: np.ndarray
    c: float
    singular_values: np.ndarray | None = None
    kappa: float | None = None
    n_truncated: int | None = None
    c_clamped: bool = False


@dataclass
class QiteConfig:
    dt: float
    n_steps: int
    method: str = "full_qite"
    truncation_threshold: float = 0.05
    n_paths: int = 1
    seed: int = 0
    shot_mode: str = "exact"          # "exact" | "sampled"
    e_shift: float = 0.0
    c_mode: str = "first_order"       # "first_order" | "exact"
    oracle_cap: int = DEFAULT_ORACLE_CAP
    epsilon: float = 0.01             # sampled-mode target precision for a
    gamma: int = 0                    # cross-step measurement reduction ratio; 0 = off
    tracker_shots: int | None = None  # None = exact tracker estimates

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError("dt must be positive")
        if self.n_steps < 0:
            raise ConfigurationError("n_steps must be nonnegative")
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}")
        if self.shot_mode not in ("exact", "sampled"):
            raise ConfigurationError(f"unknown shot_mode {self.shot_mode!r}")
        if self.c_mode not in ("first_order", "exact"):
            raise ConfigurationError(f"unknown c_mode {self.c_mode!r}")
        if self.method == "drift_channel" and self.n_paths < 1:
            raise ConfigurationError("drift_channel needs n_paths >= 1")
        if self.gamma < 0:
            raise ConfigurationError("gamma must be >= 0")
        if self.gamma and self.method not in ("drift_single_path", "deterministic"):
            raise ConfigurationError(
                "measurement reduction applies to single-Pauli step methods only"
            )


@dataclass
class TrajectoryRecord:
    step: int
    time: float
    energy: float
    chosen_pauli: str
    angle: float
    a_l1_norm: float
    c: float
    kappa: float
    n_truncated: int


@dataclass
class TrajectoryResult:
    records: list[TrajectoryRecord]
    status: str                        # "completed" | "converged" | "stalled"
    initial_energy: float
    paths: list[list[TrajectoryRecord]] | None = None
    path_statuses: list[str] | None = None
    mean_energy: np.ndarray | None = None
    std_energy: np.ndarray | None = None
    tracker_records: list[tuple[int, float, float, int]] = field(default_factory=list)
    final_state: StateVector | None = None

    @property
    def final_energy(self) -> float:
        return self.records[-1].energy if self.records else self.initial_energy


class _Workspace:
    """Per-trajectory compiled kernels for the hot linear-system build."""

    def __init__(self, pool: OperatorPool, h: PauliSum):
        self.pool = pool
        self.constant = h.constant
        self.pool_compiled = CompiledStrings(list(pool.paulis), pool.n_qubits)
        self.h_terms = CompiledSum(h, include_constant=False)

    def h_terms_apply(self, amps: np.ndarray) -> np.ndarray:
        """(H - constant) @ amps; the identity offset never enters S or b."""
        return self.h_terms.apply(amps)

    def energy(self, state: StateVector) -> float:
        return float(
            np.vdot(state.amps, self.h_terms_apply(state.amps)).real + self.constant
        )


def _exact_c(state: StateVector, workspace: _Workspace, dt: float, e_shift: float) -> float:
    """<psi| e^{-2 (H_terms - e_shift) dt} |psi> by Taylor series."""
    tau = 2.0 * dt
    acc = state.amps.copy()
    term = state.amps.copy()
    for k in range(1, 200):
        term = (-tau / k) * (workspace.h_terms_apply(term) - e_shift * term)
        acc += term
        if np.linalg.norm(term) <= 1e-13 * np.linalg.norm(acc):
            break
    return float(np.vdot(state.amps, acc).real)


def build_linear_system(
    state: StateVector,
    pool: OperatorPool,
    h: PauliSum,
    dt: float,
    *,
    e_shift: float = 0.0,
    c_mode: str = "first_order",
    workspace: _Workspace | None = None,
) -> LinearSystem:
    """Assemble S_ij = Re<P_i P_j>, b_j = c^{-1/2} Im<H P_j>, and c.

    Exploits S symmetry through one stacked kernel evaluation; the
    Hamiltonian identity offset is excluded throughout (it only adds a
    global phase) and e_shift recenters the first-order c.
    """
    ws = workspace or _Workspace(pool, h)
    v = ws.pool_compiled.apply_all(state.amps)
    vr, vi = np.ascontiguousarray(v.real), np.ascontiguousarray(v.imag)
    s = vr @ vr.T + vi @ vi.T
    s = 0.5 * (s + s.T)
    np.fill_diagonal(s, 1.0)

    w = ws.h_terms_apply(state.amps)
    # Im<H psi | P_j psi> elementwise over the stacked rows
    b_bar = vi @ w.real - vr @ w.imag

    energy_terms = float(np.vdot(state.amps, w).real)
    c_clamped = False
    if c_mode == "exact":
        c = _exact_c(state, ws, dt, e_shift)
    else:
        c = 1.0 - 2.0 * dt * (energy_terms - e_shift)
    if c < C_FLOOR_EXACT:
        c = C_FLOOR_EXACT
        c_clamped = True

    b = b_bar / np.sqrt(c)
    return LinearSystem(s_matrix=s, b_vector=b, c=c, c_clamped=c_clamped)


def solve_truncated(sys: LinearSystem, threshold: float) -> np.ndarray:
    """Pseudo-inverse solve keeping singular values above the threshold.

    S is symmetric positive semidefinite (a Gram matrix), so its SVD is the
    eigendecomposition up to signs; eigh is used because it cannot fail to
    converge on the noisy near-singular matrices deep truncation produces.
    Inversion is additionally floored at nu * eps * sigma_max (the standard
    pseudo-inverse rcond): values below fp64 assembly noise, including the
    spurious negative eigenvalues of the Gram matrix, are never inverted no
    matter how small the requested threshold.
    """
    if threshold < 0:
        raise ConfigurationError("truncation threshold must be >= 0")
    eigvals, eigvecs = np.linalg.eigh(sys.s_matrix)
    sys.singular_values = np.sort(np.abs(eigvals))[::-1]  # descending
    smin, smax = sys.singular_values[-1], sys.singular_values[0]
    sys.kappa = float(smax / smin) if smin > 0 else float("inf")
    rcond_floor = len(eigvals) * np.finfo(float).eps * smax
    keep = np.abs(eigvals) > max(threshold, rcond_floor)
    sys.n_truncated = int(len(eigvals) - keep.sum())
    if not keep.any():
        raise SingularSystemError(
            f"all {len(eigvals)} singular values at or below threshold {threshold}"
        )
    q = eigvecs[:, keep]
    a = q @ ((q.T @ sys.b_vector) / eigvals[keep])
    return a


def step_full_qite(state: StateVector, a: np.ndarray, pool: OperatorPool, dt: float) -> StateVector:
    """Apply the first-order product of all pool rotations in pool order."""
    if len(a) != len(pool):
        raise ConfigurationError("coefficient vector length != pool size")
    for ai, p in zip(a, pool.paulis):
        if abs(ai) >= A_COEFF_EPS:
            state = apply_pauli_rotation(state, p, float(ai) * dt)
    return state


def _drift_angle(a: np.ndarray, index: int, dt: float) -> float:
    l1 = float(np.abs(a).sum())
    return float(np.sign(a[index])) * l1 * dt


def step_drift(
    state: StateVector, a: np.ndarray, pool: OperatorPool, dt: float, rng: np.random.Generator
) -> tuple[StateVector, int]:
    """One rotation about P_i drawn with probability |a_i| / ||a||_1."""
    l1 = float(np.abs(a).sum())
    if l1 <= 0.0:
        raise ValueError("zero generator norm: drift step undefined at a fixed point")
    probs = np.abs(a) / l1
    index = int(rng.choice(len(a), p=probs))
    return apply_pauli_rotation(state, pool.paulis[index], _drift_angle(a, index, dt)), index


def step_deterministic(
    state: StateVector, a: np.ndarray, pool: OperatorPool, dt: float
) -> tuple[StateVector, int]:
    """Largest-|a_i| rotation; ties resolve to the lowest pool index."""
    l1 = float(np.abs(a).sum())
    if l1 <= 0.0:
        raise ValueError("zero generator norm: deterministic step undefined at a fixed point")
    index = int(np.argmax(np.abs(a)))
    return apply_pauli_rotation(state, pool.paulis[index], _drift_angle(a, index, dt)), index


def _run_exact_ite(h, reference, config) -> TrajectoryResult:
    state = from_bitstring(reference)
    e0 = expectation_sum(state, h)
    records = []
    energies = [e0]
    status = "completed"
    for k in range(1, config.n_steps + 1):
        state = exact_ite_step(state, h, config.dt, oracle_cap=config.oracle_cap)
        energy = expectation_sum(state, h)  # small-n oracle path, plain apply is fine
        records.append(
            TrajectoryRecord(
                step=k, time=k * config.dt, energy=energy, chosen_pauli="exact",
                angle=float("nan"), a_l1_norm=0.0, c=float("nan"),
                kappa=float("nan"), n_truncated=0,
            )
        )
        energies.append(energy)
        if _plateaued(energies):
            status = "converged"
            break
    return TrajectoryResult(records=records, status=status, initial_energy=e0, final_state=state)


def _plateaued(energies: list[float]) -> bool:
    if len(energies) < ENERGY_STOP_WINDOW + 1:
        return False
    window = energies[-(ENERGY_STOP_WINDOW + 1):]
    return max(window) - min(window) < ENERGY_STOP


def _run_single_path(h, pool, reference, config, path_index):
    """One seeded path; returns (records, status, e0, tracker_rows, state)."""
    from . import measurement as meas

    rng = np.random.default_rng([config.seed, path_index])
    state = from_bitstring(reference)
    ws = _Workspace(pool, h)
    e0 = ws.energy(state)
    records: list[TrajectoryRecord] = []
    tracker_rows: list[tuple[int, float, float, int]] = []
    tracker = None
    if config.gamma:
        tracker = meas.ReducedObservableTracker(observable=h, gamma=config.gamma)
    energies = [e0]
    status = "completed"

    for k in range(1, config.n_steps + 1):
        if config.shot_mode == "sampled":
            sys = meas.sampled_linear_system(
                state, pool, h, config.dt, rng,
                epsilon=config.epsilon, e_shift=config.e_shift, workspace=ws,
            )
        else:
            sys = build_linear_system(
                state, pool, h, config.dt,
                e_shift=config.e_shift, c_mode=config.c_mode, workspace=ws,
            )
        try:
            a = solve_truncated(sys, config.truncation_threshold)
        except SingularSystemError:
            status = "stalled"
            break
        l1 = float(np.abs(a).sum())
        if l1 < L1_STOP:
            status = "converged"
            break

        prev_state = state
        idx = None
        if config.method == "full_qite":
            state = step_full_qite(state, a, pool, config.dt)
            chosen, angle = "all", float("nan")
        elif config.method == "deterministic":
            state, idx = step_deterministic(state, a, pool, config.dt)
            chosen, angle = pool.paulis[idx].to_label(), _drift_angle(a, idx, config.dt)
        else:
            state, idx = step_drift(state, a, pool, config.dt, rng)
            chosen, angle = pool.paulis[idx].to_label(), _drift_angle(a, idx, config.dt)

        energy = ws.energy(state)
        records.append(
            TrajectoryRecord(
                step=k, time=k * config.dt, energy=energy, chosen_pauli=chosen,
                angle=angle, a_l1_norm=l1, c=sys.c, kappa=sys.kappa,
                n_truncated=sys.n_truncated,
            )
        )
        if tracker is not None and idx is not None:
            # the step applied exp(+i angle P_k) = exp(-i c_k P_k dt)
            c_k = -angle / config.dt
            tracker, estimate = meas.tracker_update(
                tracker, prev_state, state, pool.paulis[idx], c_k, config.dt,
                shots=config.tracker_shots, rng=rng,
            )
            tracker_rows.append((k, estimate, energy, config.gamma))
        energies.append(energy)
        if _plateaued(energies):
            status = "converged"
            break
    return records, status, e0, tracker_rows, state


def run_trajectory(
    h: PauliSum, pool: OperatorPool | None, reference: str, config: QiteConfig
) -> TrajectoryResult:
    """Run build -> solve -> step for K steps or until early stop.

    drift_channel runs n_paths independent seeded paths and reports
    per-step mean/std energy (early-stopped paths hold their last energy).
    """
    if config.method == "exact_ite":
        return _run_exact_ite(h, reference, config)
    if pool is None or len(pool) == 0:
        raise ConfigurationError("pool required for unitary methods")
    if h.n_qubits != pool.n_qubits or len(reference) != h.n_qubits:
        raise ConfigurationError("inconsistent qubit counts across inputs")

    if config.method != "drift_channel":
        records, status, e0, tracker_rows, state = _run_single_path(h, pool, reference, config, 0)
        return TrajectoryResult(
            records=records, status=status, initial_energy=e0,
            tracker_records=tracker_rows, final_state=state,
        )

    paths = []
    statuses = []
    e0 = None
    first_state = None
    for p in range(config.n_paths):
        single = replace(config, method="drift_single_path")
        records, status, e0, _, state = _run_single_path(h, pool, reference, single, p)
        if first_state is None:
            first_state = state
        paths.append(records)
        statuses.append(status)
    max_len = max((len(p) for p in paths), default=0)
    if max_len:
        grid = np.empty((len(paths), max_len))
        for i, recs in enumerate(paths):
            energies = [r.energy for r in recs]
            if not energies:
                energies = [e0]
            pad = energies + [energies[-1]] * (max_len - len(energies))
            grid[i] = pad
        mean = grid.mean(axis=0)
        std = grid.std(axis=0)
    else:
        mean = np.array([])
        std = np.array([])
    return TrajectoryResult(
        records=paths[0] if paths else [],
        status="completed" if all(s != "stalled" for s in statuses) else "stalled",
        initial_energy=e0,
        paths=paths,
        path_statuses=statuses,
        mean_energy=mean,
        std_energy=std,
        final_state=first_state,
    )
