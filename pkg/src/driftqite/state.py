"""Dense statevector engine: Pauli rotations, expectations, exact-ITE oracle.

Amplitude indexing is little-endian: qubit q is bit q of the basis-state
index, matching the mask convention in :mod:`driftqite.paulis`.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, OracleSizeError, SeriesConvergenceError
from .paulis import DEFAULT_ORACLE_CAP, PauliString, PauliSum, to_dense

NORM_TOL = 1e-10
_RENORM_INTERVAL = 1000

_IDX_CACHE: dict[int, np.ndarray] = {}


def _indices(n_qubits: int) -> np.ndarray:
    idx = _IDX_CACHE.get(n_qubits)
    if idx is None:
        idx = np.arange(1 << n_qubits, dtype=np.int64)
        _IDX_CACHE[n_qubits] = idx
    return idx


class StateVector:
    """2^n complex amplitudes with unit norm; owned by a single trajectory."""

    __slots__ = ("n_qubits", "amps", "_rotations")

    def __init__(self, n_qubits: int, amps: np.ndarray, _rotations: int = 0):
        if amps.shape != (1 << n_qubits,):
            raise DimensionError("amplitude length is not 2^n_qubits")
        self.n_qubits = n_qubits
        self.amps = np.asarray(amps, dtype=complex)
        self._rotations = _rotations

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy(), self._rotations)


def from_bitstring(occupation: str) -> StateVector:
    """Computational basis state; character q of the string is qubit q."""
    n = len(occupation)
    if n == 0 or set(occupation) - {"0", "1"}:
        raise ValueError(f"occupation must be a nonempty bitstring, got {occupation!r}")
    index = 0
    for q, ch in enumerate(occupation):
        if ch == "1":
            index |= 1 << q
    amps = np.zeros(1 << n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def apply_pauli(amps: np.ndarray, p: PauliString) -> np.ndarray:
    """Return P @ amps using the permutation-with-phase action."""
    idx = _indices(p.n_qubits)
    out = amps[idx ^ p.x_mask] if p.x_mask else amps.copy()
    if p.z_mask:
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & np.int64(p.z_mask)) & 1)
        out = out * signs
    factor = p.apply_phase_factor()
    if factor != 1.0:
        out = out * factor
    return out


def apply_sum(amps: np.ndarray, h: PauliSum) -> np.ndarray:
    """Return H @ amps, identity offset included."""
    out = h.constant * amps if h.constant else np.zeros_like(amps)
    for coeff, string in h.terms:
        out = out + coeff * apply_pauli(amps, string)
    return out


def apply_pauli_rotation(state: StateVector, p: PauliString, theta: float) -> StateVector:
    """Return e^{i theta P} |psi>  =  cos(theta)|psi> + i sin(theta) P|psi>."""
    if p.n_qubits != state.n_qubits:
        raise DimensionError("rotation qubit count mismatch")
    if not p.is_hermitian():
        raise ValueError(f"rotation generator must be Hermitian, got {p}")
    amps = np.cos(theta) * state.amps + 1j * np.sin(theta) * apply_pauli(state.amps, p)
    rotations = state._rotations + 1
    if rotations % _RENORM_INTERVAL == 0:
        # guard against slow norm drift over long trajectories
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > NORM_TOL:
            amps /= nrm
    return StateVector(state.n_qubits, amps, rotations)


def expectation(state: StateVector, p: PauliString) -> complex:
    """<psi|P|psi> including the stored quarter-phase of P."""
    return complex(np.vdot(state.amps, apply_pauli(state.amps, p)))


def expectation_sum(state: StateVector, h: PauliSum) -> float:
    """<psi|H|psi> for a Hermitian Pauli sum; the result is real."""
    val = np.vdot(state.amps, apply_sum(state.amps, h))
    return float(val.real)


def exact_ite_step(
    state: StateVector,
    h: PauliSum,
    dt: float,
    oracle_cap: int = DEFAULT_ORACLE_CAP,
    max_terms: int = 400,
) -> StateVector:
    """Normalized e^{-H dt}|psi> via a shifted Taylor series.

    The series runs on H - <H> (the shift cancels after normalization) and
    stops once the appended term drops below 1e-13 of the accumulated norm.
    """
    if state.n_qubits > oracle_cap:
        raise OracleSizeError(
            f"{state.n_qubits} qubits exceeds dense-oracle cap {oracle_cap}"
        )
    mu = expectation_sum(state, h)
    acc = state.amps.copy()
    term = state.amps.copy()
    for k in range(1, max_terms + 1):
        term = (-dt / k) * (apply_sum(term, h) - mu * term)
        acc += term
        if np.linalg.norm(term) <= 1e-13 * np.linalg.norm(acc):
            break
    else:
        raise SeriesConvergenceError(
            f"imaginary-time Taylor series did not converge in {max_terms} terms"
        )
    acc /= np.linalg.norm(acc)
    return StateVector(state.n_qubits, acc, state._rotations)


def exact_diagonalize(
    h: PauliSum, oracle_cap: int = DEFAULT_ORACLE_CAP
) -> tuple[float, np.ndarray]:
    """(ground energy, full spectrum ascending) of the dense Hamiltonian."""
    m = to_dense(h, oracle_cap)
    eigs = np.linalg.eigvalsh(m)
    return float(eigs[0]), eigs


class CompiledStrings:
    """Precomputed permutation/sign tables for a fixed list of Pauli strings.

    ``apply_all`` returns the stacked matrix [P_0 psi, P_1 psi, ...] in one
    vectorized gather; this is the hot kernel behind S-matrix assembly.
    """

    def __init__(self, strings: list[PauliString], n_qubits: int):
        idx = _indices(n_qubits)
        dim = 1 << n_qubits
        self.n_qubits = n_qubits
        self.perm = np.empty((len(strings), dim), dtype=np.int64)
        self.sign = np.empty((len(strings), dim), dtype=np.int8)
        self.phase = np.empty(len(strings), dtype=complex)
        for j, p in enumerate(strings):
            if p.n_qubits != n_qubits:
                raise DimensionError("pool string qubit count mismatch")
            self.perm[j] = idx ^ p.x_mask
            self.sign[j] = 1 - 2 * (np.bitwise_count(idx & np.int64(p.z_mask)) & 1)
            self.phase[j] = p.apply_phase_factor()

    def __len__(self):
        return self.perm.shape[0]

    def apply_all(self, amps: np.ndarray) -> np.ndarray:
        return self.phase[:, None] * (self.sign * amps[self.perm])

    def apply_weighted(self, amps: np.ndarray, coeffs: np.ndarray, constant: float = 0.0) -> np.ndarray:
        """Return (sum_j coeffs[j] P_j + constant) @ amps."""
        out = np.einsum("j,jb->b", coeffs * self.phase, self.sign * amps[self.perm])
        if constant:
            out += constant * amps
        return out


class CompiledSum:
    """Fixed-coefficient Pauli sum compiled for repeated application.

    Terms sharing an X-mask share one amplitude gather; their phases and
    Z-sign patterns fold into a single precomputed weight vector per
    group.  This is the hot path behind per-step energy and b-vector
    evaluation.
    """

    def __init__(self, h: PauliSum, include_constant: bool = True):
        idx = _indices(h.n_qubits)
        self.n_qubits = h.n_qubits
        self.constant = h.constant if include_constant else 0.0
        groups: dict[int, np.ndarray] = {}
        for coeff, p in h.terms:
            w = coeff * p.apply_phase_factor()
            signs = 1.0 - 2.0 * (np.bitwise_count(idx & np.int64(p.z_mask)) & 1)
            if p.x_mask in groups:
                groups[p.x_mask] = groups[p.x_mask] + w * signs
            else:
                groups[p.x_mask] = w * signs
        self.x_masks = list(groups.keys())
        self.weights = [np.ascontiguousarray(w) for w in groups.values()]
        self._idx = idx

    def apply(self, amps: np.ndarray) -> np.ndarray:
        out = self.constant * amps if self.constant else np.zeros_like(amps)
        for x, w in zip(self.x_masks, self.weights):
            if x:
                out += w * amps[self._idx ^ x]
            else:
                out += w * amps
        return out

    def expectation(self, amps: np.ndarray) -> float:
        return float(np.vdot(amps, self.apply(amps)).real)
