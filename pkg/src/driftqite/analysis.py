"""Spectral and sensitivity diagnostics for the linear systems.

Covers singular-value spectra and condition numbers, the connected
correlation matrix with its power-law-decay fit, perturbation probes of
the solve, truncation sweeps, and the dense first-order check of the
drifted channel against the ideal unitary.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .engine import LinearSystem, QiteConfig, run_trajectory
from .paulis import DEFAULT_ORACLE_CAP, PauliSum, to_dense
from .pool import OperatorPool
from .state import CompiledStrings, StateVector, exact_diagonalize


@dataclass
class SpectrumReport:
    step: int
    singular_values: np.ndarray  # ascending
    kappa: float
    threshold: float
    n_above_threshold: int


@dataclass
class CorrelationReport:
    s_prime: np.ndarray
    distances: np.ndarray
    alpha: float | None
    xi: float | None
    fit_ok: bool


@dataclass
class SensitivityReport:
    kappa: float
    max_ratio: float
    ratios: np.ndarray


@dataclass
class SweepPoint:
    threshold: float
    final_energy: float
    error_vs_ed: float
    status: str


def spectrum_at_step(sys: LinearSystem, step: int, threshold: float) -> SpectrumReport:
    """Full SVD of the step's S matrix, independent of the truncated solve."""
    svals = np.linalg.svd(sys.s_matrix, compute_uv=False)
    ascending = np.sort(svals)
    kappa = float(ascending[-1] / ascending[0]) if ascending[0] > 0 else float("inf")
    return SpectrumReport(
        step=step,
        singular_values=ascending,
        kappa=kappa,
        threshold=threshold,
        n_above_threshold=int(np.sum(ascending > threshold)),
    )


def _support_distance(p, q) -> int:
    sp, sq = p.support(), q.support()
    if set(sp) & set(sq):
        return 0
    return min(abs(a - b) for a in sp for b in sq)


def correlation_matrix(state: StateVector, pool: OperatorPool) -> CorrelationReport:
    """S'_ij = Re(<P_i P_j> - <P_i><P_j>) with a qubit-chain distance fit.

    The fit regresses log|S'| on log(1 + d) over pairs with d >= 1 and
    |S'| > 1e-8, yielding the prefactor and correlation length of the
    power-law bound; it is skipped (flagged) when every pair overlaps.
    """
    comp = CompiledStrings(list(pool.paulis), pool.n_qubits)
    v = comp.apply_all(state.amps)
    vr, vi = v.real, v.imag
    s = vr @ vr.T + vi @ vi.T
    s = 0.5 * (s + s.T)
    np.fill_diagonal(s, 1.0)
    means = np.real(v @ np.conj(state.amps))
    s_prime = s - np.outer(means, means)

    nu = len(pool)
    d = np.zeros((nu, nu), dtype=int)
    for i in range(nu):
        for j in range(i + 1, nu):
            d[i, j] = d[j, i] = _support_distance(pool.paulis[i], pool.paulis[j])

    mask = (d >= 1) & (np.abs(s_prime) > 1e-8)
    iu = np.triu_indices(nu, k=1)
    sel = mask[iu]
    # a decay length needs at least two distinct separations to regress on
    if not np.any(sel) or len(set(d[iu][sel].tolist())) < 2:
        return CorrelationReport(s_prime=s_prime, distances=d, alpha=None, xi=None, fit_ok=False)
    xs = np.log1p(d[iu][sel].astype(float))
    ys = np.log(np.abs(s_prime[iu][sel]))
    slope, intercept = np.polyfit(xs, ys, 1)
    xi = float("inf") if slope >= 0 else float(-1.0 / slope)
    return CorrelationReport(
        s_prime=s_prime, distances=d, alpha=float(np.exp(intercept)), xi=xi, fit_ok=True
    )


def sensitivity_probe(
    sys: LinearSystem,
    delta_s: float,
    delta_b: float,
    n_trials: int,
    rng: np.random.Generator,
    adversarial: bool = False,
) -> SensitivityReport:
    """Observed relative error of a under relative perturbations of S and b.

    Reports max delta(a) / (delta(S) + delta(b)) next to kappa(S); the
    first-order bound is ratio <= kappa.  The adversarial mode aligns the
    b perturbation with the smallest singular direction.
    """
    if delta_s < 0 or delta_b < 0:
        raise ValueError("perturbations must be nonnegative")
    s, b = sys.s_matrix, sys.b_vector
    u, svals, vt = np.linalg.svd(s)
    kappa = float(svals[0] / svals[-1]) if svals[-1] > 0 else float("inf")
    if delta_s + delta_b == 0:
        # no perturbation: the solution error is exactly zero
        return SensitivityReport(kappa=kappa, max_ratio=0.0, ratios=np.zeros(n_trials))
    a0 = np.linalg.lstsq(s, b, rcond=None)[0]
    norm_a0 = np.linalg.norm(a0)
    norm_s = svals[0]
    norm_b = np.linalg.norm(b)
    ratios = []
    for _ in range(n_trials):
        if adversarial:
            be_dir = u[:, -1]
            ge = np.outer(u[:, -1], vt[-1])
            ge = 0.5 * (ge + ge.T)
        else:
            be_dir = rng.normal(size=b.shape)
            be_dir /= np.linalg.norm(be_dir)
            ge = rng.normal(size=s.shape)
            ge = 0.5 * (ge + ge.T)
        ge_norm = np.linalg.norm(ge, 2)
        s_pert = s + (delta_s * norm_s / ge_norm) * ge if delta_s else s
        b_pert = b + (delta_b * norm_b) * be_dir if delta_b else b
        a_pert = np.linalg.lstsq(s_pert, b_pert, rcond=None)[0]
        rel = np.linalg.norm(a_pert - a0) / norm_a0
        ratios.append(rel / (delta_s + delta_b))
    ratios = np.asarray(ratios)
    return SensitivityReport(kappa=kappa, max_ratio=float(ratios.max()), ratios=ratios)


def truncation_sweep(
    h: PauliSum,
    pool: OperatorPool,
    reference: str,
    thresholds,
    config: QiteConfig,
    ed_energy: float | None = None,
) -> list[SweepPoint]:
    """Independent full-trajectory runs per threshold; thresholds sorted in."""
    thresholds = list(thresholds)
    if sorted(thresholds, reverse=True) != thresholds:
        raise ValueError("thresholds must be sorted descending")
    if ed_energy is None:
        ed_energy, _ = exact_diagonalize(h, oracle_cap=config.oracle_cap)
    points = []
    for t in thresholds:
        result = run_trajectory(h, pool, reference, replace(config, truncation_threshold=t))
        points.append(
            SweepPoint(
                threshold=t,
                final_energy=result.final_energy,
                error_vs_ed=result.final_energy - ed_energy,
                status=result.status,
            )
        )
    return points


def drift_channel_discrepancy(
    state: StateVector,
    a: np.ndarray,
    pool: OperatorPool,
    dt: float,
    oracle_cap: int = DEFAULT_ORACLE_CAP,
) -> float:
    """Spectral-norm gap between the drifted channel and the ideal unitary.

    Dense evaluation of sum_i p_i U_i rho U_i^dag against U rho U^dag on
    rho = |psi><psi|; first order in dt the gap scales as (||a||_1 dt)^2.
    """
    l1 = float(np.abs(a).sum())
    if l1 <= 0:
        return 0.0
    rho = np.outer(state.amps, state.amps.conj())
    generator = np.zeros_like(rho)
    for ai, p in zip(a, pool.paulis):
        generator += ai * to_dense(p, oracle_cap)
    ideal = expm(1j * dt * generator)
    ideal_rho = ideal @ rho @ ideal.conj().T
    mixed = np.zeros_like(rho)
    for ai, p in zip(a, pool.paulis):
        prob = abs(ai) / l1
        if prob == 0.0:
            continue
        u_i = expm(1j * np.sign(ai) * l1 * dt * to_dense(p, oracle_cap))
        mixed += prob * (u_i @ rho @ u_i.conj().T)
    return float(np.linalg.norm(mixed - ideal_rho, 2))

