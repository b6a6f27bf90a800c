"""Finite-shot estimation of every measured quantity.

Shot outcomes are simulated as binomial draws from exact expectations
(every measured quantity is an expectation over fresh preparations, so
mid-circuit collapse never enters).  ``n_shots=None`` means the exact
value, used by "exact-shot" experiment modes.

Includes the cross-step observable estimator that replaces full
re-measurement with accumulated commutator corrections, re-anchoring
every gamma-th step, and the shot-allocation formulas that size the
budgets for S, the unnormalized b, the normalization factor c, and a
tracked observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllocationError
from .paulis import PauliString, PauliSum, commutes, multiply
from .pool import OperatorPool
from .state import StateVector, expectation, expectation_sum

C_FLOOR_SAMPLED = 0.1


@dataclass
class ShotPlan:
    """Per-element shot counts for one linear-system build."""

    n_shots_s: int
    n_shots_b: int
    n_shots_c: int
    n_shots_observable: int = 0
    epsilon: float = 0.0


@dataclass
class ReducedObservableTracker:
    """Running estimate of <O> across steps via commutator corrections.

    ``base_estimate`` refreshes and ``correction_sum`` resets to zero on
    every gamma-boundary step; in between, each step adds
    c_k * dt * <i[P_k, O]> evaluated on the pre-step state.
    """

    observable: PauliSum
    gamma: int
    base_estimate: float = 0.0
    correction_sum: float = 0.0
    step_count: int = 0

    @property
    def estimate(self) -> float:
        return self.base_estimate + self.correction_sum


def _binomial_mean(true_value: float, n_shots: int, rng: np.random.Generator) -> float:
    """Mean of n_shots +/-1 outcomes with P(+1) = (1 + value)/2."""
    p_plus = min(1.0, max(0.0, 0.5 * (1.0 + true_value)))
    k = rng.binomial(n_shots, p_plus)
    return (2.0 * k - n_shots) / n_shots


def sample_pauli_expectation(
    state: StateVector, p: PauliString, n_shots: int | None, rng: np.random.Generator
) -> float:
    """Unbiased +/-1 sampling of a Hermitian string; variance (1-<p>^2)/n."""
    base, sign = p.hermitian_base()
    value = float(expectation(state, base).real)
    if n_shots is None:
        return sign * value
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    return sign * _binomial_mean(value, n_shots, rng)


def _imag_product_expectations(state, h: PauliSum, p_j: PauliString) -> np.ndarray:
    """Im<H_l P_j> per Hamiltonian term (zero where the pair commutes)."""
    out = np.zeros(len(h.terms))
    for l, (_, o_l) in enumerate(h.terms):
        if not commutes(o_l, p_j):
            out[l] = float(expectation(state, multiply(o_l, p_j)).imag)
    return out


def l1_sample_hp_imag(
    state: StateVector,
    h: PauliSum,
    p_j: PauliString,
    n_shots: int | None,
    rng: np.random.Generator,
) -> float:
    """Estimate Im<H P_j> by importance-sampling terms with weight |h_l|.

    Each shot draws term l, measures the anti-Hermitian part of H_l P_j
    (contributing 0 when the pair commutes), and rescales by ||h||_1;
    single-shot variance is bounded by ||h||_1 squared.
    """
    l1 = h.l1_norm()
    if l1 == 0.0:
        raise ValueError("Hamiltonian has no non-identity terms to sample")
    coeffs = np.array([c for c, _ in h.terms])
    imags = _imag_product_expectations(state, h, p_j)
    if n_shots is None:
        return float(coeffs @ imags)
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    probs = np.abs(coeffs) / l1
    counts = rng.multinomial(n_shots, probs)
    total = 0.0
    for l, count in enumerate(counts):
        if count == 0:
            continue
        if imags[l] == 0.0 and commutes(h.terms[l][1], p_j):
            continue  # commuting draw contributes an exact 0 outcome
        k = rng.binomial(count, min(1.0, max(0.0, 0.5 * (1.0 + imags[l]))))
        total += np.sign(coeffs[l]) * (2.0 * k - count)
    return l1 * total / n_shots


def estimate_h_l1(
    state: StateVector, h: PauliSum, n_shots: int | None, rng: np.random.Generator
) -> float:
    """l1-sampled estimate of <H> over the non-identity terms."""
    l1 = h.l1_norm()
    if l1 == 0.0:
        return 0.0
    coeffs = np.array([c for c, _ in h.terms])
    values = np.array([float(expectation(state, s).real) for _, s in h.terms])
    if n_shots is None:
        return float(coeffs @ values)
    probs = np.abs(coeffs) / l1
    counts = rng.multinomial(n_shots, probs)
    total = 0.0
    for l, count in enumerate(counts):
        if count == 0:
            continue
        k = rng.binomial(count, min(1.0, max(0.0, 0.5 * (1.0 + values[l]))))
        total += np.sign(coeffs[l]) * (2.0 * k - count)
    return l1 * total / n_shots


def estimate_c(
    state: StateVector,
    h: PauliSum,
    dt: float,
    n_shots: int | None,
    rng: np.random.Generator,
    e_shift: float = 0.0,
    floor: float = C_FLOOR_SAMPLED,
) -> float:
    """First-order normalization c = 1 - 2 dt (<H> - e_shift), floored.

    The floor guards the diverging variance of c^{-1/2} as c -> 0.
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if dt == 0:
        return 1.0
    c = 1.0 - 2.0 * dt * (estimate_h_l1(state, h, n_shots, rng) - e_shift)
    return max(c, floor)


def estimate_observable(
    state: StateVector, obs: PauliSum, n_shots: int | None, rng: np.random.Generator
) -> float:
    """<O> by l1 sampling over terms; the identity offset is added exactly."""
    return estimate_h_l1(state, obs, n_shots, rng) + obs.constant


def commutator_sum(p: PauliString, obs: PauliSum) -> PauliSum:
    """The Hermitian observable i[P, O] as a Pauli sum.

    Commuting terms drop; an anticommuting term contributes
    i[P, h_l O_l] = 2 h_l i^(rho+1) R with P O_l = i^rho R.
    """
    terms = []
    for h_l, o_l in obs.terms:
        if commutes(p, o_l):
            continue
        r = multiply(p, o_l)
        sign = -1.0 if r.phase_exp == 1 else 1.0  # i^(rho+1) for rho in {1, 3}
        base = PauliString(r.n_qubits, r.x_mask, r.z_mask, 0)
        terms.append((2.0 * h_l * sign, base))
    return PauliSum(p.n_qubits, terms)


def commutator_single_shot_variance(
    state: StateVector, p: PauliString, obs: PauliSum
) -> float:
    """Exact per-shot variance of the l1-sampled commutator estimator.

    Every term of i[P, O] is a +/-1 observable under l1 sampling, so
    E[X^2] = ||w||_1^2 with w the commutator weights, and the per-step
    variance entering the budget split is measured, not assumed.
    """
    comm = commutator_sum(p, obs)
    l1 = comm.l1_norm()
    mean = expectation_sum(state, comm)
    return l1 ** 2 - mean ** 2


def allocate_observable_shots(
    k: int, c_inf: float, dt: float, total: int
) -> tuple[int, int]:
    """Split a budget between the anchor and the k correction steps.

    n0 = N/(k c dt + 1) for the anchor and n_s = N c dt/(k c dt + 1) per
    correction; integer rounding sends the remainder to the anchor.
    """
    if total < k + 1:
        raise AllocationError(f"budget {total} cannot cover {k} steps plus the anchor")
    if k == 0:
        return total, 0
    denom = k * c_inf * dt + 1.0
    n_s = max(1, math.floor(total * c_inf * dt / denom))
    n_0 = total - k * n_s
    if n_0 < 1:
        raise AllocationError("budget too small for the anchor after per-step rounding")
    return n_0, n_s


def allocate_linear_system_shots(
    nu: int,
    b_inf: float,
    s_tilde_inv_frobenius: float,
    h_l1: float,
    c_val: float,
    dt: float,
    epsilon: float,
) -> ShotPlan:
    """Per-element budgets that push Var(a) below epsilon^2.

    N_S >= 3 eps^-2 nu^2 ||b||_inf^2 ||Stilde^-1||_F^4,
    N_b >= 3 eps^-2 nu [c]^-1 ||h||_1^2 ||Stilde^-1||_F^2,
    N_c >= 3 eps^-2 dt^2 [c]^-3 ||h||_1^2 ||Stilde^-1||_F^2.
    """
    if epsilon <= 0:
        raise AllocationError("epsilon must be positive")
    if min(nu, b_inf, s_tilde_inv_frobenius, h_l1, c_val, dt) <= 0:
        raise AllocationError("allocation inputs must be positive")
    f2 = s_tilde_inv_frobenius ** 2
    inv_eps2 = epsilon ** -2
    n_s = math.ceil(3.0 * inv_eps2 * nu ** 2 * b_inf ** 2 * f2 ** 2)
    n_b = math.ceil(3.0 * inv_eps2 * nu * h_l1 ** 2 * f2 / c_val)
    n_c = math.ceil(3.0 * inv_eps2 * dt ** 2 * h_l1 ** 2 * f2 / c_val ** 3)
    return ShotPlan(
        n_shots_s=max(1, n_s),
        n_shots_b=max(1, n_b),
        n_shots_c=max(1, n_c),
        epsilon=epsilon,
    )


def tracker_update(
    tracker: ReducedObservableTracker,
    state_before_step: StateVector,
    state_after_step: StateVector,
    p_k: PauliString,
    c_k: float,
    dt: float,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
):
    """Advance the tracker by one step; returns (tracker, current estimate).

    ``c_k`` is the signed coefficient of the applied unitary
    exp(-i c_k dt P_k).  On a gamma boundary the observable is fully
    re-measured on the post-step state (same budget as an initial
    measurement) and the correction sum resets; otherwise the correction
    c_k * dt * <i[P_k, O]> on the pre-step state accumulates.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if tracker.step_count % tracker.gamma == 0:
        tracker.base_estimate = estimate_observable(
            state_after_step, tracker.observable, shots, rng
        )
        tracker.correction_sum = 0.0
    else:
        comm = commutator_sum(p_k, tracker.observable)
        if len(comm.terms):
            value = estimate_observable(state_before_step, comm, shots, rng)
        else:
            value = 0.0
        tracker.correction_sum += c_k * dt * value
    tracker.step_count += 1
    return tracker, tracker.estimate


def shot_experiment(
    state: StateVector,
    h: PauliSum,
    p_j: PauliString,
    dt: float,
    n_shots: int,
    n_trials: int,
    rng: np.random.Generator,
) -> list[tuple]:
    """Repeated-trial rows for the shot-experiment CSV.

    Columns: trial, estimator, n_shots, estimate, exact, abs_error; one row
    per trial for each of the three per-step estimators.
    """
    rows = []
    exact_p = sample_pauli_expectation(state, p_j, None, rng)
    exact_b = l1_sample_hp_imag(state, h, p_j, None, rng)
    exact_c = estimate_c(state, h, dt, None, rng)
    for trial in range(n_trials):
        for name, exact, draw in (
            ("pauli", exact_p, lambda: sample_pauli_expectation(state, p_j, n_shots, rng)),
            ("hp_imag", exact_b, lambda: l1_sample_hp_imag(state, h, p_j, n_shots, rng)),
            ("c", exact_c, lambda: estimate_c(state, h, dt, n_shots, rng)),
        ):
            est = draw()
            rows.append((trial, name, n_shots, est, exact, abs(est - exact)))
    return rows


def _commutation_matrix(pool: OperatorPool) -> np.ndarray:
    """Boolean [i, j] = strings i and j commute, via vectorized mask parity."""
    x = np.array([p.x_mask for p in pool.paulis], dtype=np.int64)
    z = np.array([p.z_mask for p in pool.paulis], dtype=np.int64)
    overlap = np.bitwise_count(x[:, None] & z[None, :]) + np.bitwise_count(
        z[:, None] & x[None, :]
    )
    return overlap % 2 == 0


def sampled_linear_system(
    state: StateVector,
    pool: OperatorPool,
    h: PauliSum,
    dt: float,
    rng: np.random.Generator,
    *,
    epsilon: float = 0.01,
    e_shift: float = 0.0,
    truncation_threshold: float = 0.05,
    workspace=None,
    plan: ShotPlan | None = None,
):
    """Linear system with simulated shot noise on S, b, and c.

    Budgets come from the allocation formulas sized on the exact system
    (the simulator stands in for prior knowledge of the run); anticommuting
    S entries are exact zeros and are never measured.
    """
    from .engine import LinearSystem, build_linear_system, solve_truncated

    exact = build_linear_system(
        state, pool, h, dt, e_shift=e_shift, c_mode="first_order", workspace=workspace
    )
    if plan is None:
        a_exact = solve_truncated(exact, truncation_threshold)
        kept = exact.singular_values[exact.singular_values > truncation_threshold]
        f_norm = float(np.sqrt(np.sum(kept ** -2.0)))
        b_inf = float(np.max(np.abs(exact.b_vector))) or 1e-3
        plan = allocate_linear_system_shots(
            len(pool), b_inf, f_norm, h.l1_norm(), exact.c, dt, epsilon
        )

    nu = len(pool)
    comm = _commutation_matrix(pool)
    s_hat = np.zeros((nu, nu))
    upper = np.triu_indices(nu, k=1)
    true_vals = exact.s_matrix[upper]
    measurable = comm[upper]
    p_plus = np.clip(0.5 * (1.0 + true_vals), 0.0, 1.0)
    draws = rng.binomial(plan.n_shots_s, p_plus)
    noisy = (2.0 * draws - plan.n_shots_s) / plan.n_shots_s
    s_hat[upper] = np.where(measurable, noisy, 0.0)
    s_hat = s_hat + s_hat.T
    np.fill_diagonal(s_hat, 1.0)

    b_bar = np.array(
        [
            l1_sample_hp_imag(state, h, p_j, plan.n_shots_b, rng)
            for p_j in pool.paulis
        ]
    )
    c_hat = estimate_c(state, h, dt, plan.n_shots_c, rng, e_shift=e_shift)
    return LinearSystem(
        s_matrix=s_hat,
        b_vector=b_bar / np.sqrt(c_hat),
        c=c_hat,
        c_clamped=bool(c_hat <= C_FLOOR_SAMPLED),
    )
