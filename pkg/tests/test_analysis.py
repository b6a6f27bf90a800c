"""Spectral diagnostics, correlation matrix, sensitivity, sweeps, channel gap."""

import numpy as np
import pytest

from driftqite.analysis import (
    correlation_matrix,
    drift_channel_discrepancy,
    sensitivity_probe,
    spectrum_at_step,
    truncation_sweep,
)
from driftqite.engine import LinearSystem, QiteConfig, build_linear_system, run_trajectory
from driftqite.paulis import PauliString
from driftqite.pool import OperatorPool, pool_for
from driftqite.state import StateVector, expectation, from_bitstring


def system_stub(s, b=None):
    if b is None:
        b = np.zeros(s.shape[0])
    return LinearSystem(s_matrix=s, b_vector=b, c=1.0)


class TestSpectrum:
    def test_identity(self):
        rep = spectrum_at_step(system_stub(np.eye(5)), step=3, threshold=0.05)
        np.testing.assert_allclose(rep.singular_values, 1.0)
        assert rep.kappa == 1.0
        assert rep.n_above_threshold == 5
        assert list(rep.singular_values) == sorted(rep.singular_values)

    def test_rank_one_perturbed_identity_matches_dense(self):
        rng = np.random.default_rng(0)
        v = rng.normal(size=6)
        s = np.eye(6) + 0.5 * np.outer(v, v)
        rep = spectrum_at_step(system_stub(s), step=0, threshold=0.05)
        want = np.linalg.svd(s, compute_uv=False)
        np.testing.assert_allclose(rep.singular_values, np.sort(want), atol=1e-10)
        assert rep.kappa == pytest.approx(want[0] / want[-1], rel=1e-10)

    def test_svd_reconstructs_s(self, h4_doc):
        """Frobenius reconstruction of a real S matrix from its SVD."""
        h = h4_doc.hamiltonian()
        pool = pool_for(h4_doc)
        state = from_bitstring(h4_doc.reference_state)
        sys = build_linear_system(state, pool, h, 0.02)
        u, svals, vt = np.linalg.svd(sys.s_matrix)
        recon = (u * svals) @ vt
        assert np.linalg.norm(recon - sys.s_matrix) < 1e-10


class TestCorrelation:
    def test_product_state_disjoint_supports(self):
        pool = OperatorPool(4, (
            PauliString.from_label("Z0", 4),
            PauliString.from_label("Z3", 4),
        ), "file")
        state = from_bitstring("0101")
        rep = correlation_matrix(state, pool)
        assert rep.s_prime[0, 1] == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_is_one_minus_mean_squared(self):
        pool = OperatorPool(2, (
            PauliString.from_label("Z0", 2),
            PauliString.from_label("X0", 2),
        ), "file")
        amps = np.array([np.cos(0.3), 0.0, np.sin(0.3), 0.0], dtype=complex)
        state = StateVector(2, amps)
        rep = correlation_matrix(state, pool)
        for i, p in enumerate(pool.paulis):
            mean = float(expectation(state, p).real)
            assert rep.s_prime[i, i] == pytest.approx(1.0 - mean ** 2, abs=1e-12)
            assert 0.0 <= rep.s_prime[i, i] <= 1.0

    def test_ghz_connected_correlation(self):
        """GHZ offers long-range ZZ correlations: S' = 1 - <Z0><Z3> terms."""
        amps = np.zeros(16, dtype=complex)
        amps[0] = amps[15] = 1 / np.sqrt(2)
        state = StateVector(4, amps)
        pool = OperatorPool(4, (
            PauliString.from_label("Z0", 4),
            PauliString.from_label("Z3", 4),
        ), "file")
        rep = correlation_matrix(state, pool)
        # <Z0 Z3> = 1, <Z0> = <Z3> = 0
        assert rep.s_prime[0, 1] == pytest.approx(1.0, abs=1e-12)
        assert rep.distances[0, 1] == 3

    def test_rank_one_identity(self, h4_doc):
        """S' equals S minus the rank-1 outer product of the means."""
        h = h4_doc.hamiltonian()
        pool = pool_for(h4_doc)
        from driftqite.engine import QiteConfig, run_trajectory

        res = run_trajectory(h, pool, h4_doc.reference_state,
                             QiteConfig(dt=0.05, n_steps=30, method="full_qite"))
        state = res.final_state
        rep = correlation_matrix(state, pool)
        sys = build_linear_system(state, pool, h, 0.05)
        means = np.array([float(expectation(state, p).real) for p in pool.paulis])
        np.testing.assert_allclose(
            rep.s_prime + np.outer(means, means), sys.s_matrix, atol=1e-10
        )

    def test_fit_skipped_when_all_overlap(self):
        pool = OperatorPool(2, (
            PauliString.from_label("Z0", 2),
            PauliString.from_label("X0", 2),
        ), "file")
        state = from_bitstring("00")
        rep = correlation_matrix(state, pool)
        assert not rep.fit_ok and rep.xi is None

    def test_fit_runs_on_local_pool(self, h4_doc):
        """Single-site probes on a correlated state give a real decay fit."""
        h = h4_doc.hamiltonian()
        uccsd = pool_for(h4_doc)
        res = run_trajectory(h, uccsd, h4_doc.reference_state,
                             QiteConfig(dt=0.05, n_steps=60, method="full_qite"))
        probes = OperatorPool(8, tuple(
            PauliString.from_label(f"Z{q}", 8) for q in range(8)
        ), "file")
        rep = correlation_matrix(res.final_state, probes)
        assert rep.fit_ok
        assert rep.alpha > 0 and rep.xi > 0

    def test_fit_skipped_on_single_distance(self, h4_doc):
        """JW excitation strings overlap or sit at one separation: no fit."""
        h = h4_doc.hamiltonian()
        pool = pool_for(h4_doc)
        res = run_trajectory(h, pool, h4_doc.reference_state,
                             QiteConfig(dt=0.05, n_steps=30, method="full_qite"))
        rep = correlation_matrix(res.final_state, pool)
        assert not rep.fit_ok


class TestSensitivity:
    def test_identity_ratio_is_one(self):
        rng = np.random.default_rng(0)
        sys = system_stub(np.eye(4), np.array([1.0, 0.5, -0.2, 0.1]))
        rep = sensitivity_probe(sys, 1e-6, 1e-6, 20, rng)
        assert rep.kappa == 1.0
        assert rep.max_ratio == pytest.approx(1.0, abs=0.2)

    def test_adversarial_reaches_kappa(self):
        rng = np.random.default_rng(1)
        sys = system_stub(np.diag([1.0, 0.01]), np.array([1.0, 0.0]))
        rep = sensitivity_probe(sys, 0.0, 1e-8, 5, rng, adversarial=True)
        assert rep.kappa == pytest.approx(100.0)
        assert rep.max_ratio == pytest.approx(100.0, rel=0.05)

    def test_bound_holds_randomized(self, h2_doc):
        h = h2_doc.hamiltonian()
        pool = pool_for(h2_doc)
        state = from_bitstring(h2_doc.reference_state)
        sys = build_linear_system(state, pool, h, 0.01)
        # restrict to the numerically clean subblock: use identity + small noise
        rng = np.random.default_rng(2)
        s = np.eye(4) + 0.1 * np.diag([0.0, 0.1, 0.2, 0.3])
        probe = system_stub(s, rng.normal(size=4))
        rep = sensitivity_probe(probe, 1e-7, 1e-7, 50, rng)
        assert rep.max_ratio <= rep.kappa * 1.2

    def test_zero_perturbation(self):
        sys = system_stub(np.eye(3), np.ones(3))
        rep = sensitivity_probe(sys, 0.0, 0.0, 10, np.random.default_rng(0))
        assert rep.max_ratio == 0.0


class TestTruncationSweep:
    def test_monotone_and_termination(self, h4_doc):
        h = h4_doc.hamiltonian()
        pool = pool_for(h4_doc)
        cfg = QiteConfig(dt=0.05, n_steps=120, method="full_qite")
        pts = truncation_sweep(h, pool, h4_doc.reference_state,
                               [0.05, 1e-3, 1e-8], cfg)
        errs = [abs(p.error_vs_ed) for p in pts]
        assert errs[2] <= errs[0] + 1e-4
        # a threshold above sigma_max truncates everything: stalled run
        big = truncation_sweep(h, pool, h4_doc.reference_state, [10.0], cfg)
        assert big[0].status == "stalled"

    def test_requires_sorted(self, h4_doc):
        cfg = QiteConfig(dt=0.05, n_steps=10, method="full_qite")
        with pytest.raises(ValueError):
            truncation_sweep(h4_doc.hamiltonian(), pool_for(h4_doc),
                             h4_doc.reference_state, [1e-6, 0.05], cfg)


class TestChannelDiscrepancy:
    def test_zero_generator(self, h2_doc):
        pool = pool_for(h2_doc)
        state = from_bitstring(h2_doc.reference_state)
        assert drift_channel_discrepancy(state, np.zeros(len(pool)), pool, 0.05) == 0.0

    def test_second_order_slope(self, h2_doc):
        """Spectral-norm channel gap scales as (||a||_1 dt)^2: slope 2 +/- 0.2.

        Evaluated at a generic mid-trajectory state; at the symmetric
        reference determinant the channel coincides with the unitary exactly.
        """
        from driftqite.engine import solve_truncated
        from driftqite.state import apply_pauli_rotation

        h = h2_doc.hamiltonian()
        pool = pool_for(h2_doc)
        res = run_trajectory(h, pool, h2_doc.reference_state,
                             QiteConfig(dt=0.05, n_steps=5, method="full_qite",
                                        truncation_threshold=1e-10))
        state = apply_pauli_rotation(res.final_state, pool.paulis[0], 0.3)
        sys = build_linear_system(state, pool, h, 0.01)
        a = solve_truncated(sys, 1e-10)
        l1 = np.abs(a).sum()
        dts = (0.04, 0.02, 0.01, 0.005)
        errs = [drift_channel_discrepancy(state, a, pool, dt) for dt in dts]
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.2)
        for err, dt in zip(errs, dts):
            assert err <= (l1 * dt) ** 2 * 1.05
