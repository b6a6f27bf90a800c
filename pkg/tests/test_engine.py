"""Engine: linear-system assembly, truncated solve, stepping, trajectories."""

import numpy as np
import pytest
from scipy.linalg import expm

from driftqite.engine import (
    QiteConfig,
    build_linear_system,
    run_trajectory,
    solve_truncated,
    step_deterministic,
    step_drift,
    step_full_qite,
)
from driftqite.errors import ConfigurationError, SingularSystemError
from driftqite.paulis import PauliString, PauliSum, multiply, to_dense
from driftqite.pool import OperatorPool, pool_for
from driftqite.state import (
    StateVector,
    exact_diagonalize,
    exact_ite_step,
    expectation,
    expectation_sum,
    from_bitstring,
)


def one_qubit_setup():
    h = PauliSum(1, [(1.0, PauliString.from_label("Z0", 1))])
    pool = OperatorPool(
        1,
        (PauliString.from_label("X0", 1), PauliString.from_label("Y0", 1)),
        "file",
    )
    plus = StateVector(1, np.array([1.0, 1.0]) / np.sqrt(2))
    return h, pool, plus


class TestBuildLinearSystem:
    def test_eigenstate_gives_zero_b(self):
        h = PauliSum(2, [(1.0, PauliString.from_label("Z0", 2)),
                         (0.5, PauliString.from_label("Z1", 2))])
        pool = OperatorPool(2, tuple(
            PauliString.from_label(l, 2) for l in ("X0", "Y0", "X0 Y1", "Y0 X1")
        ), "file")
        state = from_bitstring("10")
        sys = build_linear_system(state, pool, h, 0.05)
        np.testing.assert_allclose(sys.b_vector, 0.0, atol=1e-12)

    def test_one_qubit_descent_example(self):
        """H=Z0 on |+> with pool {X0, Y0}: S = identity and a = (0, -1)."""
        h, pool, plus = one_qubit_setup()
        sys = build_linear_system(plus, pool, h, 0.05)
        np.testing.assert_allclose(sys.s_matrix, np.eye(2), atol=1e-12)
        a = solve_truncated(sys, 1e-12)
        np.testing.assert_allclose(a, [0.0, -1.0], atol=1e-10)
        # the step must strictly lower the energy
        stepped = step_full_qite(plus, a, pool, 0.05)
        assert expectation_sum(stepped, h) < expectation_sum(plus, h) - 1e-4

    def test_matches_elementwise_expectations(self, h2_doc):
        h = h2_doc.hamiltonian()
        pool = pool_for(h2_doc)
        state = from_bitstring(h2_doc.reference_state)
        state = exact_ite_step(state, h, 0.2)  # correlated, non-eigenstate
        sys = build_linear_system(state, pool, h, 0.01)
        for i in (0, 3, 7):
            for j in (1, 5, 11):
                want = expectation(state, multiply(pool.paulis[i], pool.paulis[j])).real
                assert sys.s_matrix[i, j] == pytest.approx(want, abs=1e-12)
        for j in (0, 4, 9):
            hp = sum(
                c * expectation(state, multiply(s, pool.paulis[j]))
                for c, s in h.terms
            )
            want = hp.imag / np.sqrt(sys.c)
            assert sys.b_vector[j] == pytest.approx(want, abs=1e-10)

    def test_diagonal_is_one_and_symmetric(self, h4_doc):
        h = h4_doc.hamiltonian()
        pool = pool_for(h4_doc)
        state = from_bitstring(h4_doc.reference_state)
        sys = build_linear_system(state, pool, h, 0.02)
        np.testing.assert_array_equal(np.diag(sys.s_matrix), 1.0)
        np.testing.assert_allclose(sys.s_matrix, sys.s_matrix.T, atol=1e-12)
        assert np.max(np.abs(sys.s_matrix)) <= 1.0 + 1e-12
        assert sys.c > 0

    def test_c_modes_agree_at_small_dt(self, h2_doc):
        h = h2_doc.hamiltonian()
        pool = pool_for(h2_doc)
        state = from_bitstring(h2_doc.reference_state)
        first = build_linear_system(state, pool, h, 1e-3, c_mode="first_order")
        exact = build_linear_system(state, pool, h, 1e-3, c_mode="exact")
        assert first.c == pytest.approx(exact.c, abs=1e-4)

    def test_c_floor_flagged(self):
        h, pool, _ = one_qubit_setup()
        zero = from_bitstring("0")  # <Z> = +1, large dt drives first-order c negative
        sys = build_linear_system(zero, pool, h, dt=5.0)
        assert sys.c_clamped and sys.c > 0


def LinearSystemStub(s, b):
    from driftqite.engine import LinearSystem

    return LinearSystem(s_matrix=s, b_vector=b, c=1.0)


class TestSolveTruncated:
    def test_identity_system(self):
        b = np.array([0.3, -0.2, 0.9])
        sys = LinearSystemStub(np.eye(3), b)
        a = solve_truncated(sys, 0.5)
        np.testing.assert_allclose(a, b, atol=1e-14)

    def test_forced_truncation(self):
        sys = LinearSystemStub(np.diag([1.0, 1e-6]), np.array([1.0, 1.0]))
        a = solve_truncated(sys, 0.05)
        np.testing.assert_allclose(a, [1.0, 0.0], atol=1e-12)
        assert sys.n_truncated == 1
        assert sys.kappa == pytest.approx(1e6, rel=1e-6)

    def test_random_spd_matches_dense(self):
        rng = np.random.default_rng(4)
        m = rng.normal(size=(8, 8))
        s = m @ m.T + 0.5 * np.eye(8)
        b = rng.normal(size=8)
        sys = LinearSystemStub(s, b)
        a = solve_truncated(sys, 0.0)
        np.testing.assert_allclose(a, np.linalg.solve(s, b), atol=1e-10)

    def test_all_truncated(self):
        sys = LinearSystemStub(np.diag([1e-3, 1e-4]), np.array([1.0, 1.0]))
        with pytest.raises(SingularSystemError):
            solve_truncated(sys, 0.5)

    def test_singular_values_descending(self):
        sys = LinearSystemStub(np.diag([0.5, 2.0, 1.0]), np.zeros(3) + 0.1)
        solve_truncated(sys, 0.0)
        assert list(sys.singular_values) == sorted(sys.singular_values, reverse=True)


class TestSteps:
    def test_full_qite_zero_is_identity(self, h2_doc):
        pool = pool_for(h2_doc)
        state = from_bitstring(h2_doc.reference_state)
        out = step_full_qite(state, np.zeros(len(pool)), pool, 0.1)
        np.testing.assert_allclose(out.amps, state.amps, atol=1e-15)

    def test_full_qite_single_term(self, h2_doc):
        from driftqite.state import apply_pauli_rotation

        pool = pool_for(h2_doc)
        state = from_bitstring(h2_doc.reference_state)
        a = np.zeros(len(pool))
        a[5] = 0.37
        out = step_full_qite(state, a, pool, 0.1)
        want = apply_pauli_rotation(state, pool.paulis[5], 0.037)
        np.testing.assert_allclose(out.amps, want.amps, atol=1e-14)

    def test_commuting_pool_matches_expm(self):
        n = 3
        strings = [PauliString.from_label(l, n) for l in ("Z0", "Z1", "Z0 Z2")]
        pool = OperatorPool(n, tuple(strings), "file")
        rng = np.random.default_rng(11)
        amps = rng.normal(size=8) + 1j * rng.normal(size=8)
        amps /= np.linalg.norm(amps)
        state = StateVector(n, amps)
        a = rng.normal(size=3)
        dt = 0.21
        generator = sum(ai * to_dense(p) for ai, p in zip(a, strings))
        want = expm(1j * dt * generator) @ amps
        got = step_full_qite(state, a, pool, dt)
        np.testing.assert_allclose(got.amps, want, atol=1e-10)

    def test_drift_angle_and_distribution(self):
        h, pool, plus = one_qubit_setup()
        a = np.array([0.3, -0.7])
        counts = {0: 0, 1: 0}
        rng = np.random.default_rng(0)
        for _ in range(4000):
            _, idx = step_drift(plus, a, pool, 0.1, rng)
            counts[idx] += 1
        assert counts[1] / 4000 == pytest.approx(0.7, abs=0.03)

    def test_drift_single_term_is_deterministic(self):
        h, pool, plus = one_qubit_setup()
        a = np.array([0.0, -0.5])
        rng = np.random.default_rng(1)
        out, idx = step_drift(plus, a, pool, 0.1, rng)
        assert idx == 1
        full = step_full_qite(plus, a, pool, 0.1)
        np.testing.assert_allclose(out.amps, full.amps, atol=1e-12)

    def test_deterministic_choice_and_angle(self):
        h, pool, plus = one_qubit_setup()
        out, idx = step_deterministic(plus, np.array([0.3, -0.7]), pool, 0.1)
        assert idx == 1
        # angle = sign(a_1) * ||a||_1 * dt = -1.0 * 0.1
        from driftqite.state import apply_pauli_rotation

        want = apply_pauli_rotation(plus, pool.paulis[1], -0.1)
        np.testing.assert_allclose(out.amps, want.amps, atol=1e-14)

    def test_deterministic_tie_breaks_low(self):
        h, pool, plus = one_qubit_setup()
        _, idx = step_deterministic(plus, np.array([0.5, 0.5]), pool, 0.1)
        assert idx == 0

    def test_zero_norm_raises(self):
        h, pool, plus = one_qubit_setup()
        with pytest.raises(ValueError):
            step_drift(plus, np.zeros(2), pool, 0.1, np.random.default_rng(0))
        with pytest.raises(ValueError):
            step_deterministic(plus, np.zeros(2), pool, 0.1)

    def test_drift_expected_generator_is_unbiased(self):
        """sum_i p_i sign(a_i) ||a||_1 P_i recovers A exactly."""
        rng = np.random.default_rng(7)
        a = rng.normal(size=12)
        l1 = np.abs(a).sum()
        probs = np.abs(a) / l1
        recovered = probs * np.sign(a) * l1
        np.testing.assert_allclose(recovered, a, atol=1e-14)


class TestRunTrajectory:
    def test_fixed_point_from_eigenstate(self):
        h = PauliSum(2, [(1.0, PauliString.from_label("Z0", 2)),
                         (0.5, PauliString.from_label("Z1", 2))])
        pool = OperatorPool(2, tuple(
            PauliString.from_label(l, 2) for l in ("X0 Y1", "Y0 X1")
        ), "file")
        cfg = QiteConfig(dt=0.05, n_steps=50, method="full_qite")
        res = run_trajectory(h, pool, "10", cfg)
        assert res.status == "converged"
        assert res.records == []
        assert res.final_energy == pytest.approx(expectation_sum(from_bitstring("10"), h))

    def test_qite_descent_on_h2(self, h2_doc):
        h = h2_doc.hamiltonian()
        pool = pool_for(h2_doc)
        cfg = QiteConfig(dt=0.01, n_steps=120, method="full_qite",
                         truncation_threshold=1e-10)
        res = run_trajectory(h, pool, h2_doc.reference_state, cfg)
        energies = [res.initial_energy] + [r.energy for r in res.records]
        diffs = np.diff(energies)
        assert np.all(diffs <= 1e-8)

    def test_determinism_same_seed(self, h2_doc):
        h = h2_doc.hamiltonian()
        pool = pool_for(h2_doc)
        cfg = QiteConfig(dt=0.02, n_steps=60, method="drift_single_path", seed=3)
        r1 = run_trajectory(h, pool, h2_doc.reference_state, cfg)
        r2 = run_trajectory(h, pool, h2_doc.reference_state, cfg)
        assert r1.records == r2.records

    def test_seed_changes_drift_path(self, h2_doc):
        h = h2_doc.hamiltonian()
        pool = pool_for(h2_doc)
        base = QiteConfig(dt=0.02, n_steps=40, method="drift_single_path", seed=0)
        other = QiteConfig(dt=0.02, n_steps=40, method="drift_single_path", seed=1)
        r1 = run_trajectory(h, pool, h2_doc.reference_state, base)
        r2 = run_trajectory(h, pool, h2_doc.reference_state, other)
        assert [r.chosen_pauli for r in r1.records] != [r.chosen_pauli for r in r2.records]

    def test_channel_runs_paths(self, h2_doc):
        h = h2_doc.hamiltonian()
        pool = pool_for(h2_doc)
        cfg = QiteConfig(dt=0.02, n_steps=30, method="drift_channel", n_paths=4, seed=9)
        res = run_trajectory(h, pool, h2_doc.reference_state, cfg)
        assert len(res.paths) == 4
        assert res.mean_energy.shape == res.std_energy.shape
        assert len(res.mean_energy) == max(len(p) for p in res.paths)

    def test_exact_ite_converges(self, h2_doc):
        h = h2_doc.hamiltonian()
        cfg = QiteConfig(dt=0.05, n_steps=400, method="exact_ite")
        res = run_trajectory(h, None, h2_doc.reference_state, cfg)
        ed, _ = exact_diagonalize(h)
        assert res.final_energy == pytest.approx(ed, abs=1e-7)

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            QiteConfig(dt=-0.1, n_steps=10)
        with pytest.raises(ConfigurationError):
            QiteConfig(dt=0.1, n_steps=10, method="nope")
        with pytest.raises(ConfigurationError):
            QiteConfig(dt=0.1, n_steps=10, method="full_qite", gamma=5)


class TestSampledMode:
    def test_sampled_trajectory_runs_and_descends(self, h2_doc):
        h = h2_doc.hamiltonian()
        pool = pool_for(h2_doc)
        cfg = QiteConfig(dt=0.05, n_steps=15, method="drift_single_path",
                         truncation_threshold=0.05, shot_mode="sampled",
                         epsilon=0.05, seed=2)
        res = run_trajectory(h, pool, h2_doc.reference_state, cfg)
        assert len(res.records) == 15
        assert res.final_energy < res.initial_energy - 0.01

    def test_sampled_trajectory_deterministic(self, h2_doc):
        h = h2_doc.hamiltonian()
        pool = pool_for(h2_doc)
        cfg = QiteConfig(dt=0.05, n_steps=10, method="drift_single_path",
                         truncation_threshold=0.05, shot_mode="sampled",
                         epsilon=0.05, seed=4)
        r1 = run_trajectory(h, pool, h2_doc.reference_state, cfg)
        r2 = run_trajectory(h, pool, h2_doc.reference_state, cfg)
        assert r1.records == r2.records
