import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import qchanrate as qc
from qchanrate import channels, rates
from qchanrate.errors import ImpossibleObservationError
from qchanrate.oracle import oracle_joint_prob, oracle_output_prob

from conftest import binary_entropy


class TestDmcInformationRate:
    @pytest.mark.parametrize("p", [0.0, 0.05, 0.11, 0.3, 0.5, 0.95, 1.0])
    def test_bsc_closed_form(self, p, uniform):
        got = qc.dmc_information_rate(uniform, qc.build_bsc(p))
        assert abs(got - (1.0 - binary_entropy(p))) <= 1e-12

    def test_uniform_bsc_is_zero(self, uniform):
        assert qc.dmc_information_rate(uniform, qc.build_bsc(0.5)) == 0.0

    def test_reference_value(self, uniform):
        assert abs(qc.dmc_information_rate(uniform, qc.build_bsc(0.05)) - 0.713603) <= 1e-6

    def test_skewed_input(self):
        q = qc.InputLaw([0.6, 0.4])
        w = qc.Dmc(np.array([[0.8, 0.2], [0.3, 0.7]]))
        qy = q.p @ w.w
        expected = sum(
            q.p[x] * w.w[x, y] * math.log2(w.w[x, y] / qy[y])
            for x in range(2)
            for y in range(2)
        )
        assert abs(qc.dmc_information_rate(q, w) - expected) <= 1e-14

    def test_alphabet_mismatch(self, uniform):
        with pytest.raises(ValueError):
            qc.dmc_information_rate(qc.InputLaw([1.0]), qc.build_bsc(0.1))


class TestClassicalForward:
    def test_single_state_matches_memoryless_form(self):
        q = qc.InputLaw([0.6, 0.4])
        w = qc.Dmc(np.array([[0.8, 0.2], [0.3, 0.7]]))
        f = qc.fsmc_from_dmc(w)
        qy = q.p @ w.w
        ys = np.array([0, 1, 1, 0, 1, 0, 0])
        logs = qc.scaled_forward_classical(f, q, ys)
        assert_allclose(logs, -np.log(qy[ys]), atol=1e-14)

    def test_uniform_output_scale_factor_is_alphabet_size(self, uniform):
        f = qc.fsmc_from_dmc(qc.build_bsc(0.5))
        logs = qc.scaled_forward_classical(f, uniform, np.array([0, 1, 1, 0]))
        assert_allclose(np.exp(logs), 2.0)

    def test_recursion_matches_path_enumeration(self, classical_ge, uniform):
        rng = np.random.default_rng(30)
        for _ in range(10):
            ys = rng.integers(0, 2, size=8)
            xs = rng.integers(0, 2, size=8)
            log_py = -qc.scaled_forward_classical(classical_ge, uniform, ys).sum()
            assert abs(log_py - math.log(oracle_output_prob(classical_ge, uniform, ys))) <= 1e-12
            log_pxy = -qc.scaled_forward_classical(classical_ge, uniform, ys, xs).sum()
            assert abs(log_pxy - math.log(oracle_joint_prob(classical_ge, uniform, xs, ys))) <= 1e-12

    def test_step_function_agrees_with_driver(self, classical_ge, uniform):
        ys = np.array([0, 1, 1, 0, 1])
        xs = np.array([1, 0, 1, 1, 0])
        m = qc.initial_state_metric(classical_ge)
        for y, x in zip(ys, xs):
            m = qc.forward_step_classical(classical_ge, uniform, m, y, x)
        driver = qc.scaled_forward_classical(classical_ge, uniform, ys, xs)
        assert abs(m.log_scale_accum - driver.sum()) <= 1e-12

    def test_metric_stays_normalized(self, classical_ge, uniform):
        m = qc.initial_state_metric(classical_ge)
        for y in (0, 1, 1, 0, 0, 1):
            m = qc.forward_step_classical(classical_ge, uniform, m, y)
            assert abs(m.mu.sum() - 1.0) <= 1e-12
            assert m.mu.min() >= 0.0

    def test_impossible_observation(self, uniform):
        f = qc.fsmc_from_dmc(qc.build_bsc(0.0))
        with pytest.raises(ImpossibleObservationError):
            qc.scaled_forward_classical(f, uniform, np.array([1]), np.array([0]))


class TestQuantumForward:
    def test_empty_recursion_base_case(self, quantum_ge):
        s = qc.initial_state_operator(quantum_ge)
        assert_allclose(s.sigma, quantum_ge.initial_state)
        assert s.log_scale_accum == 0.0

    def test_embedded_model_reproduces_classical_recursion(self, classical_ge, uniform):
        t = qc.embed_classical_as_quantum(classical_ge)
        traj = qc.sample_trajectory(classical_ge, uniform, 500, seed=31)
        for xs in (None, traj.x):
            lc = qc.scaled_forward_classical(classical_ge, uniform, traj.y, xs)
            lq = qc.scaled_forward_quantum(t, uniform, traj.y, xs)
            assert np.abs(lc - lq).max() <= 1e-12
        # state operators stay diagonal with the classical metric on the diagonal
        m = qc.initial_state_metric(classical_ge)
        s = qc.initial_state_operator(t)
        for y in traj.y[:50]:
            m = qc.forward_step_classical(classical_ge, uniform, m, y)
            s = qc.forward_step_quantum(t, uniform, s, y)
            assert np.abs(np.diagonal(s.sigma).real - m.mu).max() <= 1e-12
            assert np.abs(s.sigma - np.diag(np.diagonal(s.sigma))).max() <= 1e-14

    def test_recursion_matches_path_enumeration(self, quantum_ge, uniform):
        rng = np.random.default_rng(32)
        for _ in range(10):
            ys = rng.integers(0, 2, size=8)
            xs = rng.integers(0, 2, size=8)
            log_py = -qc.scaled_forward_quantum(quantum_ge, uniform, ys).sum()
            assert abs(log_py - math.log(oracle_output_prob(quantum_ge, uniform, ys))) <= 1e-10
            log_pxy = -qc.scaled_forward_quantum(quantum_ge, uniform, ys, xs).sum()
            assert abs(log_pxy - math.log(oracle_joint_prob(quantum_ge, uniform, xs, ys))) <= 1e-10

    def test_step_function_agrees_with_driver(self, quantum_ge, uniform):
        ys = np.array([0, 1, 1, 0, 1])
        s = qc.initial_state_operator(quantum_ge)
        for y in ys:
            s = qc.forward_step_quantum(quantum_ge, uniform, s, y)
            assert abs(np.trace(s.sigma).real - 1.0) <= 1e-12
        driver = qc.scaled_forward_quantum(quantum_ge, uniform, ys)
        assert abs(s.log_scale_accum - driver.sum()) <= 1e-12

    def test_initial_scale_invariance(self, quantum_ge, uniform):
        """A positive rescaling of the starting state is absorbed by the
        first normalization; later scale factors and states match."""
        scaled = channels.TransferOperatorSet(
            quantum_ge.operators, 2.5 * quantum_ge.initial_state
        )
        ys = np.array([0, 1, 1, 0, 1, 0, 1, 1])
        base = qc.scaled_forward_quantum(quantum_ge, uniform, ys)
        resc = qc.scaled_forward_quantum(scaled, uniform, ys)
        assert np.abs(base[1:] - resc[1:]).max() <= 1e-12
        assert abs((base[0] - resc[0]) - math.log(2.5)) <= 1e-12
        s_base = qc.initial_state_operator(quantum_ge)
        s_resc = qc.initial_state_operator(scaled)
        for y in ys:
            s_base = qc.forward_step_quantum(quantum_ge, uniform, s_base, y)
            s_resc = qc.forward_step_quantum(scaled, uniform, s_resc, y)
            assert np.abs(s_base.sigma - s_resc.sigma).max() <= 1e-12


def memoryless_quantum_bsc(p: float) -> channels.QuantumMemoryChannel:
    """A trivial-memory channel (one-dimensional state) acting as BSC(p)."""
    basis = np.stack([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]).astype(complex)
    kraus = np.stack(
        [np.sqrt(1 - p) * np.eye(2, dtype=complex), np.sqrt(p) * channels.PAULI_X]
    )
    return channels.QuantumMemoryChannel(
        state_dim=1,
        encodings=basis,
        kraus=kraus,
        measurements=basis,
        inter_use_unitary=np.eye(1, dtype=complex),
        initial_state=np.eye(1, dtype=complex),
    )


class TestEntropyRateEstimates:
    def test_memoryless_classical_embedding(self, uniform):
        p = 0.11
        f = qc.fsmc_from_dmc(qc.build_bsc(p))
        traj = qc.sample_trajectory(f, uniform, 100000, seed=33)
        r = qc.entropy_rate_estimates(f, uniform, traj)
        assert abs(r.ir - (1.0 - binary_entropy(p))) <= 0.01
        assert r.ir == r.hx + r.hy - r.hxy

    def test_trivial_memory_quantum_channel_matches_memoryless_rate(self, uniform):
        p = 0.11
        t = qc.compile_transfer_operators(memoryless_quantum_bsc(p))
        assert t.state_dim == 1
        traj = qc.sample_trajectory(t, uniform, 100000, seed=34)
        r = qc.entropy_rate_estimates(t, uniform, traj)
        expected = qc.dmc_information_rate(uniform, qc.build_bsc(p))
        assert abs(r.ir - expected) <= 0.01

    def test_deterministic_input_gives_zero_rate(self, quantum_ge):
        q = qc.InputLaw([1.0, 0.0])
        traj = qc.sample_trajectory(quantum_ge, q, 2000, seed=35)
        r = qc.entropy_rate_estimates(quantum_ge, q, traj)
        assert r.hx == 0.0
        assert abs(r.ir) <= 1e-12

    def test_keep_scales_and_combination_identity(self, quantum_ge, uniform):
        traj = qc.sample_trajectory(quantum_ge, uniform, 400, seed=36)
        r = qc.entropy_rate_estimates(quantum_ge, uniform, traj, keep_scales=True)
        n = traj.n
        assert abs(r.hy - r.per_step_log_scales.output.sum() / (n * rates.LN2)) <= 1e-12
        assert abs(r.hxy - r.per_step_log_scales.joint.sum() / (n * rates.LN2)) <= 1e-12
        assert r.ir == r.hx + r.hy - r.hxy

    def test_burn_in_drops_prefix(self, quantum_ge, uniform):
        traj = qc.sample_trajectory(quantum_ge, uniform, 400, seed=37)
        full = qc.entropy_rate_estimates(quantum_ge, uniform, traj, keep_scales=True)
        burned = qc.entropy_rate_estimates(quantum_ge, uniform, traj, burn_in=100)
        k = traj.n - 100
        expect_hy = full.per_step_log_scales.output[100:].sum() / (k * rates.LN2)
        assert abs(burned.hy - expect_hy) <= 1e-12
        with pytest.raises(ValueError):
            qc.entropy_rate_estimates(quantum_ge, uniform, traj, burn_in=traj.n)

    def test_reference_channel_rate_sandwich(self, quantum_ge, uniform):
        """The noisy-bad-state channel carries less than its good state
        alone (a BSC(0.05)) but still a positive rate."""
        traj = qc.sample_trajectory(quantum_ge, uniform, 100000, seed=38)
        r = qc.entropy_rate_estimates(quantum_ge, uniform, traj)
        assert 0.0 < r.ir < 1.0 - binary_entropy(0.05)

    def test_estimates_bounded_and_nonnegative_in_expectation(self, quantum_ge, uniform):
        irs = []
        for seed in range(20):
            traj = qc.sample_trajectory(quantum_ge, uniform, 10000, seed=seed)
            r = qc.entropy_rate_estimates(quantum_ge, uniform, traj)
            assert r.ir <= 1.0 + 0.005
            irs.append(r.ir)
        assert np.mean(irs) >= -0.005

    def test_spread_shrinks_with_length(self, classical_ge, uniform):
        """Estimator spread across seeds must tighten as n grows
        (prefixes of one long trajectory per seed give the per-n samples)."""
        spreads = {}
        lengths = (1000, 10000, 100000)
        estimates = {n: [] for n in lengths}
        for seed in range(20):
            traj = qc.sample_trajectory(classical_ge, uniform, lengths[-1], seed=100 + seed)
            for n in lengths:
                prefix = qc.Trajectory(traj.x[:n], traj.y[:n], traj.seed)
                estimates[n].append(qc.entropy_rate_estimates(classical_ge, uniform, prefix).ir)
        for n in lengths:
            spreads[n] = np.std(estimates[n], ddof=1)
        assert spreads[100000] <= spreads[1000] / 2.0
