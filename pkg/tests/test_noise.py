import math

import numpy as np
import pytest
from scipy.special import roots_hermite

from catft import fock, noise
from catft.fock import FockVector, coherent
from catft.noise import (
    NoiseStrength,
    apply_location_noise,
    dephasing_damp,
    loss_channel,
    loss_kraus,
    sample_dephasing,
    sample_loss,
)


def trace_distance(a, b):
    w = np.linalg.eigvalsh(a - b)
    return 0.5 * float(np.abs(w).sum())


class TestLossKraus:
    def test_identity_at_zero(self):
        np.testing.assert_allclose(loss_kraus(0.0, 0, 8).entries, np.eye(8))

    def test_completeness(self):
        d, gamma = 30, 0.01
        acc = np.zeros((d, d), dtype=complex)
        for k in range(d):
            ak = loss_kraus(gamma, k, d).entries
            acc += ak.conj().T @ ak
        assert np.linalg.norm(acc - np.eye(d)) < 1e-12

    def test_amplitude_damping_law(self):
        # exact channel must damp the mean photon number by e^{-gamma}
        gamma, d = 0.05, fock.ensure_dim(2.0)
        rho = coherent(2.0, d).density()
        out = loss_channel(rho, gamma)
        n = np.diag(np.arange(d))
        nbar = float(np.real(np.trace(n @ out)))
        assert nbar == pytest.approx(4.0 * math.exp(-gamma), abs=1e-8)

    def test_trace_preserving(self):
        d = 20
        rho = coherent(1.5, d).density()
        out = loss_channel(rho, 0.08)
        assert np.trace(out).real == pytest.approx(1.0, abs=1e-10)


class TestDephasing:
    def test_zero_unchanged(self, rng):
        rho = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        rho = rho @ rho.conj().T
        np.testing.assert_array_equal(dephasing_damp(rho, 0.0), rho)

    def test_populations_invariant(self, rng):
        rho = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
        rho = rho @ rho.conj().T
        out = dephasing_damp(rho, 0.3)
        np.testing.assert_allclose(np.diag(out), np.diag(rho), atol=1e-14)

    def test_matches_gauss_hermite_quadrature(self):
        # independent oracle: average random rotations over the Gaussian
        # angle distribution with a 201-point Gauss-Hermite rule
        d, gamma = 12, 0.02
        rho = coherent(1.0, d).density()
        nodes, weights = roots_hermite(201)
        acc = np.zeros_like(rho)
        n = np.arange(d)
        for x, w in zip(nodes, weights):
            theta = x * math.sqrt(2 * gamma)
            ph = np.exp(1j * theta * n)
            acc += (w / math.sqrt(math.pi)) * (ph[:, None] * rho * ph.conj()[None, :])
        out = dephasing_damp(rho, gamma)
        np.testing.assert_allclose(out, acc, atol=1e-8)


class TestSampling:
    def test_zero_gamma_loss(self, rng):
        state = coherent(2.0, 30)
        k, post, rec = sample_loss(state, 0, 0.0, rng)
        assert k == 0 and rec.loss_count == 0
        np.testing.assert_array_equal(post.amps, state.amps)

    def test_loss_count_distribution(self, rng):
        # empirical counts against the exact weights w_k = ||A_k psi||^2
        d, gamma, shots = fock.ensure_dim(2.0), 0.05, 100_000
        state = coherent(2.0, d)
        exact = []
        for k in range(8):
            ak = loss_kraus(gamma, k, d).entries
            exact.append(float(np.linalg.norm(ak @ state.amps) ** 2))
        counts = np.zeros(d)
        for _ in range(shots):
            k, _, _ = sample_loss(state, 0, gamma, rng)
            counts[k] += 1
        for k, p in enumerate(exact):
            if p < 1e-6:
                continue
            sigma = math.sqrt(shots * p * (1 - p))
            assert abs(counts[k] - shots * p) < 4 * sigma + 1

    def test_loss_marginal_matches_exact_channel(self, rng):
        # trajectories are normalized and drawn with the channel weights, so
        # the plain average reproduces the channel
        d, gamma, shots = 15, 0.08, 100_000
        state = coherent(1.2, d)
        acc = np.zeros((d, d), dtype=complex)
        for _ in range(shots):
            _, post, _ = sample_loss(state, 0, gamma, rng)
            acc += post.density()
        acc /= shots
        exact = loss_channel(state.density(), gamma)
        assert trace_distance(acc, exact) < 0.01

    def test_dephasing_stats(self, rng):
        gamma, shots = 1e-3, 100_000
        state = coherent(1.0, 12)
        thetas = np.array([sample_dephasing(state, 0, gamma, rng)[0] for _ in range(shots)])
        assert abs(thetas.mean()) < 4 * math.sqrt(gamma / shots)
        assert abs(thetas.var() - gamma) < 4 * gamma * math.sqrt(2.0 / shots)

    def test_dephasing_marginal_matches_damp(self, rng):
        d, gamma, shots = 12, 0.05, 100_000
        state = coherent(1.0, d)
        acc = np.zeros((d, d), dtype=complex)
        for _ in range(shots):
            _, post, _ = sample_dephasing(state, 0, gamma, rng)
            acc += post.density()
        acc /= shots
        exact = dephasing_damp(state.density(), gamma)
        assert trace_distance(acc, exact) < 0.01

    def test_location_noise_identity(self, rng):
        state = coherent(2.0, 30)
        post, rec = apply_location_noise(state, 0, NoiseStrength(), rng, location_id=5)
        assert rec.loss_count == 0 and rec.dephasing_angle == 0.0
        assert rec.location_id == 5
        np.testing.assert_array_equal(post.amps, state.amps)

    def test_location_noise_matches_composed_channel(self, rng):
        d, shots = 12, 100_000
        strength = NoiseStrength(0.05, 0.03)
        state = coherent(1.0, d)
        acc = np.zeros((d, d), dtype=complex)
        for _ in range(shots):
            post, _ = apply_location_noise(state, 0, strength, rng)
            acc += post.density()
        acc /= shots
        exact = dephasing_damp(loss_channel(state.density(), 0.05), 0.03)
        assert trace_distance(acc, exact) < 0.01

    def test_two_mode_noise_factorizes(self, rng):
        # gate noise hits each mode independently: records stay per-mode
        state = coherent(0.6, 10).tensor(coherent(0.5, 10))
        post, rec_a = apply_location_noise(state, 0, NoiseStrength(0.3, 0.0), rng, location_id=3)
        post, rec_b = apply_location_noise(post, 1, NoiseStrength(0.3, 0.0), rng, location_id=4)
        assert rec_a.location_id != rec_b.location_id
        assert post.norm() == pytest.approx(1.0, abs=1e-10)

    def test_loss_never_increases_photon_number(self, rng):
        d = 16
        n = np.diag(np.arange(d))
        for alpha in (1.0, 1.4):
            rho = coherent(alpha, d).density()
            before = float(np.real(np.trace(n @ rho)))
            after = float(np.real(np.trace(n @ loss_channel(rho, 0.1))))
            assert after <= before + 1e-12
