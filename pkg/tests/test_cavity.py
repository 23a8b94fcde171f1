import math

import numpy as np
import pytest

from cohdisc.cavity import (
    CavityDephaser,
    JCParams,
    JointState,
    cavity_dephaser_channel,
    cavity_receiver_state,
    dephase_cavity,
    jc_evolve,
)
from cohdisc.fock import DensityOperator, coherent_state, number_state


def joint_pure(vec: np.ndarray) -> JointState:
    v = np.asarray(vec, dtype=complex)
    return JointState(np.outer(v, v.conj()))


def basis_vec(d: int, atom: int, k: int) -> np.ndarray:
    v = np.zeros(2 * d, dtype=complex)
    v[atom * d + k] = 1.0
    return v


class TestJCParams:
    def test_default_quarter_period(self):
        p = JCParams()
        assert p.tau == pytest.approx(math.pi / 2)
        assert p.angle == pytest.approx(math.pi / 2)

    def test_angle_scales_with_gamma(self):
        p = JCParams(gamma=2.0)
        assert p.tau == pytest.approx(math.pi / 4)
        assert p.angle == pytest.approx(math.pi / 2)

    def test_validation(self):
        with pytest.raises(ValueError):
            JCParams(gamma=0.0)
        with pytest.raises(ValueError):
            JCParams(tau=-1.0)


class TestJointState:
    def test_rejects_odd_dimension(self):
        with pytest.raises(ValueError):
            JointState(np.eye(5) / 5)

    def test_with_ground_atom_and_trace_back(self):
        rho = coherent_state(0.5, 16).density()
        js = JointState.with_ground_atom(rho)
        assert js.d == 16
        assert np.array_equal(js.cavity_matrix(), rho.matrix)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            JointState(np.eye(4))


class TestJcEvolve:
    def test_ground_vacuum_stationary(self):
        d = 6
        js = joint_pure(basis_vec(d, 0, 0))
        out = jc_evolve(js, JCParams())
        assert np.max(np.abs(out.matrix - js.matrix)) < 1e-15

    def test_single_photon_full_transfer(self):
        d = 6
        out = jc_evolve(joint_pure(basis_vec(d, 0, 1)), JCParams())
        want = joint_pure(basis_vec(d, 1, 0))  # -i|0,E> up to global phase
        assert np.max(np.abs(out.matrix - want.matrix)) < 1e-15

    def test_two_photon_partial_transfer(self):
        d = 6
        out = jc_evolve(joint_pure(basis_vec(d, 0, 2)), JCParams())
        theta = math.pi * math.sqrt(2.0) / 2.0
        want = math.cos(theta) * basis_vec(d, 0, 2) - 1j * math.sin(theta) * basis_vec(d, 1, 1)
        assert np.max(np.abs(out.matrix - joint_pure(want).matrix)) < 1e-14

    def test_double_quarter_period_restores_population(self):
        d = 6
        start = joint_pure(basis_vec(d, 0, 1))
        once = jc_evolve(start, JCParams())
        twice = jc_evolve(once, JCParams())
        # |1,G> -> -i|0,E> -> -|1,G>: same density matrix.
        assert np.max(np.abs(twice.matrix - start.matrix)) < 1e-14

    def test_preserves_purity_and_trace(self):
        d = 20
        js = JointState.with_ground_atom(coherent_state(0.7, d).density())
        out = jc_evolve(js, JCParams())
        assert float(np.real(np.trace(out.matrix))) == pytest.approx(1.0, abs=1e-12)
        assert float(np.real(np.trace(out.matrix @ out.matrix))) == pytest.approx(1.0, abs=1e-10)


class TestDephaseCavity:
    def _scrambled(self, d=5):
        v = basis_vec(d, 0, 0) + basis_vec(d, 1, 0) + basis_vec(d, 0, 1)
        return dephase_cavity(joint_pure(v / math.sqrt(3.0)))

    def test_same_photon_atom_coherence_survives(self):
        d = 5
        out = self._scrambled(d)
        assert out.matrix[0 * d + 0, 1 * d + 0] == pytest.approx(1 / 3, abs=1e-15)

    def test_cross_photon_coherence_dies(self):
        d = 5
        out = self._scrambled(d)
        assert out.matrix[0 * d + 0, 0 * d + 1] == 0.0
        assert out.matrix[1 * d + 0, 0 * d + 1] == 0.0

    def test_diagonal_unchanged_and_idempotent(self):
        d = 5
        v = basis_vec(d, 0, 0) + basis_vec(d, 1, 2) - basis_vec(d, 0, 3)
        js = joint_pure(v / math.sqrt(3.0))
        out = dephase_cavity(js)
        assert np.array_equal(np.diag(out.matrix), np.diag(js.matrix))
        again = dephase_cavity(out)
        assert np.array_equal(again.matrix, out.matrix)


class TestCavityDephaser:
    def test_requires_minimum_cutoff(self):
        with pytest.raises(ValueError):
            CavityDephaser(3)

    def test_vacuum_fixed(self):
        ch = cavity_dephaser_channel(8)
        vac = number_state(0, 8).density()
        assert np.max(np.abs(ch.apply(vac).matrix - vac.matrix)) < 1e-15

    def test_protected_block_phase_flip(self):
        d = 8
        c = 0.6
        n = math.sqrt(1.0 + c * c)
        vin = np.zeros(d, dtype=complex)
        vin[0], vin[1] = 1.0 / n, c / n
        out = CavityDephaser(d).apply(DensityOperator(np.outer(vin, vin.conj())))
        vout = np.zeros(d, dtype=complex)
        vout[0], vout[1] = 1.0 / n, -c / n
        assert np.max(np.abs(out.matrix - np.outer(vout, vout.conj()))) < 1e-14

    def test_coherent_low_block_coherence(self):
        alpha = 0.3
        d = 16
        out = cavity_receiver_state(alpha, d)
        want = -math.exp(-(alpha**2)) * alpha
        assert out.matrix[0, 1].real == pytest.approx(want, abs=1e-12)
        assert abs(out.matrix[0, 1].imag) < 1e-15

    def test_only_nearest_neighbor_coherence(self):
        d = 24
        out = cavity_receiver_state(0.8, d)
        for j in range(d):
            for k in range(j + 2, d):
                assert abs(out.matrix[j, k]) < 1e-14

    def test_trace_preserved(self):
        d = 20
        out = CavityDephaser(d).apply(coherent_state(0.9, d).density())
        assert out.trace() == pytest.approx(1.0, abs=1e-12)

    def test_mixes_beyond_protected_block(self):
        out = cavity_receiver_state(0.64, 20)
        assert out.purity() < 1.0 - 1e-4

    def test_vacuum_amplitude_input(self):
        out = cavity_receiver_state(0.0, 8)
        vac = number_state(0, 8).density()
        assert np.max(np.abs(out.matrix - vac.matrix)) < 1e-15

    def test_process_matrix_matches_direct_apply(self):
        d = 8
        ch = CavityDephaser(d)
        proc = ch.process_matrix()
        rng = np.random.default_rng(11)
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = a @ a.conj().T
        rho /= rho.trace()
        direct = ch.apply_matrix(rho)
        via_proc = (proc @ rho.ravel()).reshape(d, d)
        assert np.max(np.abs(direct - via_proc)) < 1e-12

    def test_choi_is_positive_and_trace_preserving(self):
        d = 8
        ch = CavityDephaser(d)
        choi = ch.choi_matrix()
        assert np.max(np.abs(choi - choi.conj().T)) < 1e-12
        assert float(np.linalg.eigvalsh(choi)[0]) > -1e-8
        # Tracing the output index of each block leaves the identity.
        reduced = np.zeros((d, d), dtype=complex)
        for j in range(d):
            for k in range(d):
                reduced[j, k] = np.trace(choi[j * d : (j + 1) * d, k * d : (k + 1) * d])
        assert np.max(np.abs(reduced - np.eye(d))) < 1e-10

    def test_linearity(self):
        d = 10
        ch = CavityDephaser(d)
        r1 = coherent_state(0.4, d).density().matrix
        r2 = number_state(2, d).density().matrix
        mix = 0.3 * r1 + 0.7 * r2
        combined = ch.apply_matrix(mix)
        split = 0.3 * ch.apply_matrix(r1) + 0.7 * ch.apply_matrix(r2)
        assert np.max(np.abs(combined - split)) < 1e-14
