import cmath
import math

import numpy as np
import pytest
from scipy import stats
from scipy.linalg import expm

from cohdisc.fock import (
    MIN_CUTOFF,
    CutoffPolicy,
    DensityOperator,
    FockOperator,
    FockVector,
    choose_cutoff,
    coherent_state,
    displaced_squeezed_state,
    displacement_operator,
    expectation,
    number_state,
    squeeze_operator,
    wigner,
)


def _min_dim_from_poisson(amp: float, tol: float) -> int:
    # Independent tail oracle: smallest d with P(Poisson(amp^2) >= d) < tol.
    lam = amp * amp
    d = 1
    while stats.poisson.sf(d - 1, lam) >= tol:
        d += 1
    return d


class TestChooseCutoff:
    @pytest.mark.parametrize("amp", [0.3, 0.64, 1.0, 1.9, 3.2, 6.0])
    def test_matches_poisson_tail_oracle(self, amp):
        expected = max(MIN_CUTOFF, math.ceil(2.0 * _min_dim_from_poisson(amp, 1e-12)))
        assert choose_cutoff(amp) == expected

    def test_frozen_values(self):
        assert choose_cutoff(0.0) == 8
        assert choose_cutoff(0.64) == 22
        assert choose_cutoff(1.0) == 30

    def test_guard_factor_one_returns_bare_minimum(self):
        policy = CutoffPolicy(tail_tolerance=1e-12, guard_factor=1.0)
        assert choose_cutoff(1.0, policy) == _min_dim_from_poisson(1.0, 1e-12)

    def test_looser_tail_gives_smaller_cutoff(self):
        loose = CutoffPolicy(tail_tolerance=1e-6, guard_factor=2.0)
        assert choose_cutoff(2.0, loose) < choose_cutoff(2.0)

    def test_monotone_in_amplitude(self):
        cuts = [choose_cutoff(a) for a in (0.0, 0.5, 1.0, 2.0, 4.0)]
        assert cuts == sorted(cuts)

    @pytest.mark.parametrize("amp", [-0.1, math.inf, math.nan])
    def test_rejects_bad_amplitude(self, amp):
        with pytest.raises(ValueError):
            choose_cutoff(amp)

    @pytest.mark.parametrize("tol", [0.0, 1.0, -1e-3, 2.0])
    def test_policy_rejects_bad_tail_tolerance(self, tol):
        with pytest.raises(ValueError):
            CutoffPolicy(tail_tolerance=tol)

    @pytest.mark.parametrize("guard", [0.99, 0.0, -1.0, math.inf])
    def test_policy_rejects_bad_guard(self, guard):
        with pytest.raises(ValueError):
            CutoffPolicy(guard_factor=guard)


class TestStates:
    def test_coherent_amplitudes_closed_form(self):
        alpha = 0.7 + 0.2j
        psi = coherent_state(alpha, 24)
        for k in (0, 3, 7):
            want = cmath.exp(-abs(alpha) ** 2 / 2) * alpha**k / math.sqrt(math.factorial(k))
            assert psi.amplitudes[k] == pytest.approx(want, abs=1e-14)

    def test_coherent_norm(self):
        assert coherent_state(1.3, choose_cutoff(1.3)).norm() == pytest.approx(1.0, abs=1e-12)
        # A tight cutoff leaves the state visibly sub-normalized.
        assert coherent_state(2.0, 5).norm() < 0.95

    def test_coherent_overlap_closed_form(self):
        a, b = 0.9, -0.4 + 0.3j
        d = choose_cutoff(1.5)
        inner = np.vdot(coherent_state(b, d).amplitudes, coherent_state(a, d).amplitudes)
        want = cmath.exp(-(abs(a) ** 2 + abs(b) ** 2) / 2 + a * b.conjugate())
        assert inner == pytest.approx(want, abs=1e-12)
        assert abs(inner) ** 2 == pytest.approx(math.exp(-abs(a - b) ** 2), abs=1e-12)

    def test_coherent_rejects_bad_input(self):
        with pytest.raises(ValueError):
            coherent_state(math.inf, 8)
        with pytest.raises(ValueError):
            coherent_state(0.3, 0)

    def test_number_state(self):
        psi = number_state(2, 6)
        assert psi.amplitudes[2] == 1.0
        assert np.count_nonzero(psi.amplitudes) == 1
        with pytest.raises(ValueError):
            number_state(6, 6)
        with pytest.raises(ValueError):
            number_state(-1, 6)

    def test_fock_vector_rejects_super_normalized(self):
        with pytest.raises(ValueError):
            FockVector([1.0, 1e-5])

    def test_density_from_vector(self):
        rho = coherent_state(0.5, 16).density()
        assert rho.trace() == pytest.approx(1.0, abs=1e-12)
        assert rho.purity() == pytest.approx(1.0, abs=1e-12)


class TestDensityValidation:
    def test_rejects_non_hermitian(self):
        m = np.eye(3, dtype=complex)
        m[0, 1] = 1e-6
        with pytest.raises(ValueError, match="Hermitian"):
            DensityOperator(m)

    def test_rejects_negative_eigenvalue(self):
        m = np.diag([1.2, -0.2, 0.0]).astype(complex)
        with pytest.raises(ValueError, match="negative eigenvalue"):
            DensityOperator(m)

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityOperator(np.diag([0.5, 0.4]).astype(complex))

    def test_trace_tolerance_can_be_loosened(self):
        m = np.diag([0.6, 0.399]).astype(complex)
        rho = DensityOperator(m, trace_atol=2e-3)
        assert rho.trace() == pytest.approx(0.999)

    def test_accepts_valid_mixture(self):
        rho = DensityOperator(np.diag([0.25, 0.75]).astype(complex))
        assert rho.d == 2


class TestOperators:
    def test_displacement_generates_coherent_state(self):
        for beta in (0.6, -1.1, 0.4 + 0.5j):
            d = choose_cutoff(abs(beta) + 0.5)
            dop = displacement_operator(beta, d)
            got = dop.matrix[:, 0]
            want = coherent_state(beta, d).amplitudes
            assert np.max(np.abs(got - want)) < 1e-10

    def test_displacement_inverse(self):
        d = choose_cutoff(1.6)
        psi = coherent_state(0.7, d).amplitudes
        dop = displacement_operator(0.45 - 0.2j, d)
        back = dop.dag().matrix @ (dop.matrix @ psi)
        assert np.max(np.abs(back - psi)) < 1e-10

    def test_displacement_composition(self):
        d = choose_cutoff(2.2)
        u = displacement_operator(0.5, d).matrix @ displacement_operator(0.3, d).matrix
        # Same-direction displacements compose with no extra phase.
        want = displacement_operator(0.8, d).matrix
        assert np.max(np.abs((u - want)[: d // 2, : d // 2])) < 1e-9

    def test_squeezed_vacuum_overlap(self):
        r = 0.3
        s = squeeze_operator(r, 32)
        assert abs(s.matrix[0, 0]) == pytest.approx(1.0 / math.sqrt(math.cosh(r)), abs=1e-12)

    def test_squeezed_vacuum_mean_photon(self):
        r = 0.45
        s = squeeze_operator(r, 48)
        psi = s.matrix[:, 0]
        n_mean = float(np.sum(np.arange(48) * np.abs(psi) ** 2))
        assert n_mean == pytest.approx(math.sinh(r) ** 2, abs=1e-10)

    def test_squeeze_inverse(self):
        d = 40
        psi = coherent_state(0.6, d).amplitudes
        fwd = squeeze_operator(0.4, d).matrix
        bwd = squeeze_operator(-0.4, d).matrix
        assert np.max(np.abs(bwd @ (fwd @ psi) - psi)) < 1e-9

    def test_squeeze_rejects_extreme_parameter(self):
        with pytest.raises(ValueError):
            squeeze_operator(2.5, 16)
        with pytest.raises(ValueError):
            squeeze_operator(math.nan, 16)

    def test_displaced_squeezed_zero_squeezing_is_coherent(self):
        got = displaced_squeezed_state(0.8, 0.0, 20)
        want = coherent_state(0.8, 20)
        assert np.array_equal(got.amplitudes, want.amplitudes)

    def test_displaced_squeezed_mean_photon(self):
        # For real b, squeezing the displaced vacuum with S(-r) gives
        # mean photon number b^2 e^{2r} + sinh(r)^2.
        b, r = 0.5, 0.3
        d = 56
        psi = displaced_squeezed_state(b, r, d)
        n_mean = float(np.sum(np.arange(d) * np.abs(psi.amplitudes) ** 2))
        assert n_mean == pytest.approx(b * b * math.exp(2 * r) + math.sinh(r) ** 2, abs=1e-9)

    def test_displaced_squeezed_norm(self):
        psi = displaced_squeezed_state(-0.9, 0.5, 64)
        assert psi.norm() == pytest.approx(1.0, abs=1e-10)

    def test_fock_operator_rejects_non_square(self):
        with pytest.raises(ValueError):
            FockOperator(np.zeros((2, 3)))

    @pytest.mark.parametrize("r", [0.3, -0.8, 1.2])
    def test_squeeze_spectral_factorization_matches_expm(self, r):
        from cohdisc.fock import _squeeze_eigensystem

        d = 24
        de = 48
        lam, v = _squeeze_eigensystem(de)
        spectral = (v * np.exp(-1j * r * lam)) @ v.conj().T
        direct = squeeze_operator(r, d).matrix
        assert np.max(np.abs(spectral[:d, :d] - direct)) < 1e-10


class TestExpectation:
    def test_coherent_overlap_probability(self):
        d = choose_cutoff(1.4)
        rho = coherent_state(0.9, d).density()
        probe = coherent_state(0.4, d)
        assert expectation(probe, rho) == pytest.approx(math.exp(-0.25), abs=1e-12)

    def test_clamps_tiny_negative(self):
        d = 12
        rho = number_state(3, d).density()
        probe = number_state(5, d)
        assert expectation(probe, rho) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            expectation(number_state(0, 4), number_state(0, 5).density())


class TestWigner:
    def test_vacuum_at_origin(self):
        rho = number_state(0, 16).density()
        assert wigner(rho, [0.0])[0] == pytest.approx(2.0 / math.pi, abs=1e-12)

    def test_coherent_peak_at_center(self):
        alpha = 0.8 + 0.3j
        d = choose_cutoff(2 * abs(alpha) + 1)
        rho = coherent_state(alpha, d).density()
        assert wigner(rho, [alpha])[0] == pytest.approx(2.0 / math.pi, abs=1e-10)

    def test_coherent_gaussian_profile(self):
        alpha = 0.6
        d = choose_cutoff(2.5)
        rho = coherent_state(alpha, d).density()
        pts = np.array([0.0, 0.3 + 0.2j, 1.1])
        want = (2.0 / math.pi) * np.exp(-2.0 * np.abs(pts - alpha) ** 2)
        assert np.max(np.abs(wigner(rho, pts) - want)) < 1e-10

    def test_single_photon_negative_at_origin(self):
        rho = number_state(1, 16).density()
        got = wigner(rho, [0.0, 0.5])
        assert got[0] == pytest.approx(-2.0 / math.pi, abs=1e-12)
        # (4 t^2 - 1) e^{-2 t^2} vanishes at t = 1/2.
        assert got[1] == pytest.approx(0.0, abs=1e-12)

    def test_matches_dense_displacement_path(self):
        d = 18
        mix = 0.6 * coherent_state(0.5 + 0.2j, d).density().matrix
        mix += 0.4 * number_state(1, d).density().matrix
        rho = DensityOperator(mix)
        pts = [0.0, 0.3 + 0.1j, -0.2j, 1.0]
        got = wigner(rho, pts)
        de = 2 * d
        rho_e = np.zeros((de, de), dtype=complex)
        rho_e[:d, :d] = rho.matrix
        a = np.diag(np.sqrt(np.arange(1, de)), 1).astype(complex)
        signs = (-1.0) ** np.arange(d)
        for i, g in enumerate(pts):
            u = expm(-g * a.conj().T + np.conjugate(g) * a)
            sigma = u @ rho_e @ u.conj().T
            want = (2.0 / math.pi) * float(signs @ np.real(np.diag(sigma)[:d]))
            assert got[i] == pytest.approx(want, abs=1e-10)

    def test_integral_is_unit_trace(self):
        alpha = 0.5
        step = 0.2
        xs = np.arange(-4.0, 4.0 + step / 2, step)
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        pts = (gx + 1j * gy).ravel()
        d = choose_cutoff(float(np.max(np.abs(pts))) + alpha)
        rho = coherent_state(alpha, d).density()
        vals = wigner(rho, pts).reshape(gx.shape)
        integral = float(np.trapezoid(np.trapezoid(vals, dx=step), dx=step))
        assert integral == pytest.approx(1.0, abs=1e-3)
