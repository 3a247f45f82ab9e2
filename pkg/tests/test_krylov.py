import math

import numpy as np
import pytest

from sqspec.background import BackgroundParams, CouplingCoefficients, LanczosChain, lanczos_chain
from sqspec.krylov import (
    AmplitudeDivergenceError,
    build_liouvillian,
    characteristic_poly_residual,
    meixner_poly,
    otmss_amplitudes,
    tmss_amplitudes,
)


def de_sitter_chain(n_max=12, eta=-1.0, k=1.0):
    return lanczos_chain(n_max, eta=eta, k=k, params=BackgroundParams())


def random_positive_chain(rng, n_max=12):
    return LanczosChain(
        b=np.concatenate([[0.0], rng.uniform(0.2, 3.0, size=n_max)]),
        c_mag=rng.uniform(0.1, 5.0, size=n_max + 1),
    )


class TestLiouvillian:
    def test_two_site_transcription(self):
        k = 0.8
        chain = LanczosChain(b=np.array([0.0, 1.0]), c_mag=np.array([k, 3 * k]))
        liou = build_liouvillian(chain, 2)
        m = liou.matrix()
        # -i c_n with c_n = i * magnitude leaves the real magnitudes on the diagonal
        assert m[0, 0] == k and m[1, 1] == 3 * k
        assert m[0, 1] == 1.0 and m[1, 0] == 1.0

    def test_single_site(self):
        chain = de_sitter_chain(3)
        liou = build_liouvillian(chain, 1)
        assert liou.matrix().shape == (1, 1)
        assert liou.matrix()[0, 0] == chain.c_tilde[0]

    def test_de_sitter_offdiagonal(self):
        liou = build_liouvillian(de_sitter_chain(5), 4)
        np.testing.assert_allclose(liou.offdiagonal, [1.0, 2.0, 3.0], rtol=1e-15)

    def test_empty_space_rejected(self):
        with pytest.raises(ValueError, match="dimension"):
            build_liouvillian(de_sitter_chain(3), 0)

    def test_chain_too_short(self):
        with pytest.raises(ValueError, match="chain"):
            build_liouvillian(de_sitter_chain(2), 5)

    def test_symmetric_placement(self):
        m = build_liouvillian(de_sitter_chain(8), 6).matrix()
        np.testing.assert_array_equal(m, m.T)


class TestMeixnerPoly:
    def test_degree_zero(self):
        chain = de_sitter_chain()
        for x in (0.0, 1.5, 2.0 - 3.0j):
            assert meixner_poly(0, x, chain) == 1.0

    def test_degree_one(self):
        chain = de_sitter_chain(k=0.9)
        x = 0.3 + 0.1j
        assert meixner_poly(1, x, chain) == x - chain.c_tilde[0]

    def test_degree_two_hand_expanded(self):
        # P2 = (x - c1)(x - c0) - b1^2 at x = 0 with c = 0, b1 = 2
        chain = LanczosChain(b=np.array([0.0, 2.0]), c_mag=np.array([0.0, 0.0]))
        assert meixner_poly(2, 0.0, chain) == -4.0

    def test_matches_determinant_small(self):
        chain = de_sitter_chain()
        x = 1.0 + 1.0j
        assert characteristic_poly_residual(3, x, chain) < 1e-12

    def test_degree_one_residual_exact(self):
        chain = de_sitter_chain()
        for x in (0.2, -1.0 + 2.0j):
            assert characteristic_poly_residual(1, x, chain) == 0.0


class TestMeixnerDeterminantEquivalence:
    @pytest.mark.parametrize("chain_kind", ["de-sitter", "random-positive"])
    def test_relative_residual(self, chain_kind):
        rng = np.random.RandomState(42)
        chain = (
            de_sitter_chain()
            if chain_kind == "de-sitter"
            else random_positive_chain(rng)
        )
        xs = rng.uniform(-10, 10, size=(100, 2)) @ np.array([1.0, 1.0j])
        worst = 0.0
        for x in xs:
            for n in range(1, 11):
                rel = characteristic_poly_residual(n, x, chain) / max(
                    1.0, abs(meixner_poly(n, x, chain))
                )
                worst = max(worst, rel)
        assert worst < 1e-9

    def test_against_numpy_det(self):
        # third route: LU determinant of the dense matrix
        rng = np.random.RandomState(7)
        chain = random_positive_chain(rng, n_max=8)
        for n in (2, 5, 8):
            x = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            det = np.linalg.det(
                x * np.eye(n) - build_liouvillian(chain, n).matrix()
            )
            p = meixner_poly(n, x, chain)
            assert abs(p - det) / max(1.0, abs(det)) < 1e-12


class TestOtmssAmplitudes:
    def test_vacuum(self):
        cc = CouplingCoefficients(mu2=0.3, coupling=1.0)
        amp = otmss_amplitudes(0.0, 1.2, cc, n_max=5)
        assert amp.coefficients[0] == 1.0
        np.testing.assert_array_equal(amp.coefficients[1:], 0.0)

    def test_tmss_limit_exact_at_mu2_zero(self):
        cc = CouplingCoefficients(mu2=0.0, coupling=1.0)
        r, phi = 0.8, 0.4
        open_amp = otmss_amplitudes(r, phi, cc, n_max=40)
        closed_amp = tmss_amplitudes(r, phi, n_max=40)
        np.testing.assert_allclose(
            open_amp.coefficients, closed_amp.coefficients, rtol=1e-14, atol=0
        )

    def test_dissipative_closed_form(self):
        # hand-substituted prefactor and geometric ratio
        cc = CouplingCoefficients(mu2=0.1, coupling=1.0)
        amp = otmss_amplitudes(1.0, 0.0, cc, n_max=50)
        psi = amp.coefficients
        assert psi[0].real == pytest.approx(0.60219170531090338, rel=1e-14)
        assert (psi[1] / psi[0]).real == pytest.approx(-0.70769641088376999, rel=1e-13)
        # norm against the geometric closed form
        rho2 = abs(psi[1] / psi[0]) ** 2
        expected = abs(psi[0]) ** 2 / (1 - rho2)
        assert amp.squared_norm == pytest.approx(expected, rel=1e-12)

    def test_ratio_constancy(self):
        cc = CouplingCoefficients(mu2=0.25, coupling=1.3)
        psi = otmss_amplitudes(1.1, 0.7, cc, n_max=120).coefficients
        ratios = psi[1:] / psi[:-1]
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-13)

    def test_weak_dissipation_linear_convergence(self):
        r, phi = 1.0, 0.3
        ref = tmss_amplitudes(r, phi, n_max=60).coefficients
        devs = []
        for mu2 in (1e-3, 5e-4, 2.5e-4):
            cc = CouplingCoefficients(mu2=mu2, coupling=1.0)
            devs.append(
                np.max(np.abs(otmss_amplitudes(r, phi, cc, n_max=60).coefficients - ref))
            )
        assert 0.45 < devs[1] / devs[0] < 0.55
        assert 0.45 < devs[2] / devs[1] < 0.55

    def test_divergence_error_names_offenders(self):
        cc = CouplingCoefficients(mu2=0.0, coupling=5.0)
        with pytest.raises(AmplitudeDivergenceError, match="mu2"):
            otmss_amplitudes(2.0, 0.0, cc)

    def test_auto_truncation_tail(self):
        cc = CouplingCoefficients(mu2=0.05, coupling=1.0)
        amp = otmss_amplitudes(1.5, 0.2, cc)  # auto n_max
        assert amp.truncation_tail_bound < 1e-12
        got = np.sum(np.abs(amp.coefficients) ** 2)
        assert got == pytest.approx(amp.squared_norm, rel=1e-11)

    def test_normalized_flag(self):
        cc = CouplingCoefficients(mu2=0.2, coupling=1.0)
        amp = otmss_amplitudes(1.0, -0.4, cc, normalize=True)
        total = np.sum(np.abs(amp.coefficients) ** 2)
        assert 1.0 - amp.truncation_tail_bound - 1e-13 <= total <= 1.0 + 1e-13

    def test_unnormalized_norm_deficit(self):
        # with dissipation the literal series does not have unit norm
        cc = CouplingCoefficients(mu2=0.2, coupling=1.0)
        amp = otmss_amplitudes(1.0, 0.0, cc)
        assert amp.squared_norm < 1.0


class TestTmssAmplitudes:
    def test_vacuum(self):
        assert tmss_amplitudes(0.0, 0.0, n_max=3).coefficients[0] == 1.0

    def test_first_coefficient_ln2(self):
        # tanh(ln 2) = 3/5, sech(ln 2) = 4/5
        psi = tmss_amplitudes(math.log(2.0), 0.0, n_max=4).coefficients
        assert psi[1].real == pytest.approx(-0.48, rel=1e-14)
        assert abs(psi[1].imag) < 1e-16

    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 4.0])
    def test_unit_norm_auto_truncation(self, r):
        amp = tmss_amplitudes(r, 0.9)
        total = np.sum(np.abs(amp.coefficients) ** 2)
        assert abs(total - 1.0) < 1e-12

    def test_partial_sum_matches_tail_bound(self):
        # sum over n <= n_max equals 1 minus the analytic geometric tail
        amp = tmss_amplitudes(2.0, 0.0, n_max=200)
        total = np.sum(np.abs(amp.coefficients) ** 2)
        assert total == pytest.approx(1.0 - amp.truncation_tail_bound, abs=1e-12)

    def test_infinite_norm_is_one(self):
        for r in (0.3, 1.7, 4.2):
            assert tmss_amplitudes(r, 0.1, n_max=5).squared_norm == pytest.approx(
                1.0, rel=1e-13
            )
