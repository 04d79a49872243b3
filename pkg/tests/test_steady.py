import warnings

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from opendicke import (
    CovarianceMatrix,
    DomainError,
    NotHurwitz,
    SingularResolvent,
    Side,
    SweepSpec,
    TruncationWarning,
    covariance_integral_oracle,
    critical_coupling,
    drift_diffusion,
    noise_spectrum,
    number_fluctuations,
    purity,
    quadrature_moments,
    solve_lyapunov,
    sweep,
)
from opendicke.steady import lyapunov_residual

from conftest import GC_EXC, GC_NONEXC


def random_hurwitz(rng, n=6):
    a = rng.standard_normal((n, n))
    shift = np.linalg.eigvals(a).real.max() + rng.uniform(0.3, 2.0)
    b = rng.standard_normal((n, n))
    return a - shift * np.eye(n), b @ b.T


class TestSolveLyapunov:
    def test_trivial(self):
        v = solve_lyapunov(-np.eye(6), 2 * np.eye(6)).v
        np.testing.assert_allclose(v, np.eye(6), atol=1e-15)

    def test_matches_scipy_bartels_stewart(self, exc, nonexc):
        for p, g in ((exc, 0.8 * GC_EXC), (exc, 1.3 * GC_EXC), (nonexc, 0.95 * GC_NONEXC)):
            dd = drift_diffusion(p.with_g(g))
            ref = scipy.linalg.solve_continuous_lyapunov(dd.a, -dd.d)
            v = solve_lyapunov(dd.a, dd.d).v
            assert np.linalg.norm(v - ref) <= 1e-12 * np.linalg.norm(ref)

    def test_residual_random(self, rng):
        for _ in range(10):
            a, d = random_hurwitz(rng)
            v = solve_lyapunov(a, d).v
            assert lyapunov_residual(a, v, d) <= 1e-10 * max(1.0, np.linalg.norm(d))

    def test_weak_coupling_cavities_near_vacuum(self, exc):
        def deviation(g):
            dd = drift_diffusion(exc.with_g(g))
            v = solve_lyapunov(dd.a, dd.d).v
            return np.abs(v[:4, :4] - 0.5 * np.eye(4)).max()

        g = 1e-3 * GC_EXC
        d1, d2 = deviation(g), deviation(g / 2)
        assert d1 < 1e-4
        assert d1 / d2 == pytest.approx(4.0, rel=1e-2)

    @pytest.mark.parametrize("g", [0.0, GC_EXC])
    def test_not_hurwitz(self, exc, g):
        dd = drift_diffusion(exc.with_g(g))
        with pytest.raises(NotHurwitz) as info:
            solve_lyapunov(dd.a, dd.d)
        assert info.value.max_real > -1e-12

    def test_near_threshold_matches_oracle_and_sweep(self, exc):
        dd = drift_diffusion(exc.with_g(0.99 * GC_EXC))
        v = solve_lyapunov(dd.a, dd.d)
        ref = covariance_integral_oracle(dd.a, dd.d)
        assert np.linalg.norm(v.v - ref.v) <= 1e-6 * np.linalg.norm(ref.v)
        data = sweep(exc, SweepSpec(Side.NORMAL, 1e-2, 1e-1, 5))
        row = data.rows[0]
        assert row.eps == pytest.approx(1e-2, rel=1e-14)
        assert row.values["dn1"] == pytest.approx(number_fluctuations(v)[0], rel=1e-12)

    def test_symmetric_psd(self, exc, nonexc):
        for p, g_c in ((exc, GC_EXC), (nonexc, GC_NONEXC)):
            for ratio in (0.5, 0.999, 1.001, 1.3):
                dd = drift_diffusion(p.with_g(ratio * g_c))
                cov = solve_lyapunov(dd.a, dd.d)
                assert cov.is_symmetric() and cov.is_psd()


class TestIntegralOracle:
    def test_trivial(self):
        v = covariance_integral_oracle(-np.eye(6), 2 * np.eye(6), horizon=40.0).v
        np.testing.assert_allclose(v, np.eye(6), atol=1e-8)

    def test_empty_horizon_warns(self):
        with pytest.warns(TruncationWarning):
            v = covariance_integral_oracle(-np.eye(6), 2 * np.eye(6), horizon=0.0).v
        assert np.all(v == 0)

    def test_short_horizon_warns(self):
        with pytest.warns(TruncationWarning):
            covariance_integral_oracle(-np.eye(6), 2 * np.eye(6), horizon=2.0)

    def test_adequate_horizon_silent(self, rng):
        a, d = random_hurwitz(rng)
        with warnings.catch_warnings():
            warnings.simplefilter("error", TruncationWarning)
            covariance_integral_oracle(a, d)

    def test_exceptional_point(self, exc):
        dd = drift_diffusion(exc.with_g(0.95 * GC_EXC))
        ref = solve_lyapunov(dd.a, dd.d).v
        v = covariance_integral_oracle(dd.a, dd.d).v
        assert np.linalg.norm(v - ref) <= 1e-6 * np.linalg.norm(ref)

    def test_rejects_unstable(self):
        with pytest.raises(NotHurwitz):
            covariance_integral_oracle(np.eye(6), np.eye(6))


class TestObservables:
    def test_vacuum(self):
        vac = CovarianceMatrix(0.5 * np.eye(6))
        assert number_fluctuations(vac) == (0.0, 0.0, 0.0)
        assert purity(vac) == pytest.approx(1.0, rel=1e-15)
        q = quadrature_moments(vac)
        assert [q[k] for k in ("xx1", "pp1", "xx2", "pp2", "xxb", "ppb")] == [0.5] * 6
        assert [q[k] for k in ("xp1", "xp2", "xpb")] == [0.0] * 3

    def test_unit_covariance(self):
        cov = CovarianceMatrix(np.eye(6))
        assert number_fluctuations(cov) == (0.5, 0.5, 0.5)
        assert purity(cov) == pytest.approx(1 / 8, rel=1e-15)

    def test_quadrature_labels_map_entries(self):
        v = np.arange(36, dtype=float).reshape(6, 6)
        v = v + v.T
        q = quadrature_moments(CovarianceMatrix(v))
        assert q["xp1"] == v[0, 1] and q["xp2"] == v[2, 3] and q["xpb"] == v[4, 5]
        assert q["ppb"] == v[5, 5]

    def test_purity_rejects_singular(self):
        with pytest.raises(DomainError):
            purity(CovarianceMatrix(np.diag([1.0, 1, 1, 1, 1, 0])))

    def test_magnon_cross_moment_vanishes(self, exc, nonexc):
        for p, g_c in ((exc, GC_EXC), (nonexc, GC_NONEXC)):
            for ratio in (1 - 1e-3, 1 + 1e-3):
                dd = drift_diffusion(p.with_g(ratio * g_c))
                cov = solve_lyapunov(dd.a, dd.d)
                assert abs(quadrature_moments(cov)["xpb"]) <= 1e-8 * np.linalg.norm(cov.v)


class TestNoiseSpectrum:
    def test_trivial_zero_frequency(self):
        s = noise_spectrum(-np.eye(6), 2 * np.eye(6), [0.0])
        np.testing.assert_allclose(s.matrices[0], 2 * np.eye(6), atol=1e-15)

    def test_high_frequency_tail(self, rng):
        a, d = random_hurwitz(rng)
        w = 1e5
        s = noise_spectrum(a, d, [w]).matrices[0]
        assert np.linalg.norm(s) * w**2 == pytest.approx(np.linalg.norm(d), rel=1e-3)

    def test_singular_at_threshold_dc(self, exc):
        dd = drift_diffusion(exc.with_g(critical_coupling(exc)))
        with pytest.raises(SingularResolvent) as info:
            noise_spectrum(dd.a, dd.d, [1e-3, 0.0])
        assert info.value.omega == 0.0

    def test_hermitian_psd_and_reflection(self, exc):
        dd = drift_diffusion(exc.with_g(0.97 * GC_EXC))
        half = np.linspace(0.0, 3.0, 16)
        omegas = np.concatenate([-half[:0:-1], half])
        spec = noise_spectrum(dd.a, dd.d, omegas)
        for m in spec.matrices:
            assert np.abs(m - m.conj().T).max() <= 1e-12
            assert np.linalg.eigvalsh(m).min() >= -1e-10 * np.abs(m).max()
        np.testing.assert_allclose(spec.matrices[::-1], spec.matrices.conj(), rtol=0, atol=1e-12)

    def test_works_at_threshold_off_dc(self, exc):
        dd = drift_diffusion(exc.with_g(critical_coupling(exc)))
        spec = noise_spectrum(dd.a, dd.d, [1e-3, 1e-2])
        assert np.all(np.isfinite(spec.matrices))
        assert spec.entry(0, 0).real[0] > spec.entry(0, 0).real[1] > 0

    @pytest.mark.parametrize("ratio", [0.5, 1.5])
    def test_parseval_recovers_covariance(self, exc, ratio):
        dd = drift_diffusion(exc.with_g(ratio * GC_EXC))
        v = solve_lyapunov(dd.a, dd.d).v
        width = 1e3 * max(exc.kappa, exc.omega)

        def diag(w):
            return np.real(np.diag(noise_spectrum(dd.a, dd.d, [w]).matrices[0]))

        # S(-w) = conj(S(w)) so the symmetric integral is twice the real half-line one
        half, _ = scipy.integrate.quad_vec(diag, 0.0, width, epsrel=1e-9, points=(0.5, 1, 2, 3, 5))
        approx = half / np.pi
        np.testing.assert_allclose(approx, np.diag(v), rtol=1e-2)
