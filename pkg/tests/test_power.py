import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from benford_smooth.alternatives import AlternativeSpec, alternative_pmf
from benford_smooth.core import Pmf9, benford_pmf, build_orthonormal_polynomials
from benford_smooth.errors import ApproximationError, DomainError
from benford_smooth.montecarlo import McConfig, mc_critical_value, mc_power
from benford_smooth.power import (
    PowerProblem,
    cumulant_coefficients,
    approximate_power,
    ncx2_sf,
    spectral_form,
    weighted_chisq_tail,
)


def g(family, beta):
    return alternative_pmf(AlternativeSpec(family, beta))


def tail_with_shift(lam, delta, t, squared=True):
    """Moment-matching tail written out longhand; ``squared=False`` uses the ``l + d`` shift."""
    c1, c2, c3, c4 = cumulant_coefficients(lam, delta)
    s1, s2 = c3 / c2**1.5, c4 / c2**2
    a = 1 / (s1 - math.sqrt(s1**2 - s2)) if s1**2 > s2 else 1 / s1
    d2 = s1 * a**3 - a**2
    ell = a**2 - 2 * d2
    shift = ell + (d2 if squared else math.sqrt(d2))
    x = a * (t - c1) / math.sqrt(c2) + shift
    return float(stats.ncx2.sf(x, ell, d2))


class TestSpectralForm:
    def test_benford_is_identity(self):
        sf = spectral_form(PowerProblem(benford_pmf(), 500, K=5))
        assert np.abs(sf.nu).max() < 1e-8
        assert np.abs(sf.sigma - np.eye(5)).max() < 1e-8
        np.testing.assert_allclose(sf.lam, 1, atol=1e-8)
        assert np.abs(sf.delta).max() < 1e-8

    def test_matches_loop_oracle(self):
        problem = PowerProblem(g("pietronero", 2.0), 50, K=2)
        sf = spectral_form(problem)
        hs = build_orthonormal_polynomials(2)
        gp = problem.g.p
        nu = [math.sqrt(50) * math.fsum(float(h(d)) * gp[d - 1] for d in range(1, 10)) for h in hs]
        for i in range(2):
            assert sf.nu[i] == pytest.approx(nu[i], abs=1e-12)
            for j in range(2):
                s = math.fsum(float(hs[i](d)) * float(hs[j](d)) * gp[d - 1] for d in range(1, 10)) - nu[i] * nu[j] / 50
                assert sf.sigma[i, j] == pytest.approx(s, abs=1e-12)

    @pytest.mark.parametrize("family, beta, n", [("pietronero", 2.0, 50), ("hurlimann", 2.4, 750), ("contaminated2", 10.0, 500)])
    def test_reconstruction(self, family, beta, n):
        sf = spectral_form(PowerProblem(g(family, beta), n, K=4))
        P = sf.eigvecs
        assert np.abs(sf.sigma - P @ np.diag(sf.lam) @ P.T).max() < 1e-10
        assert np.abs(sf.sigma - sf.sigma.T).max() < 1e-10

    @pytest.mark.parametrize("family, beta, n", [("pietronero", 2.0, 50), ("mixture", 0.2, 500), ("rodriguez", -2.0, 250)])
    def test_first_cumulant_two_ways(self, family, beta, n):
        sf = spectral_form(PowerProblem(g(family, beta), n, K=3))
        direct = np.trace(sf.sigma) + sf.nu @ sf.nu
        spectral = np.sum(sf.lam) + np.sum(sf.delta**2 * sf.lam)
        assert direct == pytest.approx(spectral, abs=1e-8)
        assert cumulant_coefficients(sf.lam, sf.delta)[0] == pytest.approx(direct, abs=1e-8)

    def test_delta_orientation(self):
        # sum_k lam_k delta_k**2 recovers the squared length of nu.
        sf = spectral_form(PowerProblem(g("hurlimann", 0.8), 750, K=3))
        assert np.sum(sf.lam * sf.delta**2) == pytest.approx(sf.nu @ sf.nu, rel=1e-10)

    def test_degenerate_alternative(self):
        with pytest.raises(ApproximationError):
            spectral_form(PowerProblem(Pmf9(np.r_[1.0, np.zeros(8)]), 100, K=2))

    def test_problem_validation(self):
        with pytest.raises(DomainError):
            PowerProblem(benford_pmf(), 100, K=8)
        with pytest.raises(DomainError):
            PowerProblem(benford_pmf(), 0)
        with pytest.raises(DomainError):
            PowerProblem(benford_pmf(), 100, alpha=1.0)


class TestTail:
    def test_single_central(self):
        t = stats.chi2.ppf(0.95, 1)
        assert weighted_chisq_tail([1.0], [0.0], t) == pytest.approx(0.05, abs=1e-6)

    def test_two_central(self):
        assert weighted_chisq_tail([1.0, 1.0], [0.0, 0.0], 5.991) == pytest.approx(0.05, abs=1e-4)

    def test_simulation_oracle(self):
        rng = np.random.default_rng(314159)
        lam, delta, t = np.array([2.0, 1.0]), np.array([1.0, 0.5]), 8.0
        hits = 0
        for _ in range(10):
            z = rng.standard_normal((1_000_000, 2)) + delta
            hits += np.count_nonzero((z**2) @ lam > t)
        empirical = hits / 10_000_000
        approx = weighted_chisq_tail(lam, delta, t)
        assert approx == pytest.approx(empirical, abs=0.003)
        assert approx == pytest.approx(tail_with_shift(lam, delta, t), abs=1e-9)
        # The l + d shift fails the same tolerance.
        assert abs(tail_with_shift(lam, delta, t, squared=False) - empirical) > 0.003

    def test_invalid_weights(self):
        with pytest.raises(DomainError):
            weighted_chisq_tail([], [], 1.0)
        with pytest.raises(DomainError):
            weighted_chisq_tail([1.0, 0.0], [0.0, 0.0], 1.0)


class TestNoncentralSeries:
    @pytest.mark.parametrize(
        "x, df, nc",
        [(3.0, 1.0, 0.0), (8.0, 2.3, 1.7), (50.0, 0.6, 30.0), (0.5, 4.0, 0.2), (400.0, 3.5, 300.0), (20.0, 1.2, 80.0)],
    )
    def test_against_scipy(self, x, df, nc):
        assert ncx2_sf(x, df, nc) == pytest.approx(stats.ncx2.sf(x, df, nc) if nc else stats.chi2.sf(x, df), rel=1e-8, abs=1e-14)

    @given(
        x=st.floats(min_value=0.01, max_value=200),
        df=st.floats(min_value=0.1, max_value=20),
        nc=st.floats(min_value=0.01, max_value=100),
    )
    @settings(max_examples=60, deadline=None)
    def test_property_against_scipy(self, x, df, nc):
        assert ncx2_sf(x, df, nc) == pytest.approx(stats.ncx2.sf(x, df, nc), rel=1e-7, abs=1e-12)

    def test_edges(self):
        assert ncx2_sf(0.0, 2.0, 3.0) == 1.0
        with pytest.raises(DomainError):
            ncx2_sf(1.0, 0.0, 1.0)


class TestApproximatePower:
    @pytest.mark.parametrize("K", [1, 2, 5, 7])
    def test_benford_gives_level(self, K):
        assert approximate_power(PowerProblem(benford_pmf(), 300, K=K, alpha=0.05)) == pytest.approx(0.05, abs=1e-6)

    def test_increasing_in_n(self):
        powers = [approximate_power(PowerProblem(g("mixture", 0.15), n)) for n in (50, 100, 200, 400, 800)]
        assert all(b > a for a, b in zip(powers, powers[1:]))

    def test_threshold_override(self):
        p = PowerProblem(g("pietronero", 2.0), 50)
        assert approximate_power(p, threshold=7.0) < approximate_power(p, threshold=5.0)

    @pytest.mark.slow
    def test_matches_simulation(self):
        n, alt = 50, AlternativeSpec("pietronero", 2.0)
        crit = mc_critical_value("T2", McConfig(50_000, 17, n))
        simulated = mc_power("T2", alt, McConfig(100_000, 18, n), crit)
        approx = approximate_power(PowerProblem(alternative_pmf(alt), n, K=2), threshold=crit.value)
        assert approx == pytest.approx(simulated, abs=0.02)
