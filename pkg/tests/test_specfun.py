"""Special-function kernel tests.

Reference values were precomputed with 50-digit mpmath: the incomplete
beta by adaptive quadrature of the beta integrand, the noncentral t and F
CDFs by Poisson-mixture series with 1e-16 term tolerance summed around
the mixture mode.
"""

import math

import numpy as np
import pytest

from cvrunrules.errors import DomainError
from cvrunrules.specfun import (
    NoncentralParams,
    noncentral_f_cdf,
    noncentral_f_cdf_cdflib,
    noncentral_f_pdf,
    noncentral_t_cdf,
    reg_inc_beta,
)

KERNEL_ATOL = 1e-13       # reg_inc_beta contract
CDF_ATOL = 1e-10          # noncentral CDF contract
FD_RTOL = 1e-6            # pdf vs finite-differenced cdf


class TestRegIncBeta:
    def test_endpoints(self):
        assert reg_inc_beta(0.0, 2.0, 3.0) == 0.0
        assert reg_inc_beta(1.0, 2.0, 3.0) == 1.0

    def test_uniform_case(self):
        # I_x(1, 1) = x
        assert reg_inc_beta(0.5, 1.0, 1.0) == pytest.approx(0.5, abs=KERNEL_ATOL)

    def test_quadrature_oracle(self):
        # mpmath.quad of t^1.5 (1-t)^3 / B(2.5, 4) over [0, 0.3], 50 digits
        assert reg_inc_beta(0.3, 2.5, 4.0) == pytest.approx(0.35219758590676723646, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            reg_inc_beta(-0.1, 2.0, 3.0)
        with pytest.raises(DomainError):
            reg_inc_beta(1.1, 2.0, 3.0)
        with pytest.raises(DomainError):
            reg_inc_beta(0.5, 0.0, 3.0)
        with pytest.raises(DomainError):
            reg_inc_beta(0.5, 2.0, -1.0)

    def test_complement_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a, b = rng.uniform(0.3, 20.0, size=2)
            x = rng.uniform(0.0, 1.0)
            lhs = reg_inc_beta(x, a, b)
            rhs = 1.0 - reg_inc_beta(1.0 - x, b, a)
            assert lhs == pytest.approx(rhs, abs=1e-13)


class TestNoncentralT:
    def test_central_symmetric(self):
        assert noncentral_t_cdf(0.0, 4.0, 0.0) == pytest.approx(0.5, abs=KERNEL_ATOL)

    def test_limit_to_one(self):
        assert noncentral_t_cdf(1e12, 4.0, 3.0) == pytest.approx(1.0, abs=1e-12)

    def test_series_oracle(self):
        assert noncentral_t_cdf(1.5, 7.0, 2.1) == pytest.approx(0.27135990440121613806, abs=CDF_ATOL)

    def test_large_delta(self):
        # delta = sqrt(2000); mixture mode near j = 1000
        delta = math.sqrt(2000.0)
        assert noncentral_t_cdf(50.0, 14.0, delta) == pytest.approx(0.6694649184569313, abs=CDF_ATOL)

    def test_negative_argument_reflection(self):
        nu, delta = 6.0, 1.3
        for x in (0.5, 1.0, 2.5):
            assert noncentral_t_cdf(-x, nu, delta) == pytest.approx(
                1.0 - noncentral_t_cdf(x, nu, -delta), abs=1e-12
            )

    def test_monotone_in_x(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            nu = rng.uniform(2.0, 30.0)
            delta = rng.uniform(0.0, 60.0)
            xs = np.sort(rng.uniform(-5.0, delta + 50.0, size=12))
            vals = [noncentral_t_cdf(float(x), nu, delta) for x in xs]
            assert all(0.0 <= v <= 1.0 for v in vals)
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_bad_nu(self):
        with pytest.raises(DomainError):
            noncentral_t_cdf(1.0, 0.0, 1.0)


class TestNoncentralFCdf:
    def test_support_boundary(self):
        p = NoncentralParams(1.0, 4.0, 5.0)
        assert noncentral_f_cdf(0.0, p) == 0.0
        assert noncentral_f_cdf(-1.0, p) == 0.0

    def test_central_reduction(self):
        # lambda = 0 reduces to the central F: I with a = 1/2, b = 2
        p = NoncentralParams(1.0, 4.0, 0.0)
        x = 3.0
        u = x / (x + 4.0)
        assert noncentral_f_cdf(x, p) == pytest.approx(reg_inc_beta(u, 0.5, 2.0), abs=KERNEL_ATOL)

    def test_series_oracle_large_lambda_tail(self):
        # deep left tail at lambda = 500: underflow handling, abs accuracy
        p = NoncentralParams(1.0, 4.0, 500.0)
        v = noncentral_f_cdf(2.0, p)
        assert v == pytest.approx(1.3616113836265540e-71, abs=1e-13)
        assert v >= 0.0

    def test_series_oracle_large_lambda_body(self):
        p = NoncentralParams(1.0, 4.0, 500.0)
        assert noncentral_f_cdf(1002.0, p) == pytest.approx(0.73575889392280372, abs=CDF_ATOL)

    def test_series_oracle_very_large_lambda(self):
        p = NoncentralParams(1.0, 14.0, 6000.0)
        assert noncentral_f_cdf(13590.42, p) == pytest.approx(0.96153258122633698, abs=CDF_ATOL)

    def test_monotone_and_bounded(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            df2 = rng.uniform(2.0, 30.0)
            lam = rng.uniform(0.0, 1e4)
            p = NoncentralParams(1.0, df2, lam)
            scale = max(lam, 10.0)
            xs = np.sort(rng.uniform(0.0, 4.0 * scale, size=10))
            vals = [noncentral_f_cdf(float(x), p) for x in xs]
            assert all(0.0 <= v <= 1.0 for v in vals)
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    # At lambda = 24000 the mode weight is seeded from lgamma(12001); its
    # few-ulp error is ~1e-11 in the log, so the mass identity cannot hold
    # tighter than that in double precision (the CDF stays within its
    # 1e-10 absolute contract because the factor is common to all terms).
    @pytest.mark.parametrize("lam,tol", [(0.5, 1e-12), (5.0, 1e-12), (500.0, 1e-12), (24000.0, 2e-11)])
    def test_poisson_weights_normalized(self, lam, tol):
        # the mixture weights, accumulated by the same mode-centered
        # recurrence the evaluators use, must carry total mass 1
        half = lam / 2.0
        j0 = int(half)
        w0 = math.exp(-half + j0 * math.log(half) - math.lgamma(j0 + 1))
        total, w, j = w0, w0, j0
        while True:
            w *= half / (j + 1)
            j += 1
            total += w
            if w < 1e-18 * total:
                break
        w, j = w0, j0
        while j > 0:
            w *= j / half
            j -= 1
            total += w
            if w < 1e-18 * total:
                break
        assert total == pytest.approx(1.0, abs=tol)

    def test_invalid_params(self):
        with pytest.raises(DomainError):
            NoncentralParams(0.0, 4.0, 1.0)
        with pytest.raises(DomainError):
            NoncentralParams(1.0, -2.0, 1.0)
        with pytest.raises(DomainError):
            NoncentralParams(1.0, 4.0, -0.5)


class TestNoncentralFPdf:
    def test_domain(self):
        with pytest.raises(DomainError):
            noncentral_f_pdf(0.0, NoncentralParams(1.0, 4.0, 5.0))

    def test_central_reduction_closed_form(self):
        # central F(1, 4) density at x = 1
        d1, d2, x = 1.0, 4.0, 1.0
        expected = (
            math.exp(math.lgamma(2.5) - math.lgamma(0.5) - math.lgamma(2.0))
            * (d1 / d2) ** (d1 / 2)
            * x ** (d1 / 2 - 1)
            * (1 + d1 * x / d2) ** (-(d1 + d2) / 2)
        )
        assert noncentral_f_pdf(x, NoncentralParams(d1, d2, 0.0)) == pytest.approx(expected, rel=1e-12)

    def test_normalization(self):
        from scipy.integrate import quad

        p = NoncentralParams(1.0, 4.0, 5.0)
        total, err = quad(lambda x: noncentral_f_pdf(x, p), 0.0, np.inf, limit=400)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_finite_difference_of_cdf(self):
        p = NoncentralParams(1.0, 4.0, 5.0)
        x, h = 1.7, 1e-5
        fd = (noncentral_f_cdf(x + h, p) - noncentral_f_cdf(x - h, p)) / (2 * h)
        assert noncentral_f_pdf(x, p) == pytest.approx(fd, rel=FD_RTOL)

    def test_fd_consistency_random_draws(self):
        # cdf/pdf consistency across the operating parameter range
        rng = np.random.default_rng(17)
        for _ in range(100):
            df2 = rng.uniform(2.0, 30.0)
            lam = rng.uniform(0.0, 1e4)
            p = NoncentralParams(1.0, df2, lam)
            center = max(lam, 5.0)
            x = rng.uniform(0.3 * center, 2.0 * center)
            h = 1e-5 * max(x, 1.0)
            fd = (noncentral_f_cdf(x + h, p) - noncentral_f_cdf(x - h, p)) / (2 * h)
            pdf = noncentral_f_pdf(x, p)
            if pdf > 1e-12:
                assert pdf == pytest.approx(fd, rel=1e-5)


class TestCdflibProfile:
    """The compat evaluator must mimic legacy truncation, not accuracy."""

    def test_tracks_exact_loosely(self):
        p = NoncentralParams(1.0, 4.0, 125.0)
        exact = noncentral_f_cdf(30.0, p)
        legacy = noncentral_f_cdf_cdflib(30.0, p)
        assert legacy == pytest.approx(exact, abs=5e-3)
        assert legacy != pytest.approx(exact, abs=1e-12)

    def test_truncation_underestimates_right_tail(self):
        # stopping at 1e-4 of the running sum drops upper-mixture mass
        p = NoncentralParams(1.0, 14.0, 6000.0)
        assert noncentral_f_cdf_cdflib(13590.42, p) < noncentral_f_cdf(13590.42, p)

    def test_support_and_central_fallback(self):
        p = NoncentralParams(1.0, 9.0, 0.0)
        assert noncentral_f_cdf_cdflib(0.0, p) == 0.0
        assert noncentral_f_cdf_cdflib(3.0, p) == pytest.approx(
            noncentral_f_cdf(3.0, p), abs=1e-13
        )

    def test_scipy_cross_check_exact_kernel(self):
        # independent implementation comparison on moderate parameters
        import scipy.stats as st

        for (x, d2, lam) in [(1.0, 4.0, 5.0), (40.0, 9.0, 80.0), (700.0, 14.0, 900.0)]:
            p = NoncentralParams(1.0, d2, lam)
            assert noncentral_f_cdf(x, p) == pytest.approx(st.ncf.cdf(x, 1, d2, lam), abs=1e-9)
