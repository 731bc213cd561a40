"""
Unit tests for the finite-time kernels, the Airy2->1 kernel and the shock limit law
"""

import numpy as np
import pytest
from scipy.integrate import quad

from src.errors import ConfigError, PrecisionError, PreconditionError, TruncationError
from src.limits.airy import airy_ai
from src.limits.airy21 import (
    airy21_onepoint,
    gaussian_part,
    limit_kernel,
    second_term,
    second_term_quad,
)
from src.limits.kernels import (
    KernelScaling,
    gaussian_limit,
    high_precision,
    kernel_Q,
    kernel_S,
    kernel_Sbar,
    kernel_Sbar_epi,
    scaled_Q,
    scaled_S,
    scaled_Sbar,
)
from src.limits.shock_law import shock_limit_cdf, shock_limit_distribution
from src.limits.tracy_widom import f_goe, table_grid, tracy_widom_table


@pytest.fixture(scope='module')
def goe_table():
    return tracy_widom_table('goe', grid=table_grid(-8.0, 8.0, 0.05), workers=4)


class TestFiniteTimeKernels:
    """Tests for Q, S, Sbar and the stopped-walk Sbar"""

    def test_q_is_negative_binomial(self):
        """Q(n, .) is the law of a sum of n geometric steps"""
        total = sum(kernel_Q(3, dx, 0.25) for dx in range(3, 400))

        assert kernel_Q(1, 1, 0.25) == pytest.approx(0.25)
        assert kernel_Q(3, 2, 0.25) == 0.0
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_q_needs_positive_steps(self):
        """n < 1 is rejected"""
        with pytest.raises(PreconditionError):
            kernel_Q(0, 3, 0.25)

    def test_s_at_time_zero(self):
        """At t=0 the coefficient is a signed binomial"""
        # k = n + x - y = 1: (3/4) * 4^2 * (-1) * binom(2, 1)
        assert kernel_S(0.0, 2, 1, 0, 0.25) == pytest.approx(-24.0)
        assert kernel_S(0.0, 1, 5, 0, 0.25) == 0.0

    def test_sbar_vanishes_for_non_positive_n(self):
        """Sbar is zero for n <= 0"""
        assert kernel_Sbar(10.0, 0, 0, 3, 0.25) == 0.0
        assert kernel_Sbar_epi(10.0, 0, 0, 3, 0.25) == 0.0

    def test_epi_above_data_is_sbar(self):
        """A start above X0(1) stops at once"""
        assert kernel_Sbar_epi(20.0, 5, 0, 8, 0.25) == pytest.approx(kernel_Sbar(20.0, 5, 0, 8, 0.25))

    def test_epi_truncation(self):
        """Mass lost below the cutoff beyond the tolerance raises"""
        with pytest.raises(TruncationError, match="lost mass"):
            kernel_Sbar_epi(20.0, 5, -10, 8, 0.25, truncation=-1.0)

    def test_epi_below_data_is_finite(self):
        """The stopped walk gives a finite value below the initial data"""
        assert np.isfinite(kernel_Sbar_epi(20.0, 5, -10, 8, 0.25))

    def test_time_limit(self):
        """Times beyond 500 are refused"""
        with pytest.raises(PreconditionError, match="finite-time kernels"):
            kernel_S(600.0, 5, 0, 0, 0.25)

    def test_precision_escalation_gives_up(self):
        """A value that keeps changing with precision raises after the last attempt"""
        with pytest.raises(PrecisionError):
            high_precision(lambda ctx: ctx.mpf(ctx.prec))

    def test_precision_escalation_accepts_stable_value(self):
        """Stable values come back as floats"""
        assert high_precision(lambda ctx: ctx.mpf(1) / 3) == pytest.approx(1.0 / 3.0)


class TestScaledKernels:
    """Scaled finite-time entries against their Airy-type limits"""

    def test_scaling_point(self):
        """Effective coordinates stay within one lattice step of the request"""
        point = KernelScaling(0.25, 500.0, 0.3, -0.2, 0.1)

        offsets = point.offsets()
        assert abs(offsets['xi']) < 1.0 / (point.lam * point.c * 500.0 ** (2.0 / 3.0))
        assert abs(offsets['u']) <= 0.5 / point.prefactor + 1e-12
        assert abs(offsets['v']) <= 0.5 / point.prefactor + 1e-12

    def test_q_matches_heat_kernel(self):
        """Scaled Q at t=2000 within 2% of the Gaussian limit"""
        result = scaled_Q(0.25, 2000.0, 0.0, 0.0, 1.0, 0.0)

        assert result['value'] == pytest.approx(result['limit'], rel=0.02)

    def test_gaussian_limit(self):
        """Heat kernel with variance 2 delta_xi at the centre"""
        assert gaussian_limit(1.0, 0.0) == pytest.approx(1.0 / np.sqrt(4.0 * np.pi))

    def test_s_matches_airy_limit(self):
        """Scaled S at t=500 within 5% of its limit"""
        result = scaled_S(0.25, 500.0, 0.0, 0.0, 0.0)

        assert result['limit'] == pytest.approx(2.0 ** (1.0 / 3.0) * 0.3550280539, rel=0.05)
        assert result['value'] == pytest.approx(result['limit'], rel=0.05)

    def test_sbar_matches_airy_limit(self):
        """Scaled Sbar at t=500 within 5% of its limit"""
        result = scaled_Sbar(0.25, 500.0, 0.0, 0.0, 0.0)

        assert result['value'] == pytest.approx(result['limit'], rel=0.05)


class TestAiry21:
    """Tests for the limit kernel and the Airy2->1 one-point law"""

    def test_gaussian_part_is_causal(self):
        """Zero unless xi_j > xi_i"""
        assert gaussian_part(0.5, 0.0, 0.2, 0.0) == 0.0
        assert gaussian_part(0.0, 0.0, 1.0, 0.0) == pytest.approx(1.0 / np.sqrt(4.0 * np.pi))

    @pytest.mark.parametrize('xi_i, u_i, xi_j, u_j', [
        (0.3, 0.5, 0.2, -0.2),
        (0.1, -0.4, 0.4, 0.3),
    ])
    def test_second_term_forms_agree(self, xi_i, u_i, xi_j, u_j):
        """Direct and rewritten forms agree to 1e-8, vectorized and adaptive"""
        direct = second_term_quad(xi_i, u_i, xi_j, u_j, form=1)
        rewritten = second_term_quad(xi_i, u_i, xi_j, u_j, form=2)

        assert direct == pytest.approx(rewritten, abs=1e-8)
        assert float(second_term(xi_i, u_i, xi_j, u_j, form=2)) == pytest.approx(rewritten, abs=1e-8)

    def test_unknown_form(self):
        """Only forms 1 and 2 exist"""
        with pytest.raises(ConfigError, match="unknown form"):
            second_term(0.0, 0.0, 0.0, 0.0, form=3)

    def test_flat_regime_kernel(self):
        """Deep on the flat side the kernel reduces to Ai(u + u')"""
        value = limit_kernel(np.array([5.0]), np.array([0.2]), np.array([5.0]), np.array([0.4]))[0]

        assert value == pytest.approx(airy_ai(0.6), abs=1e-3)

    @pytest.mark.parametrize('s', [-2.0, 0.0, 1.0])
    def test_onepoint_flat_regime(self, s):
        """At xi=5 the one-point law is F_GOE(2s) to 1e-3"""
        value = airy21_onepoint(5.0, s, order=40, check=False)

        assert value == pytest.approx(f_goe(2.0 * s, order=40, check=False), abs=1e-3)


class TestShockLaw:
    """Tests for the convolution of two rescaled GOE laws"""

    def test_symmetric_median(self, goe_table):
        """Equal variances give exactly one half at s=0"""
        assert shock_limit_cdf(0.0, 0.25, 0.75, table=goe_table) == pytest.approx(0.5, abs=1e-12)

    def test_survival_decreases(self, goe_table):
        """Survival function falls with s"""
        values = [shock_limit_cdf(s, 0.2, 0.6, table=goe_table) for s in (-3.0, -1.0, 0.0, 1.0, 3.0)]

        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values[0] > 0.9 and values[-1] < 0.1

    def test_argument_range(self, goe_table):
        """|s| > 12 is refused"""
        with pytest.raises(PreconditionError, match="supports"):
            shock_limit_cdf(13.0, 0.25, 0.75, table=goe_table)

    def test_density_ordering(self, goe_table):
        """Densities must satisfy lam < rho"""
        with pytest.raises(ConfigError):
            shock_limit_cdf(0.0, 0.75, 0.25, table=goe_table)

    def test_matches_direct_quadrature(self, goe_table):
        """Stieltjes sum agrees with adaptive quadrature of the convolution"""
        lam, rho, s = 0.2, 0.6, 0.4
        a = (lam * (1 - lam)) ** (2.0 / 3.0) * 2.0 ** (1.0 / 3.0)
        b = (rho * (1 - rho)) ** (2.0 / 3.0) * 2.0 ** (1.0 / 3.0)
        c = 2.0 * (rho - lam) * s
        density = goe_table.density()

        oracle, _ = quad(lambda g: np.interp(g, goe_table.grid, density) * (1.0 - goe_table((c + b * g) / a)),
                         -8.0, 8.0, limit=400)

        assert shock_limit_cdf(s, lam, rho, table=goe_table) == pytest.approx(oracle, abs=2e-3)

    def test_distribution_table(self, goe_table):
        """The tabulated law is a valid distribution function"""
        table = shock_limit_distribution(0.25, 0.75, grid=table_grid(-6.0, 6.0, 0.5), table=goe_table)

        assert table.is_valid()
        assert table(0.0) == pytest.approx(0.5, abs=1e-12)
        assert table.metadata['law'] == 'shock'
