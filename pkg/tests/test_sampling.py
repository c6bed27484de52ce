import numpy as np
import pytest
from scipy.stats import chi2

from twcc import (
    RhoParams,
    RngState,
    WrappedCauchyParams,
    pairwise_phi,
    sample_twcc,
    twcc_pdf,
    wrapped_cauchy_quantile,
)

from conftest import TWO_PI, make_random_rho


class TestWrappedCauchyQuantile:
    def test_zero_concentration_is_uniform_rotation(self):
        w = WrappedCauchyParams(1.3, 0.0)
        omega = np.linspace(0.01, 0.99, 23)
        expected = (1.3 + TWO_PI * (omega - 0.5)) % TWO_PI
        assert np.allclose(wrapped_cauchy_quantile(omega, w), expected, atol=1e-12)

    def test_median_maps_to_location(self):
        w = WrappedCauchyParams(2.2, 0.6)
        assert wrapped_cauchy_quantile(0.5, w) == pytest.approx(2.2, abs=1e-15)

    def test_first_trig_moment(self):
        eta, delta = 1.0, 0.55
        w = WrappedCauchyParams(eta, delta)
        gen = RngState(42).generator()
        theta = wrapped_cauchy_quantile(gen.random(10**6), w)
        z = np.exp(1j * theta)
        emp = z.mean()
        target = delta * np.exp(1j * eta)
        se = np.sqrt((z.real.var() + z.imag.var()) / len(theta))
        assert abs(emp - target) < 3.0 * se


class TestSampleTwcc:
    def test_determinism_and_stream_independence(self, rho_fig):
        a = sample_twcc(500, rho_fig, RngState(7, 3)).angles
        b = sample_twcc(500, rho_fig, RngState(7, 3)).angles
        c = sample_twcc(500, rho_fig, RngState(7, 4)).angles
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_empty_and_shapes(self, rho_fig):
        s = sample_twcc(0, rho_fig, RngState(1))
        assert s.angles.shape == (0, 3)
        s = sample_twcc(17, rho_fig, RngState(1))
        assert s.angles.shape == (17, 3)
        assert np.all((s.angles >= 0) & (s.angles < TWO_PI))

    def test_pairwise_first_moments(self, rho_fig):
        n = 400_000
        ang = sample_twcc(n, rho_fig, RngState(123)).angles
        for i, j in ((1, 2), (1, 3), (2, 3)):
            emp = np.mean(np.exp(1j * (ang[:, i - 1] - ang[:, j - 1])))
            target = pairwise_phi(rho_fig, (i, j)).varphi
            assert abs(emp - target) < 3.0 / np.sqrt(n)

    def test_nonzero_order_sum_moment_vanishes(self, rho_fig):
        n = 200_000
        ang = sample_twcc(n, rho_fig, RngState(5)).angles
        emp = np.mean(np.exp(1j * (ang[:, 0] + ang[:, 1] + ang[:, 2])))
        assert abs(emp) < 3.0 / np.sqrt(n)

    def test_marginal_uniformity_kuiper(self, rho_fig):
        n = 100_000
        ang = sample_twcc(n, rho_fig, RngState(99)).angles
        u = np.sort(ang[:, 1]) / TWO_PI
        grid = np.arange(1, n + 1) / n
        d_plus = np.max(grid - u)
        d_minus = np.max(u - (np.arange(n) / n))
        v = (d_plus + d_minus) * (np.sqrt(n) + 0.155 + 0.24 / np.sqrt(n))
        assert v < 2.0  # 99% critical value of the Kuiper statistic

    def test_histogram_matches_density(self):
        # Reduced chi-square goodness of fit on an 8^3 partition.
        rng = np.random.default_rng(31)
        p = make_random_rho(rng)
        n = 200_000
        ang = sample_twcc(n, p, RngState(202)).angles
        k = 8
        idx = np.floor(ang / (TWO_PI / k)).astype(int)
        counts = np.zeros((k, k, k))
        np.add.at(counts, (idx[:, 0], idx[:, 1], idx[:, 2]), 1)
        # Cell probabilities by a fine midpoint rule inside each cell.
        sub = 8
        m = k * sub
        x = (np.arange(m) + 0.5) * (TWO_PI / m)
        dens = twcc_pdf(x[:, None, None], x[None, :, None], x[None, None, :], p)
        probs = dens.reshape(k, sub, k, sub, k, sub).mean(axis=(1, 3, 5)) * (TWO_PI / k) ** 3
        expected = n * probs
        stat = float(np.sum((counts - expected) ** 2 / expected))
        dof = k**3 - 1
        lo, hi = chi2.ppf([0.0005, 0.9995], dof)
        assert lo < stat < hi
