"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest

from twcc import RhoParams, twcc_pdf

TWO_PI = 2.0 * np.pi

#: Convergence-study parameters (all three close to the truth from n=500 on).
RHO_FIG = (1.0, 0.25, 4.0)
#: Bootstrap-study truth.
RHO_TABLE = (1.0, -4.0, -0.25)
#: Protein-data estimates (product within 5e-4 of one).
RHO_PROTEIN = (0.611, -1.31, -1.25)


@pytest.fixture
def rho_fig():
    return RhoParams(*RHO_FIG)


@pytest.fixture
def rho_table():
    return RhoParams(*RHO_TABLE)


@pytest.fixture
def rho_protein():
    return RhoParams(*RHO_PROTEIN)


def make_random_rho(rng, normalized=False, sign_pattern=None, dominance=(1.2, 2.5)):
    """Random valid triple built through the complex-form parameters.

    The dominant magnitude is a factor ``dominance`` above the sum of the
    other two, keeping the density moderately concentrated so quadrature
    oracles converge quickly. ``sign_pattern`` is "all-positive",
    "two-negative", or None for a random choice.
    """
    mags = rng.uniform(0.3, 1.5, size=3)
    dom = rng.integers(0, 3)
    others = [i for i in range(3) if i != dom]
    mags[dom] = (mags[others[0]] + mags[others[1]]) * rng.uniform(*dominance)
    phi = mags.copy()
    if sign_pattern is None:
        sign_pattern = "two-negative" if rng.random() < 0.5 else "all-positive"
    if sign_pattern == "two-negative":
        phi[rng.integers(0, 3)] *= -1.0
    p = RhoParams(phi[0] * phi[1], phi[0] * phi[2], phi[1] * phi[2])
    if not normalized:
        p = p.scaled(rng.uniform(0.5, 2.0))
    else:
        from twcc import normalize_rho

        p = normalize_rho(p)
    return p


def fft_trig_moments(p, n=128):
    """All trigonometric moments at once through one FFT of the density grid.

    Returns a callable mapping an order triple to the quadrature moment;
    exact to spectral accuracy for the smooth periodic density.
    """
    x = np.arange(n) * (TWO_PI / n)
    t = twcc_pdf(x[:, None, None], x[None, :, None], x[None, None, :], p)
    f = np.fft.fftn(t) * (TWO_PI / n) ** 3
    def moment(order):
        p1, p2, p3 = order
        return complex(f[(-p1) % n, (-p2) % n, (-p3) % n])
    return moment


def grid_argmax(fn, n=64):
    """Argmax and argmin indices of a trivariate density on the n^3 lattice."""
    x = np.arange(n) * (TWO_PI / n)
    vals = fn(x[:, None, None], x[None, :, None], x[None, None, :])
    return (
        np.unravel_index(np.argmax(vals), vals.shape),
        np.unravel_index(np.argmin(vals), vals.shape),
    )


def offsets_match_line(idx, report, n):
    """Whether a lattice extremum lies within one cell of a reported line."""
    d12 = (idx[0] - idx[1]) % n
    d13 = (idx[0] - idx[2]) % n
    want12 = int(round(report.delta12 / (TWO_PI / n))) % n
    want13 = int(round(report.delta13 / (TWO_PI / n))) % n
    def close(a, b):
        return min((a - b) % n, (b - a) % n) <= 1
    return close(d12, want12) and close(d13, want13)
