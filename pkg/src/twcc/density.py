"""Density evaluation on the 3-torus.

Implements the trivariate wrapped Cauchy copula density in both the rho and
complex-form parametrizations, its bivariate and univariate marginals, all
conditionals, the generalized model with a free denominator offset, and a
d-variate extension normalized numerically.

All evaluators broadcast over numpy angle arrays; angles are reduced modulo
2*pi once at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import (
    DenominatorNonpositiveError,
    DimensionTooLargeError,
    IllegalC1Error,
    NegativeFactorError,
    NegativeRadicandError,
    UnitConcentrationError,
    ZeroParameterError,
)
from .numerics import TWO_PI, QuadratureSpec, elliptic_K_param, wrap_angle
from .params import (
    PairwisePhi,
    PhiTriple,
    RhoParams,
    pair_position,
    _third_index,
)


def _as_rho(p) -> RhoParams:
    if isinstance(p, RhoParams):
        return p
    return RhoParams(*p)


def _phi_value(f) -> float:
    return f.phi if isinstance(f, PairwisePhi) else float(f)


# ---------------------------------------------------------------------------
# normalizing constants
# ---------------------------------------------------------------------------

def _c1_raw(r12, r13, r23):
    return r12 * r13 / r23 + r12 * r23 / r13 + r13 * r23 / r12


def _c4_raw(r12, r13, r23):
    """Radicand of the normalizing constant: ((2*pi)^3 c2)^2."""
    a = r12 * r13 / r23
    b = r12 * r23 / r13
    c = r13 * r23 / r12
    return a * a + b * b + c * c - 2.0 * (r12 * r12 + r13 * r13 + r23 * r23)


def _c2_raw(r12, r13, r23):
    return math.sqrt(_c4_raw(r12, r13, r23)) / TWO_PI**3


def c1(p) -> float:
    """Denominator offset ``rho12 rho13/rho23 + rho12 rho23/rho13 + rho13 rho23/rho12``."""
    p = _as_rho(p)
    return _c1_raw(p.rho12, p.rho13, p.rho23)


def c2(p) -> float:
    """Normalizing constant making the trivariate density integrate to one."""
    p = _as_rho(p)
    rad = _c4_raw(p.rho12, p.rho13, p.rho23)
    if rad <= 0.0:
        raise NegativeRadicandError(
            f"normalizing radicand {rad} <= 0 for validated parameters (internal bug)"
        )
    return math.sqrt(rad) / TWO_PI**3


# ---------------------------------------------------------------------------
# trivariate density
# ---------------------------------------------------------------------------

def twcc_pdf(u1, u2, u3, p):
    """Trivariate wrapped Cauchy copula density at angles ``(u1, u2, u3)``.

    Parameters
    ----------
    u1, u2, u3 : array_like
        Angles in radians; broadcast against each other.
    p : RhoParams or sequence of three floats
        Dependence parameters.

    Returns
    -------
    ndarray or float
        ``c2 * [c1 + 2{rho12 cos(u1-u2) + rho13 cos(u1-u3) + rho23 cos(u2-u3)}]^-1``.
    """
    p = _as_rho(p)
    u1 = wrap_angle(np.asarray(u1, dtype=float))
    u2 = wrap_angle(np.asarray(u2, dtype=float))
    u3 = wrap_angle(np.asarray(u3, dtype=float))
    den = _c1_raw(p.rho12, p.rho13, p.rho23) + 2.0 * (
        p.rho12 * np.cos(u1 - u2)
        + p.rho13 * np.cos(u1 - u3)
        + p.rho23 * np.cos(u2 - u3)
    )
    return c2(p) / den


def twcc_pdf_complex(z1, z2, z3, q: PhiTriple):
    """Complex-form density at unit-modulus points ``(z1, z2, z3)``.

    Equals :func:`twcc_pdf` at ``u_i = arg(z_i)`` when ``q`` comes from
    :func:`twcc.params.rho_to_phi`; the value is invariant under a common real
    rescaling of the phi triple.
    """
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    z3 = np.asarray(z3, dtype=complex)
    p1, p2, p3 = q.phi1, q.phi2, q.phi3
    rad = (
        p1**4 + p2**4 + p3**4
        - 2.0 * (p1 * p1 * p2 * p2 + p1 * p1 * p3 * p3 + p2 * p2 * p3 * p3)
    )
    if rad <= 0.0:
        raise NegativeRadicandError(f"complex-form radicand {rad} <= 0")
    num = math.sqrt(rad) / TWO_PI**3
    return num / np.abs(p1 * z1 + p2 * z2 + p3 * z3) ** 2


# ---------------------------------------------------------------------------
# univariate / bivariate building blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WrappedCauchyParams:
    """Location/concentration pair of a wrapped Cauchy distribution.

    The density is invariant under ``delta -> 1/delta``; ``delta_unit`` is
    the canonical representative in [0, 1) used for numerics, while the raw
    ``delta`` is retained for reporting.
    """

    eta: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "eta", float(wrap_angle(self.eta)))
        object.__setattr__(self, "delta", float(self.delta))
        if self.delta < 0.0 or not math.isfinite(self.delta):
            raise ZeroParameterError("concentration must be finite and >= 0")
        if self.delta == 1.0:
            raise UnitConcentrationError("concentration delta = 1 is degenerate")

    @property
    def delta_unit(self):
        return min(self.delta, 1.0 / self.delta) if self.delta > 0 else 0.0


def wrapped_cauchy_pdf(theta, w: WrappedCauchyParams):
    """Wrapped Cauchy density ``|1-delta^2| / (2*pi (1+delta^2-2 delta cos(theta-eta)))``."""
    theta = np.asarray(theta, dtype=float)
    d = w.delta_unit
    return (1.0 - d * d) / (TWO_PI * (1.0 + d * d - 2.0 * d * np.cos(theta - w.eta)))


def bivariate_marginal_pdf(ui, uj, f):
    """Marginal density of one angle pair.

    Parameters
    ----------
    ui, uj : array_like
        Angles in radians.
    f : PairwisePhi or float
        Marginal dependence parameter; ``f`` and ``1/f`` give the same density.
    """
    phi = _phi_value(f)
    ui = np.asarray(ui, dtype=float)
    uj = np.asarray(uj, dtype=float)
    return (
        abs(1.0 - phi * phi)
        / (4.0 * math.pi**2 * (1.0 + phi * phi - 2.0 * phi * np.cos(ui - uj)))
    )


# ---------------------------------------------------------------------------
# conditionals
# ---------------------------------------------------------------------------

def conditional_pair_given_one(ui, uj, uk, p, fixed=3):
    """Density of the free pair given the angle at index ``fixed``.

    Equals ``2*pi * twcc_pdf`` since every univariate marginal is uniform;
    the free pair is the complement of ``fixed`` in increasing index order.
    """
    p = _as_rho(p)
    slots = {fixed: uk}
    free = [m for m in (1, 2, 3) if m != fixed]
    slots[free[0]] = ui
    slots[free[1]] = uj
    return TWO_PI * twcc_pdf(slots[1], slots[2], slots[3], p)


def conditional_one_given_one(ui, uj, f):
    """Density of one angle given another: wrapped Cauchy in ``ui - uj``."""
    return TWO_PI * bivariate_marginal_pdf(ui, uj, f)


def _conditional_phi_complex(uj, uk, p: RhoParams, index):
    """Vectorized complex parameter of ``U_index | (U_j, U_k)``.

    ``(j, k)`` is the complement of ``index`` in increasing order; returns
    ``-rho_jk (exp(i u_j)/rho_ik + exp(i u_k)/rho_ij)``.
    """
    j, k = [m for m in (1, 2, 3) if m != index]
    vals = p.as_array()
    r_ij = vals[pair_position(index, j)]
    r_ik = vals[pair_position(index, k)]
    r_jk = vals[pair_position(j, k)]
    uj = np.asarray(uj, dtype=float)
    uk = np.asarray(uk, dtype=float)
    return -r_jk * (np.exp(1j * uj) / r_ik + np.exp(1j * uk) / r_ij)


def conditional_params_given_two(uj, uk, p, index) -> WrappedCauchyParams:
    """Wrapped Cauchy parameters of one angle given the other two.

    Parameters
    ----------
    uj, uk : float
        Conditioning angles, ordered by increasing index of the complement
        of ``index``.
    p : RhoParams
        Dependence parameters.
    index : int
        Index (1, 2 or 3) of the free angle.

    Returns
    -------
    WrappedCauchyParams
        Location ``arg(phi)`` and concentration ``|phi|`` of the conditional;
        the concentration never equals 1 for valid parameters.
    """
    p = _as_rho(p)
    phi = complex(_conditional_phi_complex(uj, uk, p, index))
    return WrappedCauchyParams(np.angle(phi), abs(phi))


# ---------------------------------------------------------------------------
# generalized model (free denominator offset)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneralizedParams:
    """Dependence triple plus a free denominator offset ``C1``.

    The offset must exceed ``2(|rho_ij| + |rho_ik| - |rho_jk|)`` on the
    satisfied branch so the denominator stays positive; the normalizing
    constant uses the complete elliptic integral of the first kind and
    reduces to ``c2`` when ``C1 = c1``.
    """

    rho: RhoParams
    c1_free: float

    def __post_init__(self):
        p = self.rho
        i, j, k = p.branch
        vals = p.as_array()
        bound = 2.0 * (
            abs(vals[pair_position(i, j)])
            + abs(vals[pair_position(i, k)])
            - abs(vals[pair_position(j, k)])
        )
        if not self.c1_free > bound * (1.0 + 1e-12):
            raise IllegalC1Error(
                f"free offset must exceed {bound}, got {self.c1_free}"
            )
        r12, r13, r23 = vals
        half = 0.5 * self.c1_free
        factors = (
            half + r12 + r13 + r23,
            half + r12 - r13 - r23,
            half + r13 - r12 - r23,
            half + r23 - r12 - r13,
        )
        if min(factors) <= 0.0:
            raise NegativeFactorError(
                f"normalizer factors must all be positive, got {factors}"
            )
        alpha2 = 2.0 * (factors[0] * factors[1] * factors[2] * factors[3]) ** 0.25
        alpha1 = -0.5 * self.c1_free**2 + 2.0 * (r12 * r12 + r13 * r13 + r23 * r23)
        m = (alpha1 + 0.5 * alpha2 * alpha2) / (alpha2 * alpha2)
        norm = alpha2 / ((4.0 * math.pi) ** 2 * elliptic_K_param(m))
        object.__setattr__(self, "norm_const", norm)
        object.__setattr__(self, "elliptic_param", m)


def generalized_pdf(u1, u2, u3, g: GeneralizedParams):
    """Generalized density with free offset; positive and normalized."""
    p = g.rho
    u1 = wrap_angle(np.asarray(u1, dtype=float))
    u2 = wrap_angle(np.asarray(u2, dtype=float))
    u3 = wrap_angle(np.asarray(u3, dtype=float))
    den = g.c1_free + 2.0 * (
        p.rho12 * np.cos(u1 - u2)
        + p.rho13 * np.cos(u1 - u3)
        + p.rho23 * np.cos(u2 - u3)
    )
    return g.norm_const / den


# ---------------------------------------------------------------------------
# d-variate extension
# ---------------------------------------------------------------------------

#: Per-dimension cap on resolution doublings for the cached normalizer.
_MULTI_MAX_DOUBLINGS = {3: 5, 4: 3, 5: 1}


class MultiRho:
    """Pairwise-dependence parameters of the d-variate extension.

    Parameters
    ----------
    rho : (d, d) array_like
        Symmetric table of pairwise dependence parameters; the diagonal is
        ignored.
    c4 : float
        Denominator offset; must exceed ``2 * sum |rho_ij|`` so the
        denominator is positive everywhere.

    Notes
    -----
    There is no closed-form normalizer for d > 3; the constant is computed
    once per instance by resolution-doubling torus quadrature (relative
    change below 1e-7) and cached. Dimensions up to 5 are supported.
    """

    def __init__(self, rho, c4):
        rho = np.asarray(rho, dtype=float)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("rho must be a square matrix")
        d = rho.shape[0]
        if d < 3:
            raise ValueError("dimension must be at least 3")
        if d > 5:
            raise DimensionTooLargeError(
                f"numeric normalization supports d <= 5, got d = {d}"
            )
        if not np.allclose(rho, rho.T, rtol=0.0, atol=1e-12):
            raise ValueError("rho must be symmetric")
        self.d = d
        self.rho = 0.5 * (rho + rho.T)
        self.c4 = float(c4)
        abs_sum = 2.0 * sum(
            abs(self.rho[i, j]) for i in range(d) for j in range(i + 1, d)
        )
        if not self.c4 > abs_sum * (1.0 + 1e-12):
            raise DenominatorNonpositiveError(
                f"offset must exceed 2*sum|rho_ij| = {abs_sum}, got {c4}"
            )
        self._norm = None

    def _denominator(self, *axes):
        den = self.c4
        for i in range(self.d):
            for j in range(i + 1, self.d):
                den = den + 2.0 * self.rho[i, j] * np.cos(axes[i] - axes[j])
        return den

    @property
    def norm_const(self):
        """Cached reciprocal normalizer: the integral of the unnormalized density."""
        if self._norm is None:
            spec = QuadratureSpec(
                dims=self.d,
                points=16,
                target_rel_tol=1e-7,
                max_doublings=_MULTI_MAX_DOUBLINGS[self.d],
            )
            res = numerics.torus_quadrature(
                lambda *axes: 1.0 / self._denominator(*axes), spec
            )
            self._norm = res.value
        return self._norm


def multivariate_pdf(u, m: MultiRho):
    """Density of the d-variate extension at points ``u`` of shape (..., d)."""
    u = wrap_angle(np.asarray(u, dtype=float))
    if u.shape[-1] != m.d:
        raise ValueError(f"points must have last axis of length {m.d}")
    axes = tuple(u[..., i] for i in range(m.d))
    den = m._denominator(*axes)
    if np.any(den <= 0.0):
        raise DenominatorNonpositiveError("denominator not positive at input points")
    return 1.0 / (den * m.norm_const)
