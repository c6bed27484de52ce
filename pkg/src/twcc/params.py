"""Parameter spaces of the trivariate wrapped Cauchy copula.

The model is indexed by a triple of nonzero reals ``(rho12, rho13, rho23)``
whose product is positive and for which at least one permutation ``(i, j, k)``
satisfies the strict dominance inequality

    |rho_jk| < |rho_ij * rho_ik| / (|rho_ij| + |rho_ik|).

This module owns that validity check and every reparametrization of the
triple: the complex-form triple ``(phi1, phi2, phi3)``, the pairwise marginal
parameter ``phi_ij`` with its unit-disc representative, the per-branch
``(zeta, rho_ik)`` coordinates used for unconstrained likelihood
maximization, and the starred full/partial dependence pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BranchInfeasibleError,
    DegenerateBoundaryError,
    NoValidPermutationError,
    SignConditionError,
    ZeroParameterError,
)

#: Index pairs in canonical order; position in this tuple is the coordinate
#: order used by arrays returned from :meth:`RhoParams.as_array`, the score,
#: and the Fisher information.
PAIRS = ((1, 2), (1, 3), (2, 3))

#: Permutation branches ``(i, j, k)``: the pair ``(j, k)`` is the one bounded
#: by the dominance inequality and ``i`` is the dominant complex-form index.
BRANCHES = ((1, 2, 3), (2, 3, 1), (3, 1, 2))

#: Relative margin enforcing the *strict* inequalities: values closer to the
#: boundary than this are rejected as degenerate.
VALIDITY_MARGIN = 1e-12

_PAIR_POS = {(1, 2): 0, (2, 1): 0, (1, 3): 1, (3, 1): 1, (2, 3): 2, (3, 2): 2}


def _third_index(i, j):
    return 6 - i - j


def pair_position(i, j):
    """Position of the unordered pair ``{i, j}`` in :data:`PAIRS`."""
    try:
        return _PAIR_POS[(i, j)]
    except KeyError:
        raise ValueError(f"not an index pair from {{1,2,3}}: ({i}, {j})") from None


def _branch_slack(values, branch):
    """Return (slack, scale) of the dominance inequality on a branch.

    ``slack > 0`` means the branch inequality holds strictly; ``scale`` is
    the right-hand side used for relative comparisons.
    """
    i, j, k = branch
    r_ij = values[pair_position(i, j)]
    r_ik = values[pair_position(i, k)]
    r_jk = values[pair_position(j, k)]
    rhs = abs(r_ij * r_ik) / (abs(r_ij) + abs(r_ik))
    return rhs - abs(r_jk), rhs


@dataclass(frozen=True)
class RhoParams:
    """Validated dependence triple of the trivariate copula.

    Construction performs full validation and records every permutation
    branch whose dominance inequality holds strictly (at most one can).
    Instances are immutable and safe to share between threads.
    """

    rho12: float
    rho13: float
    rho23: float
    branches: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = (float(self.rho12), float(self.rho13), float(self.rho23))
        object.__setattr__(self, "rho12", vals[0])
        object.__setattr__(self, "rho13", vals[1])
        object.__setattr__(self, "rho23", vals[2])
        if not all(math.isfinite(v) for v in vals):
            raise ZeroParameterError("dependence parameters must be finite")
        if any(v == 0.0 for v in vals):
            raise ZeroParameterError("dependence parameters must be nonzero")
        if vals[0] * vals[1] * vals[2] <= 0.0:
            raise SignConditionError(
                "rho12 * rho13 * rho23 must be positive, got "
                f"{vals[0] * vals[1] * vals[2]!r}"
            )
        satisfied = []
        near_boundary = False
        for branch in BRANCHES:
            slack, scale = _branch_slack(vals, branch)
            if slack > VALIDITY_MARGIN * scale:
                satisfied.append(branch)
            elif abs(slack) <= VALIDITY_MARGIN * scale:
                near_boundary = True
        if not satisfied:
            if near_boundary:
                raise DegenerateBoundaryError(
                    "parameters lie on the validity boundary; the density "
                    "would be unbounded"
                )
            raise NoValidPermutationError(
                "no permutation (i,j,k) satisfies "
                "|rho_jk| < |rho_ij*rho_ik|/(|rho_ij|+|rho_ik|)"
            )
        object.__setattr__(self, "branches", tuple(satisfied))

    @property
    def branch(self):
        """First (in practice: the unique) satisfied permutation branch."""
        return self.branches[0]

    @property
    def product(self):
        return self.rho12 * self.rho13 * self.rho23

    @property
    def normalized(self):
        """True when the product equals 1 within relative tolerance 1e-12."""
        return abs(self.product - 1.0) <= 1e-12

    def rho(self, i, j):
        """Dependence parameter of the unordered pair ``{i, j}``."""
        return float(self.as_array()[pair_position(i, j)])

    def as_array(self):
        return np.array([self.rho12, self.rho13, self.rho23])

    def scaled(self, c):
        """The equivalent triple ``c * rho`` for ``c > 0``."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        return RhoParams(c * self.rho12, c * self.rho13, c * self.rho23)


def validate_rho(rho12, rho13, rho23) -> RhoParams:
    """Validate a dependence triple; alias for the ``RhoParams`` constructor."""
    return RhoParams(rho12, rho13, rho23)


def normalize_rho(p: RhoParams) -> RhoParams:
    """Rescale to the identified representative with unit product.

    Uses the unique positive scale ``c = (rho12*rho13*rho23)^(-1/3)``, which
    preserves signs, the branch set, and every pairwise ``phi_ij``.
    """
    c = p.product ** (-1.0 / 3.0)
    return p.scaled(c)


@dataclass(frozen=True)
class PhiTriple:
    """Complex-form parameters; the pair products recover the rho triple."""

    phi1: float
    phi2: float
    phi3: float

    def __post_init__(self):
        vals = self.as_array()
        if not np.all(np.isfinite(vals)) or np.any(vals == 0.0):
            raise ZeroParameterError("phi parameters must be finite and nonzero")
        mags = np.abs(vals)
        dominant = None
        near_boundary = False
        for i in range(3):
            others = mags.sum() - mags[i]
            slack = mags[i] - others
            if slack > VALIDITY_MARGIN * mags[i]:
                dominant = i + 1
            elif abs(slack) <= VALIDITY_MARGIN * mags[i]:
                near_boundary = True
        if dominant is None:
            if near_boundary:
                raise DegenerateBoundaryError(
                    "|phi_i| = |phi_j| + |phi_k| sits on the validity boundary"
                )
            raise NoValidPermutationError(
                "no index satisfies |phi_i| > |phi_j| + |phi_k|"
            )
        object.__setattr__(self, "_dominant", dominant)

    @property
    def dominant(self):
        """Index (1-based) with |phi_i| > |phi_j| + |phi_k|."""
        return self._dominant

    def as_array(self):
        return np.array([self.phi1, self.phi2, self.phi3])


def rho_to_phi(p: RhoParams) -> PhiTriple:
    """Complex-form triple with ``phi_i = sgn(rho_jk) sqrt|rho_ij rho_ik / rho_jk|``."""
    vals = p.as_array()
    phi = np.empty(3)
    for i in (1, 2, 3):
        j, k = [m for m in (1, 2, 3) if m != i]
        r_ij = vals[pair_position(i, j)]
        r_ik = vals[pair_position(i, k)]
        r_jk = vals[pair_position(j, k)]
        phi[i - 1] = math.copysign(math.sqrt(abs(r_ij * r_ik / r_jk)), r_jk)
    return PhiTriple(*(float(v) for v in phi))


def phi_to_rho(q: PhiTriple) -> RhoParams:
    """Inverse of :func:`rho_to_phi` via ``rho_ij = phi_i * phi_j``."""
    return RhoParams(q.phi1 * q.phi2, q.phi1 * q.phi3, q.phi2 * q.phi3)


@dataclass(frozen=True)
class PairwisePhi:
    """Marginal dependence parameter of one pair.

    ``phi`` is the closed-form marginal parameter; ``varphi`` is its
    unit-disc representative ``sign(phi) * min(|phi|, 1/|phi|)``, the version
    entering moments, correlations, and the sampler.
    """

    pair: tuple
    phi: float
    varphi: float

    @property
    def location(self):
        """Principal argument of the (real) parameter: 0 or pi."""
        return 0.0 if self.phi > 0 else math.pi


def unit_disc_representative(phi: float) -> float:
    """Map phi to the equivalent representative with magnitude <= 1."""
    a = abs(phi)
    return math.copysign(min(a, 1.0 / a), phi)


def pairwise_phi(p: RhoParams, pair) -> PairwisePhi:
    """Marginal dependence parameter ``phi_ij`` of the pair ``(i, j)``.

    Invariant under positive rescaling of the rho triple.
    """
    from .density import c2  # deferred: density depends on params

    i, j = pair
    vals = p.as_array()
    k = _third_index(i, j)
    r_ij = vals[pair_position(i, j)]
    r_ik = vals[pair_position(i, k)]
    r_jk = vals[pair_position(j, k)]
    bracket = (
        r_ik * r_jk / r_ij
        - r_ij * r_ik / r_jk
        - r_ij * r_jk / r_ik
        - (2.0 * math.pi) ** 3 * c2(p)
    )
    phi = bracket / (2.0 * r_ij)
    return PairwisePhi((i, j), phi, unit_disc_representative(phi))


def zeta_threshold(rho_ik: float) -> float:
    """Lower bound on |rho_ij| for a branch, given the free parameter.

    For a normalized triple on branch ``(i, j, k)`` the dominance inequality
    is equivalent to ``|rho_ij| > (1 + sqrt(1 + 4|rho_ik|^3)) / (2 rho_ik^2)``.
    """
    r = abs(rho_ik)
    return (1.0 + math.sqrt(1.0 + 4.0 * r**3)) / (2.0 * r * r)


def _zeta_threshold_deriv(rho_ik: float) -> float:
    """Derivative of :func:`zeta_threshold` with respect to |rho_ik|."""
    r = abs(rho_ik)
    s = math.sqrt(1.0 + 4.0 * r**3)
    return 3.0 / s - (1.0 + s) / r**3


@dataclass(frozen=True)
class ZetaBranch:
    """Per-branch open-box coordinates ``(zeta_ij, rho_ik)``.

    ``zeta_ij = zeta_threshold(|rho_ik|) / rho_ij`` lies in (-1,0) u (0,1);
    together with ``rho_ik`` it parametrizes exactly the normalized triples
    satisfying the branch inequality.
    """

    branch: tuple
    zeta: float
    rho_ik: float

    def __post_init__(self):
        if tuple(self.branch) not in BRANCHES:
            raise ValueError(f"branch must be one of {BRANCHES}")
        object.__setattr__(self, "branch", tuple(self.branch))
        if not (0.0 < abs(self.zeta) < 1.0):
            raise BranchInfeasibleError(
                f"zeta must lie in (-1,0) u (0,1), got {self.zeta}"
            )
        if self.rho_ik == 0.0 or not math.isfinite(self.rho_ik):
            raise ZeroParameterError("rho_ik must be finite and nonzero")


def to_zeta(p: RhoParams, branch) -> ZetaBranch:
    """Branch coordinates of a normalized triple.

    Raises
    ------
    BranchInfeasibleError
        If the triple does not satisfy the requested branch inequality.
    """
    branch = tuple(branch)
    if not p.normalized:
        raise ValueError("to_zeta requires a normalized triple; call normalize_rho first")
    if branch not in p.branches:
        raise BranchInfeasibleError(f"branch {branch} not satisfied by {p}")
    i, j, k = branch
    rho_ik = p.rho(i, k)
    zeta = zeta_threshold(rho_ik) / p.rho(i, j)
    return ZetaBranch(branch, zeta, rho_ik)


def from_zeta(z: ZetaBranch) -> RhoParams:
    """Reconstruct the normalized triple from branch coordinates."""
    i, j, k = z.branch
    rho_ij = zeta_threshold(z.rho_ik) / z.zeta
    rho_jk = 1.0 / (rho_ij * z.rho_ik)
    vals = np.empty(3)
    vals[pair_position(i, j)] = rho_ij
    vals[pair_position(i, k)] = z.rho_ik
    vals[pair_position(j, k)] = rho_jk
    return RhoParams(*vals)


@dataclass(frozen=True)
class StarParams:
    """Full and partial dependence coordinates on the (2,3)-bounded branch.

    ``rho12_star`` rescales rho12 so its legal range is simply |.| > 1;
    ``rho2313_star = rho23 / |rho13|`` carries the residual dependence and
    the sign of rho23.
    """

    rho12_star: float
    rho2313_star: float

    def __post_init__(self):
        if not abs(self.rho12_star) > 1.0:
            raise BranchInfeasibleError(
                f"full dependence parameter needs |.| > 1, got {self.rho12_star}"
            )
        if not 0.0 < abs(self.rho2313_star) < 1.0:
            raise BranchInfeasibleError(
                "partial dependence parameter needs 0 < |.| < 1, "
                f"got {self.rho2313_star}"
            )


def _star_scale(partial: float) -> float:
    a = abs(partial)
    return ((1.0 - a) / math.sqrt(a)) ** (2.0 / 3.0)


def to_star(p: RhoParams) -> StarParams:
    """Starred coordinates of a normalized triple on branch ``(1, 2, 3)``."""
    if not p.normalized:
        raise ValueError("to_star requires a normalized triple; call normalize_rho first")
    if (1, 2, 3) not in p.branches:
        raise BranchInfeasibleError(
            "to_star is defined on the branch bounding rho23; permute indices "
            "to reach it"
        )
    partial = p.rho23 / abs(p.rho13)
    return StarParams(_star_scale(partial) * p.rho12, partial)


def from_star(s: StarParams) -> RhoParams:
    """Normalized triple from starred coordinates (inverse of :func:`to_star`)."""
    partial = s.rho2313_star
    rho12 = s.rho12_star / _star_scale(partial)
    mag13 = 1.0 / math.sqrt(abs(rho12 * partial))
    rho13 = math.copysign(mag13, rho12 * partial)
    rho23 = partial * mag13
    return RhoParams(rho12, rho13, rho23)
