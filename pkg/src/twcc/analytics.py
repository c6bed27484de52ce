"""Closed-form trigonometric moments, circular correlations, and modes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .params import RhoParams, pair_position, pairwise_phi

#: Order triple of a trigonometric moment E[exp(i(p1 U1 + p2 U2 + p3 U3))].
MomentOrder = tuple


class CorrCoefficients(NamedTuple):
    """The three classical circular correlation coefficients of one pair."""

    johnson_wehrly: float
    jupp_mardia: float
    fisher_lee: float


def corr_coefficients(p: RhoParams, pair) -> CorrCoefficients:
    """Closed-form correlation coefficients of the pair's marginal.

    All three are driven by the unit-disc representative ``varphi`` of the
    pairwise dependence parameter: ``|varphi|``, ``2 varphi^2``, and
    ``varphi^2`` respectively.
    """
    v = pairwise_phi(p, tuple(pair)).varphi
    return CorrCoefficients(abs(v), 2.0 * v * v, v * v)


# ---------------------------------------------------------------------------
# trigonometric moments
# ---------------------------------------------------------------------------

def trig_moment(order, p: RhoParams) -> complex:
    """Trigonometric moment ``E[exp(i (p1 U1 + p2 U2 + p3 U3))]``.

    Nonzero only when the orders sum to zero; always real-valued for this
    family. See :func:`trig_moment_detail` for the dispatch information.
    """
    return trig_moment_detail(order, p)[0]


def trig_moment_detail(order, p: RhoParams):
    """Moment value plus the evaluation-case label and branch used.

    The closed forms assume the dominance inequality bounds the pair
    ``(j, k)`` of the permutation ``(i, j, k)``; indices are permuted to the
    satisfied branch before dispatch. Case labels:

    - ``"sum-nonzero"``: orders do not sum to zero, moment is 0.
    - ``"pair-power"``: order at the dominant index is zero.
    - ``"binomial-reduced-a"`` / ``"binomial-reduced-b"``: simplified products
      for ``p_j >= 0`` and ``p_j <= -p_i``.
    - ``"binomial-sum"``: the general binomial sum (used when
      ``0 > p_j > -p_i`` for both orderings of ``(j, k)``).

    A leading ``"reflected+"`` marks orders negated via the conjugate
    reflection identity before dispatch.
    """
    order = tuple(int(q) for q in order)
    if len(order) != 3:
        raise ValueError("order must be a triple of integers")
    branch = p.branch
    if sum(order) != 0:
        return complex(0.0), "sum-nonzero", branch

    i, j, k = branch
    prefix = ""
    by_index = {1: order[0], 2: order[1], 3: order[2]}
    if by_index[i] < 0:
        by_index = {a: -q for a, q in by_index.items()}
        prefix = "reflected+"

    p_i = by_index[i]
    vals = p.as_array()
    varphi_jk = pairwise_phi(p, (j, k)).varphi

    if p_i == 0:
        return complex(varphi_jk ** abs(by_index[j])), prefix + "pair-power", branch

    # Simplified products apply when the order at j (either ordering of the
    # bounded pair) is outside (-p_i, 0).
    for jj, kk in ((j, k), (k, j)):
        p_j = by_index[jj]
        r_ij = vals[pair_position(i, jj)]
        r_ik = vals[pair_position(i, kk)]
        r_jk = vals[pair_position(jj, kk)]
        if p_j >= 0:
            val = varphi_jk**p_j * (-r_jk * (varphi_jk / r_ik + 1.0 / r_ij)) ** p_i
            return complex(val), prefix + "binomial-reduced-a", branch
        if p_j <= -p_i:
            val = (
                varphi_jk ** (-p_j)
                * (-r_jk * (1.0 / (varphi_jk * r_ik) + 1.0 / r_ij)) ** p_i
            )
            return complex(val), prefix + "binomial-reduced-b", branch

    val = _binomial_sum(p_i, by_index[j], vals, (i, j, k), varphi_jk)
    return complex(val), prefix + "binomial-sum", branch


def _binomial_sum(p_i, p_j, vals, branch, varphi_jk):
    """General moment sum ``(-rho_jk)^{p_i} sum_n C(p_i,n) ...``."""
    i, j, k = branch
    r_ij = vals[pair_position(i, j)]
    r_ik = vals[pair_position(i, k)]
    r_jk = vals[pair_position(j, k)]
    total = 0.0
    for n in range(p_i + 1):
        total += (
            math.comb(p_i, n)
            * r_ik ** (-n)
            * r_ij ** (-(p_i - n))
            * varphi_jk ** abs(p_j + n)
        )
    return (-r_jk) ** p_i * total


# ---------------------------------------------------------------------------
# modes and antimodes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeReport:
    """A one-dimensional extremal line of the density.

    The line is ``{(t, t - delta12, t - delta13) : t in [0, 2*pi)}`` with
    both offsets equal to 0 or pi.
    """

    kind: str
    delta12: float
    delta13: float
    branch: tuple

    @property
    def delta23(self):
        return (self.delta13 - self.delta12) % (2.0 * math.pi)

    def offset(self, i, j):
        """Offset ``u_i - u_j`` along the line (0 or pi)."""
        deltas = {1: 0.0, 2: -self.delta12, 3: -self.delta13}
        return (deltas[i] - deltas[j]) % (2.0 * math.pi)

    def line(self, t):
        """Points on the line at common parameter values ``t``."""
        t = np.asarray(t, dtype=float)
        return np.stack(
            [t, t - self.delta12, t - self.delta13], axis=-1
        ) % (2.0 * math.pi)

    def __str__(self):
        def term(idx, delta):
            return f"u{idx}" if delta == 0.0 else f"u{idx} + pi"

        return f"{self.kind}: u1 = {term(2, self.delta12)} = {term(3, self.delta13)}"


def _offsets_to_deltas(off):
    """Per-index offsets {index: 0 or pi} -> (delta12, delta13) of the line."""
    pi = math.pi
    d12 = (off[1] - off[2]) % (2.0 * pi)
    d13 = (off[1] - off[3]) % (2.0 * pi)
    # Snap to exactly 0 or pi.
    d12 = 0.0 if abs(d12) < 1e-9 or abs(d12 - 2 * pi) < 1e-9 else pi
    d13 = 0.0 if abs(d13) < 1e-9 or abs(d13 - 2 * pi) < 1e-9 else pi
    return d12, d13


def modes(p: RhoParams):
    """Mode and antimode lines of the density.

    The density attains its extrema on one-dimensional subtori with pairwise
    offsets 0 or pi; which line carries the mode is decided by the satisfied
    dominance branch and the sign pattern (all positive, or one positive and
    two negative; a positive product admits no other pattern).

    Returns
    -------
    (ModeReport, ModeReport)
        The mode line and the antimode line.
    """
    branch = p.branch
    _, j, k = branch
    small = {j, k}
    vals = p.as_array()
    positive = [pair for pair in ((1, 2), (1, 3), (2, 3)) if vals[pair_position(*pair)] > 0]

    pi = math.pi
    if len(positive) == 3:
        # All positive: bounded pair aligned, third index shifted by pi;
        # antimode where all angles coincide.
        third = ({1, 2, 3} - small).pop()
        mode_off = {a: 0.0 for a in small}
        mode_off[third] = pi
        anti_off = {1: 0.0, 2: 0.0, 3: 0.0}
    elif len(positive) == 1:
        a, b = positive[0]
        c = ({1, 2, 3} - {a, b}).pop()
        anti_off = {a: 0.0, b: 0.0, c: pi}
        if small == {a, b}:
            mode_off = {1: 0.0, 2: 0.0, 3: 0.0}
        else:
            # The bounded pair shares one member with the positive pair;
            # that member sits pi away from the other two.
            shared = (small & {a, b}).pop()
            mode_off = {1: 0.0, 2: 0.0, 3: 0.0}
            mode_off[shared] = pi
    else:
        # Unreachable: a positive product forces 3 or 1 positive entries.
        raise AssertionError("sign pattern inconsistent with a positive product")

    mode = ModeReport("mode", *_offsets_to_deltas(mode_off), branch)
    antimode = ModeReport("antimode", *_offsets_to_deltas(anti_off), branch)
    return mode, antimode
