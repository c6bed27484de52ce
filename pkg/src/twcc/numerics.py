"""Shared numerical machinery.

Periodic torus quadrature (the independent oracle used throughout the test
suite), the complete elliptic integral of the first kind via the
arithmetic-geometric mean, central finite differences, and the open-box to
plane bijection used by the likelihood optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from .errors import ModulusOutOfRangeError

TWO_PI = 2.0 * np.pi

# Cap on the number of grid values materialized per evaluation chunk.
_CHUNK_BUDGET = 1 << 24


def wrap_angle(x):
    """Reduce angles into [0, 2*pi)."""
    return np.mod(x, TWO_PI)


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution-doubling plan for product trapezoidal quadrature.

    Parameters
    ----------
    dims : int
        Number of torus dimensions (1 through 5).
    points : int
        Starting points per axis; a power of two, at least 16.
    target_rel_tol : float
        Doubling stops once the relative change between successive
        refinements falls below this value.
    max_doublings : int
        Hard cap on refinements.
    """

    dims: int
    points: int = 16
    target_rel_tol: float = 1e-8
    max_doublings: int = 6

    def __post_init__(self):
        if not 1 <= self.dims <= 5:
            raise ValueError("dims must be between 1 and 5")
        if self.points < 16 or self.points & (self.points - 1):
            raise ValueError("points must be a power of two >= 16")
        if self.target_rel_tol <= 0 or self.max_doublings < 1:
            raise ValueError("tolerance and max_doublings must be positive")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    achieved_tol: float
    converged: bool
    points_per_axis: int

    def __float__(self):
        return self.value


def _grid_mean(f, dims, n):
    """Mean of ``f`` over the uniform n^dims lattice on [0, 2*pi)^dims.

    ``f`` must accept ``dims`` broadcastable arrays. Evaluation is chunked
    along the first axis so the full lattice is never materialized at once.
    """
    x = np.arange(n) * (TWO_PI / n)
    axes = []
    for ax in range(1, dims):
        shape = [1] * dims
        shape[ax] = n
        axes.append(x.reshape(shape))
    if dims == 1:
        return float(np.mean(f(x)))
    rows_per_chunk = max(1, _CHUNK_BUDGET // n ** (dims - 1))
    total = 0.0
    for start in range(0, n, rows_per_chunk):
        lead = x[start:start + rows_per_chunk].reshape((-1,) + (1,) * (dims - 1))
        vals = f(lead, *axes)
        total += float(np.sum(vals))
    return total / n**dims


def torus_quadrature(f, spec: QuadratureSpec) -> QuadratureResult:
    """Integrate a smooth periodic integrand over [0, 2*pi)^dims.

    Equally spaced product trapezoidal rule, which is spectrally accurate for
    smooth periodic integrands. The per-axis resolution doubles until the
    relative change between refinements drops below ``spec.target_rel_tol``.

    Parameters
    ----------
    f : callable
        Vectorized integrand taking ``spec.dims`` broadcastable angle arrays.
    spec : QuadratureSpec
        Resolution plan.

    Returns
    -------
    QuadratureResult
        Best estimate, the conservative achieved tolerance (last relative
        change), and a convergence flag. Never raises on non-convergence.
    """
    volume = TWO_PI**spec.dims
    n = spec.points
    prev = _grid_mean(f, spec.dims, n) * volume
    achieved = np.inf
    for _ in range(spec.max_doublings):
        n *= 2
        cur = _grid_mean(f, spec.dims, n) * volume
        achieved = abs(cur - prev) / max(abs(cur), np.finfo(float).tiny)
        prev = cur
        if achieved < spec.target_rel_tol:
            return QuadratureResult(cur, achieved, True, n)
    return QuadratureResult(prev, achieved, False, n)


def elliptic_K(alpha: float) -> float:
    """Complete elliptic integral of the first kind, modulus form.

    Evaluates ``K(alpha) = \\int_0^{pi/2} (1 - alpha^2 sin^2 t)^{-1/2} dt``
    by arithmetic-geometric-mean iteration, accurate to relative 1e-14.
    """
    if not abs(alpha) < 1.0:
        raise ModulusOutOfRangeError(f"elliptic modulus must satisfy |alpha| < 1, got {alpha}")
    return elliptic_K_param(alpha * alpha)


def elliptic_K_param(m: float) -> float:
    """Complete elliptic integral of the first kind with parameter m = alpha^2.

    Accepts any m < 1; negative m corresponds to an imaginary modulus, which
    still yields a real integral.
    """
    if not m < 1.0:
        raise ModulusOutOfRangeError(f"elliptic parameter must satisfy m < 1, got {m}")
    a = 1.0
    b = np.sqrt(1.0 - m)
    while abs(a - b) > 1e-15 * a:
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return np.pi / (2.0 * a)


def finite_diff_gradient(f, x, h=1e-6):
    """Central-difference gradient of a scalar function. Diagnostics only."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def finite_diff_hessian(f, x, h=1e-4):
    """Central-difference Hessian of a scalar function. Diagnostics only."""
    x = np.asarray(x, dtype=float)
    d = x.size
    hess = np.zeros((d, d))
    for i in range(d):
        ei = np.zeros_like(x)
        ei[i] = h
        hess[i, i] = (f(x + ei) - 2.0 * f(x) + f(x - ei)) / h**2
        for j in range(i + 1, d):
            ej = np.zeros_like(x)
            ej[j] = h
            val = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h**2)
            hess[i, j] = hess[j, i] = val
    return hess


def interval_to_real(t, lo, hi):
    """Smooth bijection from the open interval (lo, hi) onto the real line."""
    return logit((np.asarray(t, dtype=float) - lo) / (hi - lo))


def real_to_interval(y, lo, hi):
    """Inverse of :func:`interval_to_real`."""
    return lo + (hi - lo) * expit(y)


def real_to_interval_deriv(y, lo, hi):
    """Derivative of :func:`real_to_interval` with respect to ``y``."""
    s = expit(y)
    return (hi - lo) * s * (1.0 - s)
