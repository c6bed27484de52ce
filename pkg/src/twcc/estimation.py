"""Maximum likelihood estimation and related inference.

The likelihood is maximized separately on each of the three permutation
branches in the open-box coordinates ``(zeta_ij, rho_ik)``; a smooth
bijection maps the box onto the plane so L-BFGS-B runs unconstrained with
the analytic gradient. The winner across branches and random starts is the
estimate; the identifiability constraint (unit product) holds by
construction of the branch reconstruction.

Multi-start fits and bootstrap replicates are embarrassingly parallel; each
unit of work owns an independent RNG stream derived from the master seed and
the unit index, so results are reproducible regardless of scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .density import _c1_raw, _c4_raw, c2
from .errors import (
    AllStartsFailedError,
    DegenerateSampleError,
    QuadratureNotConvergedError,
    ZeroResultantError,
)
from .numerics import (
    TWO_PI,
    interval_to_real,
    real_to_interval,
    real_to_interval_deriv,
    wrap_angle,
)
from .params import (
    BRANCHES,
    PAIRS,
    RhoParams,
    _zeta_threshold_deriv,
    pair_position,
    pairwise_phi,
    zeta_threshold,
)
from .sampling import AngleSample, RngState, sample_twcc

#: Hard floor on |rho_ik| inside the optimizer's log-magnitude transform.
_RHO_IK_FLOOR = 1e-8

#: For each coordinate position, the positions of the other two parameters.
_OTHERS = ((1, 2), (0, 2), (0, 1))


def as_angles(s) -> np.ndarray:
    """Coerce an AngleSample or array-like to an (n, 3) angle matrix."""
    if isinstance(s, AngleSample):
        return s.angles
    a = np.atleast_2d(np.asarray(s, dtype=float))
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValueError(f"angles must have shape (n, 3), got {a.shape}")
    return wrap_angle(a)


def _cos_diffs(ang):
    """Columns cos(u1-u2), cos(u1-u3), cos(u2-u3); all the data the likelihood needs."""
    return np.column_stack(
        (
            np.cos(ang[:, 0] - ang[:, 1]),
            np.cos(ang[:, 0] - ang[:, 2]),
            np.cos(ang[:, 1] - ang[:, 2]),
        )
    )


# ---------------------------------------------------------------------------
# log-likelihood, score, Fisher information
# ---------------------------------------------------------------------------

def _dc1(v):
    out = np.empty(3)
    for p, (q1, q2) in enumerate(_OTHERS):
        out[p] = v[q1] / v[q2] + v[q2] / v[q1] - v[q1] * v[q2] / v[p] ** 2
    return out


def _dc4(v):
    out = np.empty(3)
    for p, (q1, q2) in enumerate(_OTHERS):
        out[p] = (
            2.0 * v[p] * ((v[q1] / v[q2]) ** 2 + (v[q2] / v[q1]) ** 2)
            - 2.0 * (v[q1] * v[q2]) ** 2 / v[p] ** 3
            - 4.0 * v[p]
        )
    return out


def _d2c1(v):
    out = np.empty((3, 3))
    for p, (q1, q2) in enumerate(_OTHERS):
        out[p, p] = 2.0 * v[q1] * v[q2] / v[p] ** 3
    for p in range(3):
        for q in range(p + 1, 3):
            r = 3 - p - q
            out[p, q] = out[q, p] = (
                1.0 / v[r] - v[r] / v[q] ** 2 - v[r] / v[p] ** 2
            )
    return out


def _d2c4(v):
    out = np.empty((3, 3))
    for p, (q1, q2) in enumerate(_OTHERS):
        out[p, p] = (
            2.0 * (v[q1] / v[q2]) ** 2
            + 2.0 * (v[q2] / v[q1]) ** 2
            + 6.0 * (v[q1] * v[q2]) ** 2 / v[p] ** 4
            - 4.0
        )
    for p in range(3):
        for q in range(p + 1, 3):
            r = 3 - p - q
            out[p, q] = out[q, p] = (
                4.0 * v[p] * v[q] / v[r] ** 2
                - 4.0 * v[p] * v[r] ** 2 / v[q] ** 3
                - 4.0 * v[q] * v[r] ** 2 / v[p] ** 3
            )
    return out


def _loglik_score_raw(v, cosd, want_score=True):
    """Log-likelihood and (optionally) score at the raw triple ``v``.

    Returns None when the triple is numerically outside the valid region.
    """
    c1v = _c1_raw(*v)
    c4v = _c4_raw(*v)
    if not (np.isfinite(c4v) and c4v > 0.0):
        return None
    F = c1v + 2.0 * (cosd @ v)
    if F.min() <= 0.0 or not np.isfinite(F.min()):
        return None
    n = cosd.shape[0]
    ll = n * (0.5 * math.log(c4v) - 3.0 * math.log(TWO_PI)) - float(
        np.log(F).sum()
    )
    if not want_score:
        return ll, None
    inv = 1.0 / F
    s0 = float(inv.sum())
    sv = cosd.T @ inv
    # c2'/c2 = c4'/(2 c4), so the (2 pi)^3 factors cancel.
    score = n * _dc4(v) / (2.0 * c4v) - (_dc1(v) * s0 + 2.0 * sv)
    return ll, score


def log_likelihood(s, p) -> float:
    """Log-likelihood ``n log c2 - sum_m log F_m`` of a sample.

    Invariant under positive rescaling of the dependence triple.
    """
    if not isinstance(p, RhoParams):
        p = RhoParams(*p)
    out = _loglik_score_raw(p.as_array(), _cos_diffs(as_angles(s)), want_score=False)
    if out is None:
        raise ArithmeticError("likelihood undefined at validated parameters (internal bug)")
    return out[0]


def score(s, p) -> np.ndarray:
    """Analytic score vector (d/d rho12, d/d rho13, d/d rho23)."""
    if not isinstance(p, RhoParams):
        p = RhoParams(*p)
    out = _loglik_score_raw(p.as_array(), _cos_diffs(as_angles(s)))
    if out is None:
        raise ArithmeticError("score undefined at validated parameters (internal bug)")
    return out[1]


@dataclass(frozen=True)
class FisherInfo:
    """Expected information per observation in (rho12, rho13, rho23) order."""

    matrix: np.ndarray

    def scaled(self, n):
        """Information of a sample of size ``n``."""
        return n * self.matrix


def fisher_information(
    p: RhoParams, *, rel_tol=1e-7, points=32, max_doublings=3
) -> FisherInfo:
    """Expected Fisher information per observation by torus quadrature.

    Integrates the analytic second-derivative integrand of the log-density;
    the resolution doubles until every matrix entry stabilizes to
    ``rel_tol``.

    Raises
    ------
    QuadratureNotConvergedError
        If entries still change after the final doubling.
    """
    if not isinstance(p, RhoParams):
        p = RhoParams(*p)
    v = p.as_array()
    c1v = _c1_raw(*v)
    c4v = _c4_raw(*v)
    c2v = c2(p)
    dc1 = _dc1(v)
    dc4 = _dc4(v)
    d2c1 = _d2c1(v)
    d2c4 = _d2c4(v)
    k3 = TWO_PI**3
    dc2 = dc4 / (2.0 * k3 * math.sqrt(c4v))
    d2c2 = (d2c4 / math.sqrt(c4v) - np.outer(dc4, dc4) / (2.0 * c4v**1.5)) / (2.0 * k3)
    const_part = -(d2c2 * c2v - np.outer(dc2, dc2)) / c2v**2

    def q_matrix(n):
        x = np.arange(n) * (TWO_PI / n)
        u1 = x[:, None, None]
        u2 = x[None, :, None]
        u3 = x[None, None, :]
        cosd = (np.cos(u1 - u2), np.cos(u1 - u3), np.cos(u2 - u3))
        F = c1v + 2.0 * (v[0] * cosd[0] + v[1] * cosd[1] + v[2] * cosd[2])
        inv3 = F**-3.0
        fa = [dc1[a] + 2.0 * cosd[a] for a in range(3)]
        q = np.empty((3, 3))
        for a in range(3):
            for b in range(a, 3):
                val = float(np.mean((d2c1[a, b] * F - fa[a] * fa[b]) * inv3))
                q[a, b] = q[b, a] = val * TWO_PI**3
        return q

    n = points
    prev = q_matrix(n)
    for _ in range(max_doublings):
        n *= 2
        cur = q_matrix(n)
        change = np.abs(cur - prev) / np.maximum(np.abs(cur), 1e-12)
        prev = cur
        if change.max() < rel_tol:
            mat = const_part + c2v * cur
            return FisherInfo(0.5 * (mat + mat.T))
    raise QuadratureNotConvergedError(
        f"Fisher quadrature not converged at {n} points per axis"
    )


# ---------------------------------------------------------------------------
# empirical moments and centering
# ---------------------------------------------------------------------------

def empirical_trig_moments(s, pairs=PAIRS) -> dict:
    """Plug-in pairwise moments ``(1/n) sum exp(i (u_i - u_j))`` per pair.

    No inversion to a dependence triple is attempted.
    """
    ang = as_angles(s)
    if ang.shape[0] < 1:
        raise DegenerateSampleError("need at least one observation")
    out = {}
    for i, j in pairs:
        out[(i, j)] = complex(np.mean(np.exp(1j * (ang[:, i - 1] - ang[:, j - 1]))))
    return out


def circular_center(s) -> AngleSample:
    """Remove the per-column circular mean; records the offsets removed."""
    ang = as_angles(s)
    means = np.mean(np.exp(1j * ang), axis=0)
    if np.any(np.abs(means) < 1e-12):
        raise ZeroResultantError(
            "circular mean undefined: a column has zero mean resultant"
        )
    offsets = np.angle(means)
    return AngleSample(
        wrap_angle(ang - offsets), centered=True, offsets=tuple(float(o) for o in offsets)
    )


def uncenter(s: AngleSample) -> AngleSample:
    """Add a centered sample's offsets back; inverse of :func:`circular_center`."""
    if not s.centered or s.offsets is None:
        raise ValueError("sample carries no centering offsets")
    return AngleSample(wrap_angle(s.angles + np.asarray(s.offsets)))


# ---------------------------------------------------------------------------
# maximum likelihood fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitConfig:
    """Knobs of the multi-start branch maximization and bootstrap.

    ``n_starts`` random initial points are tried per branch. ``zeta_margin``
    excludes a band around the removed point zeta = 0 and the open-interval
    endpoints |zeta| = 1; ``rho_ik_bound`` caps the magnitude of the free
    parameter. Bootstrap replicates are parametric by default and use
    ``bootstrap_starts`` random starts per branch plus a warm start at the
    parent estimate.
    """

    n_starts: int = 50
    rho_ik_bound: float = 1e3
    zeta_margin: float = 1e-6
    grad_tol: float = 1e-8
    step_tol: float = 1e-12
    bootstrap_b: int = 200
    bootstrap_starts: int = 3
    resample_rows: bool = False
    seed: int = 0
    n_jobs: int = 1


@dataclass(frozen=True)
class BootstrapResult:
    """Percentile intervals and medians over bootstrap re-estimates."""

    b: int
    medians: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    n_failed: int
    estimates: np.ndarray

    def interval(self, pair) -> tuple:
        """95% interval of one coordinate; the point 0 is never attainable."""
        pos = pair_position(*pair)
        return (float(self.lo[pos]), float(self.hi[pos]))

    def covers(self, p) -> np.ndarray:
        """Per-coordinate indicator that the triple lies inside the intervals."""
        v = p.as_array() if isinstance(p, RhoParams) else np.asarray(p, dtype=float)
        return (self.lo <= v) & (v <= self.hi)


@dataclass(frozen=True)
class FitResult:
    """Winning estimate of the 3-branch maximization."""

    rho_hat: RhoParams
    loglik: float
    branch: tuple
    starts_converged: int
    n: int
    config: FitConfig
    fisher: FisherInfo | None = None
    bootstrap: BootstrapResult | None = None


class _BranchProblem:
    """Negative log-likelihood in plane coordinates for one branch."""

    def __init__(self, branch, cosd, cfg):
        self.branch = branch
        i, j, k = branch
        self.pos_ij = pair_position(i, j)
        self.pos_ik = pair_position(i, k)
        self.pos_jk = pair_position(j, k)
        self.cosd = cosd
        self.zlo = cfg.zeta_margin
        self.zhi = 1.0 - cfg.zeta_margin
        self.ylo = math.log(_RHO_IK_FLOOR)
        self.yhi = math.log(cfg.rho_ik_bound)

    def decode(self, theta, signs):
        zeta = signs[0] * real_to_interval(theta[0], self.zlo, self.zhi)
        rmag = math.exp(real_to_interval(theta[1], self.ylo, self.yhi))
        rho_ik = signs[1] * rmag
        rho_ij = zeta_threshold(rmag) / zeta
        rho_jk = 1.0 / (rho_ij * rho_ik)
        v = np.empty(3)
        v[self.pos_ij] = rho_ij
        v[self.pos_ik] = rho_ik
        v[self.pos_jk] = rho_jk
        return v, zeta, rho_ik

    def encode(self, zeta, rho_ik):
        signs = (math.copysign(1.0, zeta), math.copysign(1.0, rho_ik))
        t0 = interval_to_real(min(max(abs(zeta), self.zlo * 1.0000001), self.zhi * 0.9999999), self.zlo, self.zhi)
        y = min(max(math.log(abs(rho_ik)), self.ylo + 1e-9), self.yhi - 1e-9)
        t1 = interval_to_real(y, self.ylo, self.yhi)
        return np.array([float(t0), float(t1)]), signs

    def neg_loglik_grad(self, theta, signs):
        v, zeta, rho_ik = self.decode(theta, signs)
        out = _loglik_score_raw(v, self.cosd)
        if out is None:
            return 1e100, np.zeros(2)
        ll, sc = out
        rho_ij = v[self.pos_ij]
        rmag = abs(rho_ik)
        a_val = zeta_threshold(rmag)
        # Chain rule through the branch reconstruction.
        d_ij_dz = -a_val / zeta**2
        d_jk_d_ij = -1.0 / (rho_ij**2 * rho_ik)
        g_zeta = sc[self.pos_ij] * d_ij_dz + sc[self.pos_jk] * d_jk_d_ij * d_ij_dz
        d_ij_dr = _zeta_threshold_deriv(rmag) * signs[1] / zeta
        d_jk_dr = -(d_ij_dr * rho_ik + rho_ij) / (rho_ij * rho_ik) ** 2
        g_r = sc[self.pos_ij] * d_ij_dr + sc[self.pos_ik] + sc[self.pos_jk] * d_jk_dr
        # Chain rule through the box-to-plane transform.
        g0 = g_zeta * signs[0] * real_to_interval_deriv(theta[0], self.zlo, self.zhi)
        g1 = g_r * rho_ik * real_to_interval_deriv(theta[1], self.ylo, self.yhi)
        return -ll, np.array([-g0, -g1])


def _random_starts(gen, n_starts, problem):
    """Random start rows (t_zeta, t_y, sign_zeta, sign_r) for one branch.

    Zeta magnitudes are uniform on the allowed interval; the free parameter
    magnitude is log-uniform on [1e-2, bound], signs equiprobable.
    """
    zmag = gen.uniform(problem.zlo, problem.zhi, size=n_starts)
    y = gen.uniform(math.log(1e-2), problem.yhi, size=n_starts)
    signs = gen.integers(0, 2, size=(n_starts, 2)) * 2.0 - 1.0
    t0 = interval_to_real(zmag, problem.zlo, problem.zhi)
    t1 = interval_to_real(y, problem.ylo, problem.yhi)
    return np.column_stack((t0, t1, signs))


def _maximize(cosd, cfg, gen, n_starts, warm=None):
    """Run the branch maximizations; returns (vec, ll, branch, n_converged)."""
    best = None
    n_conv = 0
    for branch in BRANCHES:
        problem = _BranchProblem(branch, cosd, cfg)
        rows = _random_starts(gen, n_starts, problem)
        starts = [((row[0], row[1]), (row[2], row[3])) for row in rows]
        if warm is not None and warm[0] == branch:
            starts.insert(0, problem.encode(warm[1], warm[2]))
        for theta0, signs in starts:
            res = minimize(
                problem.neg_loglik_grad,
                np.asarray(theta0, dtype=float),
                args=(signs,),
                jac=True,
                method="L-BFGS-B",
                options={"maxiter": 200, "ftol": cfg.step_tol, "gtol": cfg.grad_tol},
            )
            if not np.isfinite(res.fun) or res.fun > 9e99:
                continue
            if res.success:
                n_conv += 1
            ll = -float(res.fun)
            cand = (ll, branch, problem.decode(res.x, signs)[0])
            if best is None or ll > best[0] + 1e-9:
                best = cand
            elif abs(ll - best[0]) <= 1e-9 and branch < best[1]:
                # Deterministic tie-break: lexicographically smallest branch.
                best = cand
    return best, n_conv


def fit_mle(s, cfg: FitConfig | None = None, *, compute_fisher=False) -> FitResult:
    """Constrained maximum likelihood fit of the dependence triple.

    For each permutation branch the likelihood is maximized over the open
    box in ``(zeta_ij, rho_ik)`` from ``cfg.n_starts`` random initial values;
    the best branch wins and its reconstruction yields the normalized
    estimate (unit product).

    Raises
    ------
    DegenerateSampleError
        Fewer than 4 rows, or all rows identical.
    AllStartsFailedError
        No optimizer start produced a finite maximum.
    """
    cfg = cfg or FitConfig()
    ang = as_angles(s)
    n = ang.shape[0]
    if n < 4:
        raise DegenerateSampleError(f"need at least 4 observations, got {n}")
    if np.all(np.abs(ang - ang[0]) < 1e-12):
        raise DegenerateSampleError("all rows identical")
    cosd = _cos_diffs(ang)
    gen = RngState(cfg.seed, 0).generator()
    best, n_conv = _maximize(cosd, cfg, gen, cfg.n_starts)
    if best is None:
        raise AllStartsFailedError("all optimizer starts failed on every branch")
    ll, branch, vec = best
    return FitResult(
        rho_hat=RhoParams(*vec),
        loglik=ll,
        branch=branch,
        starts_converged=n_conv,
        n=n,
        config=cfg,
        fisher=fisher_information(RhoParams(*vec)) if compute_fisher else None,
    )


def _warm_info(fit: FitResult):
    branch = fit.rho_hat.branch
    i, j, k = branch
    zeta = zeta_threshold(fit.rho_hat.rho(i, k)) / fit.rho_hat.rho(i, j)
    return (branch, zeta, fit.rho_hat.rho(i, k))


def _bootstrap_one(args):
    """One bootstrap replicate; module-level so process pools can pickle it."""
    b, rho_triple, warm, n, cfg = args
    rho_hat = RhoParams(*rho_triple)
    if cfg.resample_rows:
        gen = RngState(cfg.seed, 2 * b + 1).generator()
        base = _bootstrap_one.data
        ang = base[gen.integers(0, n, size=n)]
    else:
        ang = sample_twcc(n, rho_hat, RngState(cfg.seed, 2 * b + 1)).angles
    cosd = _cos_diffs(ang)
    gen = RngState(cfg.seed, 2 * b + 2).generator()
    best, _ = _maximize(cosd, cfg, gen, cfg.bootstrap_starts, warm=warm)
    if best is None:
        return b, None
    return b, best[2]


_bootstrap_one.data = None


def _bootstrap_pool_init(data):
    _bootstrap_one.data = data


def bootstrap_ci(s, cfg: FitConfig | None = None, fit: FitResult | None = None) -> BootstrapResult:
    """Bootstrap percentile intervals around the fitted triple.

    Parametric by default: each replicate redraws ``n`` rows from the fitted
    copula, refits (warm-started at the parent estimate), and the 2.5/97.5
    percentiles and medians are taken coordinatewise. Replicates own
    independent RNG streams and are merged in replicate order, so results do
    not depend on scheduling. Zero can never be covered: the reported
    interval is understood as excluding it.
    """
    cfg = cfg or FitConfig()
    ang = as_angles(s)
    n = ang.shape[0]
    if fit is None:
        fit = fit_mle(ang, cfg)
    warm = _warm_info(fit)
    tasks = [
        (b, tuple(fit.rho_hat.as_array()), warm, n, cfg) for b in range(cfg.bootstrap_b)
    ]
    if cfg.n_jobs > 1:
        with ProcessPoolExecutor(
            max_workers=cfg.n_jobs,
            initializer=_bootstrap_pool_init,
            initargs=(ang,),
        ) as pool:
            raw = list(pool.map(_bootstrap_one, tasks, chunksize=max(1, len(tasks) // (4 * cfg.n_jobs))))
    else:
        _bootstrap_one.data = ang
        raw = [_bootstrap_one(t) for t in tasks]
        _bootstrap_one.data = None
    raw.sort(key=lambda r: r[0])
    estimates = np.full((cfg.bootstrap_b, 3), np.nan)
    n_failed = 0
    for b, vec in raw:
        if vec is None:
            n_failed += 1
        else:
            estimates[b] = vec
    if n_failed == cfg.bootstrap_b:
        raise AllStartsFailedError("every bootstrap replicate failed to fit")
    lo = np.nanpercentile(estimates, 2.5, axis=0)
    hi = np.nanpercentile(estimates, 97.5, axis=0)
    med = np.nanmedian(estimates, axis=0)
    return BootstrapResult(
        b=cfg.bootstrap_b,
        medians=med,
        lo=lo,
        hi=hi,
        n_failed=n_failed,
        estimates=estimates,
    )


def fit_with_bootstrap(s, cfg: FitConfig | None = None) -> FitResult:
    """Fit, then attach bootstrap intervals to the result."""
    cfg = cfg or FitConfig()
    fit = fit_mle(s, cfg)
    boot = bootstrap_ci(s, cfg, fit)
    return replace(fit, bootstrap=boot)
