"""Special functions and multivariate Student-t probabilities.

The univariate kernels are thin, domain-checked wrappers over
``scipy.special``. The multivariate part is written here:

* :func:`equicorr_mvt_cdf_common` evaluates P(X_1 <= x, ..., X_N <= x) for an
  equicorrelated multivariate t by deterministic product Gauss-Legendre
  quadrature over the mixing variables of its one-factor representation.
* :func:`mvt_cdf_qmc` handles an arbitrary correlation matrix with the
  Genz-Bretz separation-of-variables transform and randomized (scrambled)
  Sobol points.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sc
from scipy import stats
from scipy.stats import qmc

from .errors import (
    DimensionMismatchError,
    DomainError,
    InvalidCorrelationError,
    NonPSDError,
)

__all__ = [
    "EquicorrMvt",
    "QmcEstimate",
    "ln_gamma",
    "reg_lower_inc_gamma",
    "student_t_cdf",
    "student_t_pdf",
    "student_t_quantile",
    "equicorr_mvt_cdf_common",
    "equicorr_mvn_cdf_common",
    "mvt_cdf_qmc",
    "clamp_probability",
]

_CLAMP_SLACK = 1e-9


def _scalar_or_array(out, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return float(out)
    return out


def clamp_probability(p):
    """Clip round-off overshoot into [0, 1].

    Overshoot larger than 1e-9 indicates a real numerical defect and trips
    an assertion (active unless Python runs with -O).
    """
    arr = np.asarray(p, dtype=float)
    assert np.all(arr >= -_CLAMP_SLACK) and np.all(arr <= 1.0 + _CLAMP_SLACK), (
        f"probability overshoot beyond {_CLAMP_SLACK}: min={arr.min()}, max={arr.max()}"
    )
    out = np.clip(arr, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


# -- univariate kernels ------------------------------------------------------

def ln_gamma(a):
    """Natural log of the gamma function for a > 0."""
    a_arr = np.asarray(a, dtype=float)
    if np.any(~(a_arr > 0)):
        raise DomainError(f"ln_gamma requires a > 0, got {a}")
    return _scalar_or_array(sc.gammaln(a_arr), a)


def reg_lower_inc_gamma(a, x):
    """Regularized lower incomplete gamma P(a, x) = Y(a, x) / Gamma(a)."""
    a_arr = np.asarray(a, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(a_arr > 0)):
        raise DomainError(f"reg_lower_inc_gamma requires a > 0, got {a}")
    if np.any(~(x_arr >= 0)):
        raise DomainError(f"reg_lower_inc_gamma requires x >= 0, got {x}")
    return _scalar_or_array(sc.gammainc(a_arr, x_arr), a, x)


def reg_upper_inc_gamma(a, x):
    """Complement 1 - P(a, x), accurate in the upper tail."""
    a_arr = np.asarray(a, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(a_arr > 0)) or np.any(~(x_arr >= 0)):
        raise DomainError("reg_upper_inc_gamma requires a > 0 and x >= 0")
    return _scalar_or_array(sc.gammaincc(a_arr, x_arr), a, x)


def _check_dof(dof):
    d = np.asarray(dof, dtype=float)
    if np.any(~(d > 0)):
        raise DomainError(f"degrees of freedom must be positive, got {dof}")
    return d


def student_t_cdf(x, dof):
    d = _check_dof(dof)
    xv = np.asarray(x, dtype=float)
    # 1 - lower tail above zero: exact symmetry and no ulp-level wiggles near 1
    out = np.where(xv > 0, 1.0 - sc.stdtr(d, -np.abs(xv)), sc.stdtr(d, xv))
    return _scalar_or_array(out, x, dof)


def student_t_pdf(x, dof):
    d = _check_dof(dof)
    xv = np.asarray(x, dtype=float)
    logp = (
        sc.gammaln((d + 1) / 2)
        - sc.gammaln(d / 2)
        - 0.5 * np.log(d * np.pi)
        - (d + 1) / 2 * np.log1p(xv * xv / d)
    )
    return _scalar_or_array(np.exp(logp), x, dof)


def student_t_quantile(p, dof, *, allow_infinite=False):
    """Inverse of :func:`student_t_cdf`.

    Starts from scipy's incomplete-beta inversion and applies one Newton
    step against the CDF (upper tail handled through the survival function
    so probabilities near 1 keep full relative accuracy).

    Exact 0 or 1 raise :class:`DomainError` unless ``allow_infinite`` is
    set, in which case they map to -inf / +inf.
    """
    d = _check_dof(dof)
    pv = np.asarray(p, dtype=float)
    if np.any(np.isnan(pv)) or np.any(pv < 0) or np.any(pv > 1):
        raise DomainError(f"quantile requires p in (0, 1), got {p}")
    edge = (pv == 0) | (pv == 1)
    if np.any(edge) and not allow_infinite:
        raise DomainError("quantile at p=0 or p=1 is infinite; pass allow_infinite=True")

    pv, d = np.broadcast_arrays(np.atleast_1d(pv), np.atleast_1d(d))
    edge = (pv == 0) | (pv == 1)
    x = np.array(sc.stdtrit(d, pv), dtype=float)
    inner = ~edge & np.isfinite(x)
    if np.any(inner):
        xi, di, pi = x[inner], d[inner], pv[inner]
        upper = pi > 0.5
        # residual in the tail where the probability is small
        resid = np.where(upper, (1.0 - pi) - sc.stdtr(di, -xi), sc.stdtr(di, xi) - pi)
        resid = np.where(upper, -resid, resid)
        dens = np.asarray(student_t_pdf(xi, di))
        ok = dens > 0
        xi = np.where(ok, xi - np.where(ok, resid / np.where(ok, dens, 1.0), 0.0), xi)
        x[inner] = xi
    x = np.where(pv == 0, -np.inf, np.where(pv == 1, np.inf, x))
    if np.ndim(p) == 0 and np.ndim(dof) == 0:
        return float(x[0])
    return x.reshape(np.broadcast(np.asarray(p), np.asarray(dof)).shape)


# -- equicorrelated multivariate t at a common point --------------------------

@dataclass(frozen=True)
class EquicorrMvt:
    """Multivariate t with unit-diagonal, constant off-diagonal correlation."""

    dim: int
    dof: float
    rho: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")
        if not self.dof > 0:
            raise DomainError(f"dof must be positive, got {self.dof}")
        if self.dim > 1:
            if not (self.rho <= 1.0 and self.rho > -1.0 / (self.dim - 1)):
                raise InvalidCorrelationError(
                    f"equicorrelation {self.rho} outside (-1/(dim-1), 1] for dim={self.dim}"
                )

    def matrix(self) -> np.ndarray:
        m = np.full((self.dim, self.dim), float(self.rho))
        np.fill_diagonal(m, 1.0)
        return m


@dataclass(frozen=True)
class QmcEstimate:
    value: float
    std_error: float
    samples_used: int


@lru_cache(maxsize=32)
def _gauss_legendre(n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    return t, w


_TAIL_EPS = 1e-15
_Z_LIMIT = 9.0


def _scale_nodes(dof: float, n: int):
    """Nodes s_i = S_i / dof and normalized weights for S ~ chi-square(dof).

    Integration runs over log S on a central interval holding all but
    2e-15 of the mass; the log-density is smooth there for every dof.
    """
    lo = math.log(stats.chi2.ppf(_TAIL_EPS, dof))
    hi = math.log(stats.chi2.isf(_TAIL_EPS, dof))
    t, w = _gauss_legendre(n)
    ls = 0.5 * (hi + lo) + 0.5 * (hi - lo) * t
    s = np.exp(ls)
    logw = np.log(w) + stats.chi2.logpdf(s, dof) + ls
    wt = np.exp(logw - logw.max())
    return s / dof, wt / wt.sum()


def _orthant_given_level(y: np.ndarray, dim: int, rho: float, n: int) -> np.ndarray:
    """E_Z[Phi((y - sqrt(rho) Z) / sqrt(1 - rho))^dim] for each entry of y.

    This is the equicorrelated normal orthant probability at a common
    level y, for 0 <= rho < 1. Composite Gauss-Legendre over Z on
    [-9, 9], with extra breakpoints where the integrand switches from ~1
    to ~0 (around z* = y/sqrt(rho), width sqrt((1-rho)/rho)).
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if rho == 0.0:
        return np.exp(dim * sc.log_ndtr(y))
    a = math.sqrt(rho)
    b = math.sqrt(1.0 - rho)
    zstar = y / a
    width = b / a
    L = _Z_LIMIT
    bp = np.stack(
        [
            np.full_like(y, -L),
            zstar - 8 * width,
            zstar - width,
            zstar,
            zstar + width,
            zstar + 8 * width,
            np.full_like(y, L),
        ],
        axis=-1,
    )
    bp = np.sort(np.clip(bp, -L, L), axis=-1)
    left, right = bp[:, :-1], bp[:, 1:]
    t, w = _gauss_legendre(n)
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    z = mid[..., None] + half[..., None] * t  # (ny, pieces, n)
    arg = (y[:, None, None] - a * z) / b
    integrand = np.exp(dim * sc.log_ndtr(arg) - 0.5 * z * z) / math.sqrt(2 * math.pi)
    return np.einsum("ypn,n,yp->y", integrand, w, half)


def _equicorr_mvt_quadrature(x: float, dim: int, dof: float, rho: float, n: int) -> float:
    s, ws = _scale_nodes(dof, n)
    y = x * np.sqrt(s)
    return float(np.dot(ws, _orthant_given_level(y, dim, rho, n)))


def _adaptive(fn, n0=64, n_max=2048, tol=1e-9):
    n = n0
    prev = fn(n)
    while n < n_max:
        n *= 2
        cur = fn(n)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    warnings.warn(f"quadrature did not settle to {tol} at {n_max} nodes", RuntimeWarning)
    return prev


def equicorr_mvt_cdf_common(x: float, spec: EquicorrMvt) -> float:
    """P(X_1 <= x, ..., X_dim <= x) for the equicorrelated multivariate t.

    Uses X_i = (sqrt(rho) Z0 + sqrt(1-rho) e_i) * sqrt(dof / S). Negative
    correlations have no such representation and go through
    :func:`mvt_cdf_qmc` instead.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("x is NaN")
    if x == math.inf:
        return 1.0
    if x == -math.inf:
        return 0.0
    if spec.dim == 1 or spec.rho >= 1.0:
        return student_t_cdf(x, spec.dof)
    if spec.rho < 0.0:
        est = mvt_cdf_qmc(np.full(spec.dim, x), spec.matrix(), spec.dof, target_se=2e-6, seed=0)
        return clamp_probability(est.value)
    val = _adaptive(lambda n: _equicorr_mvt_quadrature(x, spec.dim, spec.dof, spec.rho, n))
    return clamp_probability(val)


def equicorr_mvn_cdf_common(x: float, dim: int, rho: float) -> float:
    """Gaussian counterpart of :func:`equicorr_mvt_cdf_common` (rho in [0, 1])."""
    if not 0.0 <= rho <= 1.0:
        raise InvalidCorrelationError("normal one-factor form needs rho in [0, 1]")
    if dim == 1 or rho == 1.0:
        return float(sc.ndtr(x))
    val = _adaptive(lambda n: float(_orthant_given_level(np.array([x]), dim, rho, n)[0]))
    return clamp_probability(val)


# -- general matrix: randomized QMC ------------------------------------------

def _semidefinite_cholesky(corr: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Lower-triangular L with L L^T = corr, tolerating zero pivots."""
    n = corr.shape[0]
    L = np.zeros_like(corr)
    for j in range(n):
        d = corr[j, j] - np.dot(L[j, :j], L[j, :j])
        if d > tol:
            L[j, j] = math.sqrt(d)
            L[j + 1:, j] = (corr[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
        else:
            L[j, j] = 0.0
    return L


def _sov_integrand(u: np.ndarray, upper: np.ndarray, L: np.ndarray, dof: float) -> np.ndarray:
    """Genz-Bretz transformed integrand evaluated at points u in (0,1)^d."""
    npts, d = u.shape
    if math.isinf(dof):
        scale = np.ones(npts)
    else:
        scale = np.sqrt(stats.chi2.ppf(u[:, 0], dof) / dof)
    f = np.ones(npts)
    ys = np.zeros((npts, d))
    for i in range(d):
        shift = ys[:, :i] @ L[i, :i]
        lim = upper[i] * scale - shift
        if L[i, i] > 0:
            e = sc.ndtr(lim / L[i, i])
        else:
            e = (lim >= 0).astype(float)
        f = f * e
        if i + 1 < d:
            v = np.clip(u[:, i + 1] * e, 1e-300, 1 - 1e-16)
            ys[:, i] = sc.ndtri(v) if L[i, i] > 0 else 0.0
    return f


def mvt_cdf_qmc(
    upper,
    corr,
    dof: float,
    target_se: float = 1e-4,
    seed: int = 0,
    *,
    n_shifts: int = 16,
    max_points: int = 2**22,
) -> QmcEstimate:
    """Randomized QMC estimate of P(X <= upper) for a multivariate t.

    ``std_error`` is the spread of ``n_shifts`` independently scrambled
    Sobol replicates. Points double until the error target is reached or
    ``max_points`` (summed over replicates) is exhausted. Deterministic for
    a fixed ``seed``.
    """
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    corr = np.atleast_2d(np.asarray(corr, dtype=float))
    d = upper.size
    if corr.shape != (d, d):
        raise DimensionMismatchError(f"corr shape {corr.shape} does not match upper of length {d}")
    if not dof > 0:
        raise DomainError("dof must be positive")
    if not np.allclose(corr, corr.T, atol=1e-12):
        raise NonPSDError("correlation matrix is not symmetric")
    if not np.allclose(np.diag(corr), 1.0, atol=1e-12):
        raise NonPSDError("correlation matrix must have unit diagonal")
    if np.linalg.eigvalsh(corr).min() < -1e-10:
        raise NonPSDError("correlation matrix is not positive semi-definite")
    if np.any(np.isnan(upper)):
        raise DomainError("upper limits contain NaN")
    if np.any(upper == -np.inf):
        return QmcEstimate(0.0, 0.0, 0)

    L = _semidefinite_cholesky(corr)
    children = np.random.SeedSequence(seed).spawn(n_shifts)
    engines = [qmc.Sobol(d, scramble=True, seed=np.random.default_rng(c)) for c in children]
    sums = np.zeros(n_shifts)
    m = 10
    n_per = 0
    batch = 2**m
    while True:
        for r, eng in enumerate(engines):
            u = eng.random(batch)
            sums[r] += _sov_integrand(u, upper, L, dof).sum()
        n_per += batch
        means = sums / n_per
        se = float(means.std(ddof=1) / math.sqrt(n_shifts))
        used = n_per * n_shifts
        if se <= target_se or used * 2 > max_points:
            break
        batch = n_per  # keep the Sobol prefix a power of two
    return QmcEstimate(clamp_probability(means.mean()), se, used)
