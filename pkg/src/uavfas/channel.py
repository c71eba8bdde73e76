"""Small-scale fading: Gamma gains, fluid-antenna port correlation, best-port CDF.

A fluid antenna has an ``n1 x n2`` grid of ports spread over ``w1 x w2``
wavelengths. The best-port gain CDF couples the identical Gamma marginals
of all ports through a Student-t copula with a single equicorrelation
parameter (see :func:`effective_theta`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special as sc

from . import specfun
from .errors import DomainError, InvalidCorrelationError, PortIndexError

__all__ = [
    "FadingParams",
    "FasConfig",
    "PortIndex",
    "port_index_to_2d",
    "port_index_to_1d",
    "port_correlation",
    "correlation_matrix",
    "raw_correlation_matrix",
    "effective_theta",
    "gamma_gain_cdf",
    "gamma_gain_cdf_asymptotic",
    "gamma_gain_quantile",
    "fas_gain_cdf",
    "fas_gain_cdf_asymptotic",
]

KERNELS = ("bessel_j0", "sinc")
THETA_RULES = ("mean_square", "mean")


@dataclass(frozen=True)
class FadingParams:
    """Nakagami-m fading: shape ``m`` and mean power ``omega`` of the gain."""

    m: float = 2.0
    omega: float = 1.0

    def __post_init__(self):
        if not self.m >= 0.5:
            raise DomainError(f"Nakagami shape m must be >= 0.5, got {self.m}")
        if not self.omega > 0:
            raise DomainError(f"spread omega must be positive, got {self.omega}")


@dataclass(frozen=True)
class FasConfig:
    """Fluid-antenna port grid plus t-copula parameters.

    ``theta_rule`` picks how the port correlation matrix is reduced to the
    scalar copula parameter when no ``theta_override`` is given:
    ``"mean_square"`` averages the squared field correlations (the
    correlation of the gains themselves), ``"mean"`` averages the field
    correlations.
    """

    n1: int = 2
    n2: int = 2
    w1: float = 1.0
    w2: float = 1.0
    dof: float = 25.0
    theta_override: Optional[float] = None
    kernel: str = "bessel_j0"
    theta_rule: str = "mean_square"

    def __post_init__(self):
        if int(self.n1) != self.n1 or int(self.n2) != self.n2 or self.n1 < 1 or self.n2 < 1:
            raise DomainError(f"port counts must be positive integers, got ({self.n1}, {self.n2})")
        if not (self.w1 > 0 and self.w2 > 0):
            raise DomainError("aperture lengths must be positive")
        if not self.dof > 0:
            raise DomainError("copula degrees of freedom must be positive")
        if self.kernel not in KERNELS:
            raise DomainError(f"unknown correlation kernel {self.kernel!r}; choose from {KERNELS}")
        if self.theta_rule not in THETA_RULES:
            raise DomainError(f"unknown theta rule {self.theta_rule!r}; choose from {THETA_RULES}")
        if self.theta_override is not None:
            n = self.n1 * self.n2
            t = self.theta_override
            if not (t <= 1.0 and (n == 1 or t > -1.0 / (n - 1))):
                raise InvalidCorrelationError(f"theta_override {t} not a valid equicorrelation for {n} ports")

    @property
    def n_ports(self) -> int:
        return self.n1 * self.n2

    @property
    def aperture(self) -> float:
        """Total aperture in square wavelengths."""
        return self.w1 * self.w2

    @classmethod
    def from_totals(cls, n_ports: int, aperture: float, **kw) -> "FasConfig":
        """Square grid when ``n_ports`` is a perfect square, else a line of ports."""
        r = math.isqrt(n_ports)
        if r * r == n_ports:
            side = math.sqrt(aperture)
            return cls(n1=r, n2=r, w1=side, w2=side, **kw)
        return cls(n1=n_ports, n2=1, w1=aperture, w2=1.0, **kw)


@dataclass(frozen=True)
class PortIndex:
    n1: int
    n2: int


def _check_port(p: PortIndex, cfg: FasConfig):
    if not (1 <= p.n1 <= cfg.n1 and 1 <= p.n2 <= cfg.n2):
        raise PortIndexError(f"port {p} outside the {cfg.n1}x{cfg.n2} grid")


def port_index_to_2d(n: int, cfg: FasConfig) -> PortIndex:
    """Row-major: n = (n1 - 1) * N2 + n2, all indices 1-based."""
    if not 1 <= n <= cfg.n_ports:
        raise PortIndexError(f"port {n} outside 1..{cfg.n_ports}")
    q, r = divmod(n - 1, cfg.n2)
    return PortIndex(q + 1, r + 1)


def port_index_to_1d(p: PortIndex, cfg: FasConfig) -> int:
    _check_port(p, cfg)
    return (p.n1 - 1) * cfg.n2 + p.n2


def _kernel(arg, kernel: str):
    if kernel == "bessel_j0":
        return sc.j0(arg)
    # spherical j0(x) = sin(x)/x
    return np.sinc(np.asarray(arg) / np.pi)


def _separation(d1, d2, cfg: FasConfig):
    """Port separation in wavelengths for index offsets (d1, d2)."""
    s1 = d1 / (cfg.n1 - 1) * cfg.w1 if cfg.n1 > 1 else 0.0 * d1
    s2 = d2 / (cfg.n2 - 1) * cfg.w2 if cfg.n2 > 1 else 0.0 * d2
    return np.sqrt(s1 * s1 + s2 * s2)


def port_correlation(p: PortIndex, q: PortIndex, cfg: FasConfig) -> float:
    """Field correlation between two ports: J0(2 pi * separation / wavelength)."""
    _check_port(p, cfg)
    _check_port(q, cfg)
    sep = _separation(p.n1 - q.n1, p.n2 - q.n2, cfg)
    return float(_kernel(2 * math.pi * sep, cfg.kernel))


@lru_cache(maxsize=256)
def _raw_matrix(cfg: FasConfig) -> np.ndarray:
    idx = np.arange(cfg.n_ports)
    i1, i2 = np.divmod(idx, cfg.n2)
    d1 = i1[:, None] - i1[None, :]
    d2 = i2[:, None] - i2[None, :]
    mat = _kernel(2 * np.pi * _separation(d1, d2, cfg), cfg.kernel)
    mat = 0.5 * (mat + mat.T)
    np.fill_diagonal(mat, 1.0)
    mat.setflags(write=False)
    return mat


def raw_correlation_matrix(cfg: FasConfig) -> np.ndarray:
    """Pairwise port correlations before any PSD repair (read-only)."""
    return _raw_matrix(cfg)


@lru_cache(maxsize=256)
def _psd_matrix(cfg: FasConfig) -> np.ndarray:
    raw = _raw_matrix(cfg)
    lam_min = float(np.linalg.eigvalsh(raw).min()) if cfg.n_ports > 1 else 1.0
    if lam_min >= -1e-12:
        return raw
    shift = -lam_min
    mat = (raw + shift * np.eye(cfg.n_ports)) / (1.0 + shift)
    np.fill_diagonal(mat, 1.0)
    mat.setflags(write=False)
    return mat


def correlation_matrix(cfg: FasConfig) -> np.ndarray:
    """Unit-diagonal port correlation matrix, shifted to PSD when needed.

    Cached per configuration; the returned array is read-only.
    """
    return _psd_matrix(cfg)


def effective_theta(cfg: FasConfig) -> float:
    """Scalar copula dependence parameter for the port grid."""
    if cfg.theta_override is not None:
        return float(cfg.theta_override)
    n = cfg.n_ports
    if n == 1:
        return 1.0
    mat = correlation_matrix(cfg)
    off = mat[~np.eye(n, dtype=bool)]
    theta = float(np.mean(off * off)) if cfg.theta_rule == "mean_square" else float(np.mean(off))
    lo = -1.0 / (n - 1) + 1e-9
    return min(max(theta, lo), 1.0)


# -- marginal gain distributions ----------------------------------------------

def gamma_gain_cdf(g, f: FadingParams):
    g_arr = np.asarray(g, dtype=float)
    if np.any(~(g_arr >= 0)):
        raise DomainError("channel gain must be nonnegative")
    return specfun.reg_lower_inc_gamma(f.m, f.m * g_arr / f.omega)


def gamma_gain_sf(g, f: FadingParams):
    """1 - gamma_gain_cdf(g), accurate for large g."""
    g_arr = np.asarray(g, dtype=float)
    if np.any(~(g_arr >= 0)):
        raise DomainError("channel gain must be nonnegative")
    out = sc.gammaincc(f.m, f.m * g_arr / f.omega)
    return float(out) if out.ndim == 0 else out


def gamma_gain_cdf_asymptotic(g, f: FadingParams):
    """Leading small-gain term (m g / omega)^m / (m Gamma(m)); not clamped."""
    g_arr = np.asarray(g, dtype=float)
    if np.any(~(g_arr >= 0)):
        raise DomainError("channel gain must be nonnegative")
    with np.errstate(divide="ignore"):
        logv = f.m * np.log(f.m * g_arr / f.omega) - math.log(f.m) - sc.gammaln(f.m)
    out = np.exp(logv)
    return float(out) if out.ndim == 0 else out


def gamma_gain_quantile(u, f: FadingParams, *, upper=None):
    """Inverse of :func:`gamma_gain_cdf`.

    Pass ``upper = 1 - u`` as well when it is known more precisely than
    ``u`` (the upper tail of a copula draw); it is then used for u > 0.5.
    """
    u = np.asarray(u, dtype=float)
    lower = sc.gammaincinv(f.m, u)
    if upper is not None:
        upper = np.asarray(upper, dtype=float)
        lower = np.where(u > 0.5, sc.gammainccinv(f.m, upper), lower)
    out = f.omega / f.m * lower
    return float(out) if out.ndim == 0 else out


# -- best-port gain -------------------------------------------------------------

def _copula_diagonal(u: float, cfg: FasConfig) -> float:
    """C(u, ..., u) for the t-copula with the grid's equicorrelation."""
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    theta = effective_theta(cfg)
    if cfg.n_ports == 1 or theta >= 1.0:
        return float(u)
    x = specfun.student_t_quantile(u, cfg.dof)
    return specfun.equicorr_mvt_cdf_common(x, specfun.EquicorrMvt(cfg.n_ports, cfg.dof, theta))


def fas_gain_cdf(g, f: FadingParams, cfg: FasConfig):
    """CDF of the best-port gain max_n g_n for a fluid-antenna user."""
    u = np.atleast_1d(gamma_gain_cdf(np.asarray(g, dtype=float), f))
    out = np.array([_copula_diagonal(float(v), cfg) for v in u.ravel()]).reshape(u.shape)
    return float(out[0]) if np.ndim(g) == 0 else out


def fas_gain_cdf_asymptotic(g, f: FadingParams, cfg: FasConfig):
    """Best-port CDF with the high-SNR power-law marginal inside the copula."""
    u = np.atleast_1d(gamma_gain_cdf_asymptotic(np.asarray(g, dtype=float), f))
    u = np.clip(u, 0.0, 1.0)
    out = np.array([_copula_diagonal(float(v), cfg) for v in u.ravel()]).reshape(u.shape)
    return float(out[0]) if np.ndim(g) == 0 else out
