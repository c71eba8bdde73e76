"""Monte Carlo outage oracle.

Trials are split into fixed-size chunks. Chunk ``c`` of user ``k`` draws
from its own Philox stream keyed by ``SeedSequence(seed, spawn_key=(k, c))``,
so the outage count depends only on ``(seed, chunk_size, trials)`` and
never on how chunks are spread over workers.

Two samplers produce the correlated port gains:

``copula``
    the t-copula model behind the analytic best-port CDF; this is the
    reference for checking the closed-form evaluation.
``physical``
    sums of ``m`` correlated complex-Gaussian fields with the Bessel port
    covariance; this is the reference for judging the copula model itself.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from . import rsma
from .channel import (
    FadingParams,
    FasConfig,
    correlation_matrix,
    effective_theta,
    gamma_gain_quantile,
)
from .errors import DomainError, InfeasibleConfigurationError

__all__ = [
    "McConfig",
    "chunk_rng",
    "sample_copula_gains",
    "sample_physical_gains",
    "sample_relay_gain",
    "simulate_op",
    "simulate_noma_op",
]

SAMPLERS = ("copula", "physical")


@dataclass(frozen=True)
class McConfig:
    trials: int = 10**6
    seed: int = 20250101
    sampler: str = "copula"
    chunk_size: int = 2**16
    workers: int = 1

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError("trials must be a positive integer")
        if int(self.chunk_size) != self.chunk_size or self.chunk_size < 1:
            raise DomainError("chunk_size must be a positive integer")
        if self.sampler not in SAMPLERS:
            raise DomainError(f"sampler must be one of {SAMPLERS}")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")


def chunk_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for one (user, chunk) substream."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def sample_copula_gains(rng: np.random.Generator, f: FadingParams, cfg: FasConfig, size=None):
    """Port gains with Gamma(m, omega/m) marginals joined by the t-copula.

    Returns shape ``(N,)`` when ``size`` is None, else ``(size, N)``.
    """
    n = 1 if size is None else int(size)
    N = cfg.n_ports
    theta = effective_theta(cfg)
    nu = cfg.dof
    if theta >= 0:
        z0 = rng.standard_normal((n, 1))
        eps = rng.standard_normal((n, N))
        z = math.sqrt(theta) * z0 + math.sqrt(max(1.0 - theta, 0.0)) * eps
    else:
        corr = np.full((N, N), theta)
        np.fill_diagonal(corr, 1.0)
        z = rng.standard_normal((n, N)) @ np.linalg.cholesky(corr).T
    s = rng.chisquare(nu, size=(n, 1))
    t = z * np.sqrt(nu / s)
    lower = sc.stdtr(nu, t)
    upper = sc.stdtr(nu, -t)
    gains = np.asarray(gamma_gain_quantile(lower, f, upper=upper))
    return gains[0] if size is None else gains


def sample_physical_gains(rng: np.random.Generator, f: FadingParams, cfg: FasConfig, size=None):
    """Port gains from ``m`` i.i.d. correlated Rayleigh fields (integer m only)."""
    if float(f.m) != int(f.m):
        raise DomainError(
            f"physical sampler needs an integer Nakagami m (got {f.m}); use the copula sampler"
        )
    n = 1 if size is None else int(size)
    lam, vec = np.linalg.eigh(correlation_matrix(cfg))
    factor = vec * np.sqrt(np.clip(lam, 0.0, None))
    N = cfg.n_ports
    g = np.zeros((n, N))
    for _ in range(int(f.m)):
        h = (rng.standard_normal((n, N)) + 1j * rng.standard_normal((n, N))) / math.sqrt(2.0)
        field = h @ factor.T
        g += field.real ** 2 + field.imag ** 2
    g *= f.omega / f.m
    return g[0] if size is None else g


def sample_relay_gain(rng: np.random.Generator, f: FadingParams, size=None):
    return rng.gamma(f.m, f.omega / f.m, size=size)


def _user_gains(rng, user, sampler: str, n: int):
    if sampler == "copula":
        return sample_copula_gains(rng, user.fading, user.fas, n)
    return sample_physical_gains(rng, user.fading, user.fas, n)


def _run_chunks(count_chunk, mc: McConfig):
    n_chunks = -(-mc.trials // mc.chunk_size)
    sizes = [min(mc.chunk_size, mc.trials - c * mc.chunk_size) for c in range(n_chunks)]
    if mc.workers == 1:
        counts = [count_chunk(c, sizes[c]) for c in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            counts = list(pool.map(count_chunk, range(n_chunks), sizes))
    return int(sum(counts))


def _estimate(outages: int, trials: int) -> rsma.OpEstimate:
    p = outages / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    return rsma.OpEstimate(p, "monte_carlo", std_error=se, trials=trials, outages=outages)


def _warn_if_infeasible(k, scenario):
    try:
        rsma.threshold_components(k, scenario)
    except InfeasibleConfigurationError as exc:
        warnings.warn(f"simulating an infeasible configuration: {exc}", RuntimeWarning, stacklevel=3)


def simulate_op(k: int, scenario: rsma.RsmaScenario, mc: McConfig = McConfig()) -> rsma.OpEstimate:
    """Fraction of trials in which user k fails any of its four decodings."""
    _warn_if_infeasible(k, scenario)
    user = scenario.user(k)
    relay = scenario.relay_link()
    link = scenario.user_link(k)
    power = scenario.power
    th = user.thresholds
    common_interference = scenario.p_b if scenario.paper_literal_typos else None

    def count_chunk(c, n):
        rng = chunk_rng(mc.seed, k, c)
        g_relay = sample_relay_gain(rng, scenario.uav_fading, n)
        g_fas = _user_gains(rng, user, mc.sampler, n).max(axis=1)
        ok = (
            (rsma.sinr_relay_common(g_relay, relay, power) > th.common)
            & (rsma.sinr_relay_private(k, g_relay, relay, power) > th.private)
            & (rsma.sinr_user_common(g_fas, link, power, common_interference) > th.common)
            & (rsma.sinr_user_private(k, g_fas, link, power) > th.private)
        )
        return n - int(np.count_nonzero(ok))

    return _estimate(_run_chunks(count_chunk, mc), mc.trials)


def simulate_noma_op(k: int, scenario: rsma.RsmaScenario, mc: McConfig, factors) -> rsma.OpEstimate:
    """NOMA counterpart of :func:`simulate_op`; see :func:`rsma.noma_outage_mc`."""
    user = scenario.user(k)
    relay = scenario.relay_link()
    link = scenario.user_link(k)
    targets = [rsma.noma_rate_equivalent_threshold(u.thresholds) for u in scenario.users]

    def count_chunk(c, n):
        rng = chunk_rng(mc.seed, k, c)
        g_relay = sample_relay_gain(rng, scenario.uav_fading, n)
        g_fas = _user_gains(rng, user, mc.sampler, n).max(axis=1)
        ok = rsma.noma_decode_ok(k, g_relay, relay, factors, targets) & rsma.noma_decode_ok(
            k, g_fas, link, factors, targets
        )
        return n - int(np.count_nonzero(ok))

    return _estimate(_run_chunks(count_chunk, mc), mc.trials)
