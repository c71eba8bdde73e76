"""RSMA over a decode-and-forward UAV relay: SINRs, thresholds, outage.

User indices are 1-based throughout (user 1 is the first entry of
``RsmaScenario.users``).

Two misprints in the published second-hop expressions are corrected by
default: the interference term of the user's common-stream SINR uses the
UAV power ``p_a``, and the user's private gain threshold uses the user's
noise and ``p_a``. ``RsmaScenario.paper_literal_typos=True`` restores the
printed forms for auditing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from . import channel, geometry
from .channel import FadingParams, FasConfig
from .errors import DomainError, InfeasibleConfigurationError
from .geometry import EnvParams, Position3
from .specfun import clamp_probability

__all__ = [
    "dbm_to_watts",
    "watts_to_dbm",
    "RsmaPower",
    "Thresholds",
    "LinkBudget",
    "UserConfig",
    "RsmaScenario",
    "OpEstimate",
    "GainThresholds",
    "sinr_relay_common",
    "sinr_relay_private",
    "sinr_user_common",
    "sinr_user_private",
    "feasibility_bounds",
    "threshold_components",
    "effective_thresholds",
    "outage_probability",
    "outage_probability_asymptotic",
    "noma_outage_mc",
]


def dbm_to_watts(dbm):
    if np.ndim(dbm):
        return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(w):
    return 10.0 * math.log10(w) + 30.0


@dataclass(frozen=True)
class RsmaPower:
    """Power split between the common stream and the K private streams."""

    alpha_c: float
    alpha_p: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha_p", tuple(float(a) for a in self.alpha_p))
        if not self.alpha_p:
            raise DomainError("at least one private stream is required")
        if not all(0 < a < 1 for a in (self.alpha_c, *self.alpha_p)):
            raise DomainError(f"power factors must lie in (0, 1): {self.alpha_c}, {self.alpha_p}")
        total = self.alpha_c + sum(self.alpha_p)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"power factors must sum to 1, got {total!r}")

    @classmethod
    def from_shares(cls, alpha_c: float, shares: Sequence[float] = (0.75, 0.25)) -> "RsmaPower":
        """Common factor plus private factors ``share_k * (1 - alpha_c)``."""
        if not 0 < alpha_c < 1:
            raise DomainError(f"alpha_c must lie in (0, 1), got {alpha_c}")
        s = sum(shares)
        alpha_p = [sh / s * (1.0 - alpha_c) for sh in shares]
        # absorb round-off so the sum constraint holds exactly
        alpha_p[-1] = 1.0 - alpha_c - sum(alpha_p[:-1])
        return cls(alpha_c, tuple(alpha_p))

    @property
    def n_users(self) -> int:
        return len(self.alpha_p)

    @property
    def private_total(self) -> float:
        return math.fsum(self.alpha_p)

    def private(self, k: int) -> float:
        return self.alpha_p[k - 1]

    def private_interference(self, k: int) -> float:
        return math.fsum(a for j, a in enumerate(self.alpha_p, start=1) if j != k)


@dataclass(frozen=True)
class Thresholds:
    """SINR targets for the common and the private stream of one user."""

    common: float = 0.1
    private: float = 0.01

    def __post_init__(self):
        if not (self.common > 0 and self.private > 0):
            raise DomainError("SINR thresholds must be positive")


@dataclass(frozen=True)
class LinkBudget:
    tx_power: float
    path_loss: float
    noise_power: float
    fading: FadingParams
    fas: Optional[FasConfig] = None

    def __post_init__(self):
        if not (self.tx_power > 0 and self.path_loss > 0 and self.noise_power > 0):
            raise DomainError("link powers and path loss must be positive")

    @property
    def snr_per_gain(self) -> float:
        """Received SNR per unit of small-scale gain, P L / sigma^2."""
        return self.tx_power * self.path_loss / self.noise_power


@dataclass(frozen=True)
class UserConfig:
    position: Position3
    fading: FadingParams = FadingParams(2.0, 1.0)
    fas: FasConfig = FasConfig()
    noise_power: float = 1e-10
    thresholds: Thresholds = Thresholds()


@dataclass(frozen=True)
class RsmaScenario:
    """Everything needed to evaluate per-user outage.

    Powers are in watts. :meth:`default` builds the two-user reference
    deployment (UAV at (10, 10, 100) m, users at (200, 200, 0) and
    (180, 180, 0) m, 5 dBm transmit powers, -70 dBm noise).
    """

    users: Tuple[UserConfig, ...]
    power: RsmaPower
    bs: Position3 = Position3(0.0, 0.0, 0.0)
    uav: Position3 = Position3(10.0, 10.0, 100.0)
    env: EnvParams = EnvParams()
    p_b: float = dbm_to_watts(5.0)
    p_a: float = dbm_to_watts(5.0)
    uav_fading: FadingParams = FadingParams(4.0, 1.0)
    uav_noise: float = dbm_to_watts(-70.0)
    paper_literal_typos: bool = False

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        if not self.users:
            raise DomainError("scenario needs at least one user")
        if self.power.n_users != len(self.users):
            raise DomainError(
                f"{len(self.users)} users but {self.power.n_users} private power factors"
            )
        if not (self.p_b > 0 and self.p_a > 0 and self.uav_noise > 0):
            raise DomainError("transmit and noise powers must be positive")

    @classmethod
    def default(cls, **overrides) -> "RsmaScenario":
        noise = dbm_to_watts(-70.0)
        users = (
            UserConfig(Position3(200.0, 200.0, 0.0), noise_power=noise),
            UserConfig(Position3(180.0, 180.0, 0.0), noise_power=noise),
        )
        base = cls(users=users, power=RsmaPower.from_shares(0.6, (0.75, 0.25)))
        return replace(base, **overrides) if overrides else base

    @property
    def n_users(self) -> int:
        return len(self.users)

    def user(self, k: int) -> UserConfig:
        if not 1 <= k <= self.n_users:
            raise DomainError(f"user index {k} outside 1..{self.n_users}")
        return self.users[k - 1]

    def relay_link(self) -> LinkBudget:
        return LinkBudget(
            self.p_b, geometry.path_loss(self.uav, self.bs, self.env), self.uav_noise, self.uav_fading
        )

    def user_link(self, k: int) -> LinkBudget:
        u = self.user(k)
        return LinkBudget(
            self.p_a, geometry.path_loss(self.uav, u.position, self.env), u.noise_power, u.fading, u.fas
        )

    # convenience modifiers used by sweeps
    def with_power_dbm(self, dbm: float) -> "RsmaScenario":
        w = dbm_to_watts(dbm)
        return replace(self, p_b=w, p_a=w)

    def with_users(self, **changes) -> "RsmaScenario":
        return replace(self, users=tuple(replace(u, **changes) for u in self.users))

    def with_fas(self, **changes) -> "RsmaScenario":
        return replace(self, users=tuple(replace(u, fas=replace(u.fas, **changes)) for u in self.users))

    def with_thresholds(self, common=None, private=None) -> "RsmaScenario":
        def upd(t):
            return Thresholds(t.common if common is None else common, t.private if private is None else private)

        return replace(self, users=tuple(replace(u, thresholds=upd(u.thresholds)) for u in self.users))


@dataclass(frozen=True)
class OpEstimate:
    """An outage probability and where it came from.

    For exact and asymptotic values ``factors`` holds the relay-hop and
    user-hop success probabilities whose product is ``1 - value``.
    """

    value: float
    kind: str
    std_error: Optional[float] = None
    trials: Optional[int] = None
    outages: Optional[int] = None
    factors: Optional[Tuple[float, float]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("exact", "asymptotic", "monte_carlo"):
            raise DomainError(f"unknown estimate kind {self.kind!r}")
        if (self.std_error is not None) != (self.kind == "monte_carlo"):
            raise DomainError("std_error is present exactly for Monte Carlo estimates")
        if not 0.0 <= self.value <= 1.0:
            raise DomainError(f"outage probability {self.value} outside [0, 1]")


# -- SINRs ------------------------------------------------------------------------

def _sinr(g, signal, interference, lb: LinkBudget, interference_power=None):
    g = np.asarray(g, dtype=float)
    p_int = lb.tx_power if interference_power is None else interference_power
    out = lb.tx_power * signal * lb.path_loss * g / (p_int * lb.path_loss * g * interference + lb.noise_power)
    return float(out) if out.ndim == 0 else out


def sinr_relay_common(g, lb: LinkBudget, power: RsmaPower):
    """Common stream at the UAV, all private streams treated as noise."""
    return _sinr(g, power.alpha_c, power.private_total, lb)


def sinr_relay_private(k: int, g, lb: LinkBudget, power: RsmaPower):
    """Private stream of user k at the UAV after removing the common stream."""
    return _sinr(g, power.private(k), power.private_interference(k), lb)


def sinr_user_common(g_fas, lb: LinkBudget, power: RsmaPower, interference_power=None):
    """Common stream at the user's best port.

    ``interference_power`` replaces the transmit power in the interference
    term only; the literal audit mode passes the BS power here.
    """
    return _sinr(g_fas, power.alpha_c, power.private_total, lb, interference_power)


def sinr_user_private(k: int, g_fas, lb: LinkBudget, power: RsmaPower):
    return _sinr(g_fas, power.private(k), power.private_interference(k), lb)


# -- thresholds and feasibility -------------------------------------------------------

def feasibility_bounds(power: RsmaPower, k: int) -> Tuple[float, float]:
    """Open upper bounds on the common and private SINR thresholds of user k."""
    common = power.alpha_c / power.private_total
    interf = power.private_interference(k)
    private = math.inf if interf == 0 else power.private(k) / interf
    return common, private


@dataclass(frozen=True)
class GainThresholds:
    """Small-scale gain levels below which each stream fails."""

    relay_common: float
    relay_private: float
    user_common: float
    user_private: float

    @property
    def relay(self) -> float:
        return max(self.relay_common, self.relay_private)

    @property
    def user(self) -> float:
        return max(self.user_common, self.user_private)


def _check_feasible(k: int, scenario: RsmaScenario):
    th = scenario.user(k).thresholds
    max_c, max_p = feasibility_bounds(scenario.power, k)
    if not th.common < max_c:
        raise InfeasibleConfigurationError(
            f"user {k}: common threshold {th.common} must be below alpha_c/sum(alpha_p) = {max_c}",
            user=k, stream="common", bound=max_c,
        )
    if not th.private < max_p:
        raise InfeasibleConfigurationError(
            f"user {k}: private threshold {th.private} must be below {max_p}",
            user=k, stream="private", bound=max_p,
        )


def threshold_components(k: int, scenario: RsmaScenario) -> GainThresholds:
    """The four gain thresholds of user k (raises if infeasible)."""
    _check_feasible(k, scenario)
    pw = scenario.power
    th = scenario.user(k).thresholds
    relay = scenario.relay_link()
    link = scenario.user_link(k)
    c_margin = pw.alpha_c - th.common * pw.private_total
    p_margin = pw.private(k) - th.private * pw.private_interference(k)

    relay_c = th.common * relay.noise_power / (relay.tx_power * relay.path_loss * c_margin)
    relay_p = th.private * relay.noise_power / (relay.tx_power * relay.path_loss * p_margin)
    user_c = th.common * link.noise_power / (link.tx_power * link.path_loss * c_margin)
    if scenario.paper_literal_typos:
        user_p = th.private * scenario.uav_noise / (scenario.p_b * link.path_loss * p_margin)
    else:
        user_p = th.private * link.noise_power / (link.tx_power * link.path_loss * p_margin)
    return GainThresholds(relay_c, relay_p, user_c, user_p)


def effective_thresholds(k: int, scenario: RsmaScenario) -> Tuple[float, float]:
    """(relay-hop, user-hop) gain thresholds of user k."""
    t = threshold_components(k, scenario)
    return t.relay, t.user


# -- outage -------------------------------------------------------------------------

def _combine(f_relay: float, f_user: float, kind: str) -> OpEstimate:
    s_relay = 1.0 - f_relay
    s_user = 1.0 - f_user
    op = clamp_probability(f_relay + f_user - f_relay * f_user)
    return OpEstimate(op, kind, factors=(s_relay, s_user))


def outage_probability(k: int, scenario: RsmaScenario) -> OpEstimate:
    """Exact per-user outage: 1 - [1 - F_relay(zeta_relay)] [1 - F_best_port(zeta_user)]."""
    z_relay, z_user = effective_thresholds(k, scenario)
    user = scenario.user(k)
    f_relay = channel.gamma_gain_cdf(z_relay, scenario.uav_fading)
    f_user = channel.fas_gain_cdf(z_user, user.fading, user.fas)
    return _combine(f_relay, f_user, "exact")


def outage_probability_asymptotic(k: int, scenario: RsmaScenario) -> OpEstimate:
    """High-SNR outage with power-law marginals on both hops.

    The relay-hop power law is capped at 1 before combining, which only
    matters where the approximation is meaningless anyway.
    """
    z_relay, z_user = effective_thresholds(k, scenario)
    user = scenario.user(k)
    f_relay = min(1.0, channel.gamma_gain_cdf_asymptotic(z_relay, scenario.uav_fading))
    f_user = channel.fas_gain_cdf_asymptotic(z_user, user.fading, user.fas)
    return _combine(f_relay, f_user, "asymptotic")


# -- NOMA baseline ------------------------------------------------------------------

NOMA_DEFAULT_FACTORS = (0.75, 0.25)


def noma_rate_equivalent_threshold(th: Thresholds) -> float:
    """Single-stream SINR target carrying the same rate as common + private."""
    return (1.0 + th.common) * (1.0 + th.private) - 1.0


def noma_decode_ok(k: int, g, lb: LinkBudget, factors: Sequence[float], targets: Sequence[float],
                   decode_all: bool = False):
    """Whether the receiver of ``lb`` decodes what user k needs (SIC order by power).

    Streams are decoded strongest first, each treating the weaker ones as
    noise. User k needs every stream up to and including its own;
    ``decode_all`` requires all streams (not used for K = 2 users).
    """
    g = np.asarray(g, dtype=float)
    order = sorted(range(len(factors)), key=lambda j: -factors[j])
    stop = len(order) if decode_all else order.index(k - 1) + 1
    ok = np.ones(g.shape, dtype=bool)
    remaining = math.fsum(factors)
    for j in order[:stop]:
        remaining -= factors[j]
        sinr = _sinr(g, factors[j], max(remaining, 0.0), lb)
        ok &= np.asarray(sinr) > targets[j]
    return ok


def noma_outage_mc(k: int, scenario: RsmaScenario, trials: int = 10**6, seed: int = 0,
                   factors: Sequence[float] = NOMA_DEFAULT_FACTORS, mc=None) -> OpEstimate:
    """Monte Carlo outage of user k under a two-user NOMA baseline.

    The BS superposes the two users' signals with ``factors`` (larger factor
    for the far user, decoded first). The UAV and the user each have to
    decode the far user's stream and, for the near user, its own stream
    after SIC. Each user's target is the rate-equivalent single-stream
    SINR of its RSMA thresholds.
    """
    from . import montecarlo

    if scenario.n_users != 2:
        raise DomainError("NOMA baseline supports exactly two users")
    if len(factors) != 2 or abs(sum(factors) - 1.0) > 1e-12 or factors[0] <= factors[1]:
        raise DomainError("NOMA factors must be (a1, a2) with a1 > a2 and a1 + a2 = 1")
    cfg = mc or montecarlo.McConfig(trials=trials, seed=seed)
    return montecarlo.simulate_noma_op(k, scenario, cfg, tuple(factors))
