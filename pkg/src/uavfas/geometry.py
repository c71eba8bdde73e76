"""Air-to-ground geometry and large-scale path loss for a hovering UAV."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "Position3",
    "EnvParams",
    "horizontal_distance",
    "elevation_angle",
    "los_probability",
    "nlos_probability",
    "link_distance",
    "path_loss",
]


@dataclass(frozen=True)
class Position3:
    """Cartesian position in meters."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise DomainError(f"position coordinates must be finite: {self}")

    def as_tuple(self):
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class EnvParams:
    """Propagation environment.

    mu1, mu2 shape the logistic LoS curve (elevation in degrees); eta1/eta2
    are the LoS/NLoS reference gains at 1 m and beta the path-loss exponent.
    Defaults describe a 3.5 GHz suburban deployment.
    """

    mu1: float = 5.0188
    mu2: float = 0.3511
    eta1: float = 4.65e-5
    eta2: float = 4.65e-5
    beta: float = 2.0

    def __post_init__(self):
        if not (self.mu1 > 0 and self.mu2 > 0):
            raise DomainError("mu1 and mu2 must be positive")
        if not (self.eta1 > 0 and self.eta2 > 0):
            raise DomainError("eta1 and eta2 must be positive")
        if not self.beta >= 1:
            raise DomainError("path-loss exponent beta must be >= 1")


def horizontal_distance(a: Position3, i: Position3) -> float:
    return math.hypot(a.x - i.x, a.y - i.y)


def elevation_angle(a: Position3, i: Position3) -> float:
    """Elevation of the UAV ``a`` seen from ground node ``i``, in degrees.

    Only the UAV altitude enters, as in the standard air-to-ground model
    where ground nodes sit at z = 0.
    """
    d = horizontal_distance(a, i)
    if d == 0.0:
        if a.z == 0.0:
            raise DomainError("elevation angle undefined: UAV on the ground above the node")
        return 90.0
    return math.degrees(math.atan(a.z / d))


def los_probability(theta_deg: float, env: EnvParams) -> float:
    if not 0.0 <= theta_deg <= 90.0:
        raise DomainError(f"elevation angle must lie in [0, 90] degrees, got {theta_deg}")
    return 1.0 / (1.0 + env.mu1 * math.exp(-env.mu2 * (theta_deg - env.mu1)))


def nlos_probability(theta_deg: float, env: EnvParams) -> float:
    return 1.0 - los_probability(theta_deg, env)


def link_distance(a: Position3, i: Position3) -> float:
    return math.hypot(a.x - i.x, a.y - i.y, a.z - i.z)


def path_loss(a: Position3, i: Position3, env: EnvParams) -> float:
    """Expected path-loss coefficient (LoS/NLoS mixture) times r^-beta."""
    r = link_distance(a, i)
    if r == 0.0:
        raise DomainError("path loss undefined at zero link distance")
    p_los = los_probability(elevation_angle(a, i), env)
    p_nlos = 1.0 - p_los
    return (env.eta1 * p_los + env.eta2 * p_nlos) * r ** (-env.beta)
