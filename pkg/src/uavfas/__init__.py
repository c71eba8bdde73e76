"""Outage analysis of UAV-relayed rate-splitting multiple access with fluid-antenna users."""
from .channel import FadingParams, FasConfig, fas_gain_cdf, fas_gain_cdf_asymptotic, gamma_gain_cdf
from .errors import (
    ConfigError,
    DomainError,
    InfeasibleConfigurationError,
    InvalidCorrelationError,
    PortIndexError,
)
from .geometry import EnvParams, Position3
from .montecarlo import McConfig, simulate_op
from .rsma import (
    OpEstimate,
    RsmaPower,
    RsmaScenario,
    Thresholds,
    UserConfig,
    dbm_to_watts,
    effective_thresholds,
    feasibility_bounds,
    noma_outage_mc,
    outage_probability,
    outage_probability_asymptotic,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "EnvParams",
    "FadingParams",
    "FasConfig",
    "InfeasibleConfigurationError",
    "InvalidCorrelationError",
    "McConfig",
    "OpEstimate",
    "PortIndexError",
    "Position3",
    "RsmaPower",
    "RsmaScenario",
    "Thresholds",
    "UserConfig",
    "dbm_to_watts",
    "effective_thresholds",
    "fas_gain_cdf",
    "fas_gain_cdf_asymptotic",
    "feasibility_bounds",
    "gamma_gain_cdf",
    "noma_outage_mc",
    "outage_probability",
    "outage_probability_asymptotic",
    "simulate_op",
]
