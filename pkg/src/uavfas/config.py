"""Run configuration: YAML document -> :class:`RunSpec`.

Every key is optional; missing values fall back to the reference
deployment (see :data:`DEFAULT_CONFIG`). Unknown keys are errors. Powers
may be given as plain numbers (watts) or as strings with a unit suffix:
``"5 dBm"``, ``"-70dBm"``, ``"3 mW"``, ``"0.5 W"``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import yaml

from .channel import FadingParams, FasConfig
from .errors import ConfigError
from .geometry import EnvParams, Position3
from .montecarlo import McConfig
from .rsma import RsmaPower, RsmaScenario, Thresholds, UserConfig, dbm_to_watts

__all__ = ["RunSpec", "Sweep", "load_config", "parse_config", "parse_power", "DEFAULT_CONFIG", "MODES",
           "SWEEP_VARIABLES", "apply_sweep"]

MODES = ("exact", "asymptotic", "monte_carlo", "noma")
MODE_ALIASES = {"mc": "monte_carlo", "montecarlo": "monte_carlo"}
SWEEP_VARIABLES = ("power_dbm", "alpha_c", "n_ports", "aperture", "m_user", "threshold_common")

DEFAULT_CONFIG = """\
# Reference deployment: one BS, one UAV relay, two ground users with
# 2x2-port fluid antennas. Every key is optional.
scenario:
  bs: [0.0, 0.0, 0.0]            # metres
  uav: [10.0, 10.0, 100.0]
  env:
    mu1: 5.0188                  # LoS-probability fit constants
    mu2: 0.3511
    eta1: 4.65e-5                # LoS / NLoS reference path gains
    eta2: 4.65e-5
    beta: 2.0                    # path-loss exponent
  p_b: 5 dBm                     # BS transmit power
  p_a: 5 dBm                     # UAV transmit power
  uav_noise: -70 dBm
  uav_fading: {m: 4, omega: 1.0}
  paper_literal_typos: false
  power:
    alpha_c: 0.6                 # common-stream share
    private_shares: [0.75, 0.25] # split of the remaining 1 - alpha_c (or give alpha_p directly)
  user_defaults:
    noise_power: -70 dBm
    fading: {m: 2, omega: 1.0}
    fas: {n1: 2, n2: 2, w1: 1.0, w2: 1.0, dof: 25.0, theta_override: null,
          kernel: bessel_j0, theta_rule: mean_square}
    thresholds: {common: 0.1, private: 0.01}
  users:                         # each entry may override any user_defaults key
    - position: [200.0, 200.0, 0.0]
    - position: [180.0, 180.0, 0.0]
sweep:
  variable: power_dbm
  values: [0, 5, 10, 15, 20, 25, 30]
modes: [exact, asymptotic]
mc: {trials: 1000000, seed: 20250101, sampler: copula, chunk_size: 65536, workers: 1}
noma: {factors: [0.75, 0.25]}
outputs: {csv: null, svg: null}
"""

_POWER_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(dBm|mW|W)\s*$")


@dataclass(frozen=True)
class Sweep:
    variable: str
    values: Tuple[float, ...]


@dataclass(frozen=True)
class RunSpec:
    scenario: RsmaScenario
    sweep: Optional[Sweep] = None
    modes: Tuple[str, ...] = ("exact", "asymptotic")
    mc: McConfig = McConfig()
    noma_factors: Tuple[float, float] = (0.75, 0.25)
    csv_path: Optional[str] = None
    svg_path: Optional[str] = None
    power_shares: Tuple[float, ...] = field(default=(0.75, 0.25), compare=False)


def parse_power(value, key: str) -> float:
    """Watts from a number or a unit-tagged string."""
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a power, got {value!r}")
    if isinstance(value, (int, float)):
        w = float(value)
    elif isinstance(value, str):
        m = _POWER_RE.match(value)
        if not m:
            raise ConfigError(f"{key}: cannot parse power {value!r} (use e.g. '5 dBm', '2 mW', '0.1 W')")
        x, unit = float(m.group(1)), m.group(2)
        w = dbm_to_watts(x) if unit == "dBm" else x * (1e-3 if unit == "mW" else 1.0)
    else:
        raise ConfigError(f"{key}: expected a power, got {value!r}")
    if not w > 0:
        raise ConfigError(f"{key}: power must be positive")
    return w


def _check_keys(d, allowed, where: str):
    if d is None:
        return {}
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(d).__name__}")
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}; allowed {sorted(allowed)}")
    return d


def _position(v, where) -> Position3:
    if not (isinstance(v, (list, tuple)) and len(v) in (2, 3)):
        raise ConfigError(f"{where}: expected [x, y] or [x, y, z]")
    return Position3(*(float(c) for c in v))


def _fading(d, base: FadingParams, where) -> FadingParams:
    d = _check_keys(d, ("m", "omega"), where)
    return FadingParams(float(d.get("m", base.m)), float(d.get("omega", base.omega)))


_FAS_KEYS = ("n1", "n2", "w1", "w2", "dof", "theta_override", "kernel", "theta_rule")


def _fas(d, base: FasConfig, where) -> FasConfig:
    d = _check_keys(d, _FAS_KEYS, where)
    return replace(base, **d)


def _thresholds(d, base: Thresholds, where) -> Thresholds:
    d = _check_keys(d, ("common", "private"), where)
    return Thresholds(float(d.get("common", base.common)), float(d.get("private", base.private)))


_USER_KEYS = ("noise_power", "fading", "fas", "thresholds")


def _user(d, base: UserConfig, where) -> UserConfig:
    d = _check_keys(d, _USER_KEYS + ("position",), where)
    u = base
    if "position" in d:
        u = replace(u, position=_position(d["position"], f"{where}.position"))
    if "noise_power" in d:
        u = replace(u, noise_power=parse_power(d["noise_power"], f"{where}.noise_power"))
    if "fading" in d:
        u = replace(u, fading=_fading(d["fading"], u.fading, f"{where}.fading"))
    if "fas" in d:
        u = replace(u, fas=_fas(d["fas"], u.fas, f"{where}.fas"))
    if "thresholds" in d:
        u = replace(u, thresholds=_thresholds(d["thresholds"], u.thresholds, f"{where}.thresholds"))
    return u


def _scenario(d) -> Tuple[RsmaScenario, Tuple[float, ...]]:
    d = _check_keys(d, ("bs", "uav", "env", "p_b", "p_a", "uav_noise", "uav_fading", "paper_literal_typos",
                        "power", "user_defaults", "users"), "scenario")
    ref = RsmaScenario.default()
    kw: Dict[str, Any] = {}
    for key in ("bs", "uav"):
        if key in d:
            kw[key] = _position(d[key], f"scenario.{key}")
    if "env" in d:
        env = _check_keys(d["env"], ("mu1", "mu2", "eta1", "eta2", "beta"), "scenario.env")
        kw["env"] = replace(EnvParams(), **{k: float(v) for k, v in env.items()})
    for key in ("p_b", "p_a", "uav_noise"):
        if key in d:
            kw[key] = parse_power(d[key], f"scenario.{key}")
    if "uav_fading" in d:
        kw["uav_fading"] = _fading(d["uav_fading"], ref.uav_fading, "scenario.uav_fading")
    if "paper_literal_typos" in d:
        kw["paper_literal_typos"] = bool(d["paper_literal_typos"])

    base_user = _user(d.get("user_defaults"), replace(ref.users[0], position=Position3(0, 0, 0)),
                      "scenario.user_defaults")
    if "position" in (d.get("user_defaults") or {}):
        raise ConfigError("scenario.user_defaults: 'position' must be given per user")
    if "users" in d:
        raw = d["users"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("scenario.users: expected a non-empty list")
        users = []
        for i, u in enumerate(raw):
            if not isinstance(u, dict) or "position" not in u:
                raise ConfigError(f"scenario.users[{i}]: 'position' is required")
            users.append(_user(u, base_user, f"scenario.users[{i}]"))
    else:
        users = [replace(base_user, position=u.position) for u in ref.users]

    p = _check_keys(d.get("power"), ("alpha_c", "private_shares", "alpha_p"), "scenario.power")
    if "alpha_p" in p and "private_shares" in p:
        raise ConfigError("scenario.power: give either alpha_p or private_shares, not both")
    alpha_c = float(p.get("alpha_c", 0.6))
    if "alpha_p" in p:
        power = RsmaPower(alpha_c, tuple(float(a) for a in p["alpha_p"]))
        shares = tuple(a / power.private_total for a in power.alpha_p)
    else:
        default_shares = (0.75, 0.25) if len(users) == 2 else (1.0,) * len(users)
        shares = tuple(float(s) for s in p.get("private_shares", default_shares))
        if len(shares) != len(users):
            raise ConfigError(f"scenario.power: {len(shares)} private shares for {len(users)} users")
        if any(s <= 0 for s in shares):
            raise ConfigError("scenario.power.private_shares: shares must be positive")
        power = RsmaPower.from_shares(alpha_c, shares)
    return RsmaScenario(users=tuple(users), power=power, **{**_scenario_defaults(ref), **kw}), shares


def _scenario_defaults(ref: RsmaScenario):
    return dict(bs=ref.bs, uav=ref.uav, env=ref.env, p_b=ref.p_b, p_a=ref.p_a, uav_noise=ref.uav_noise,
                uav_fading=ref.uav_fading, paper_literal_typos=ref.paper_literal_typos)


def _modes(v) -> Tuple[str, ...]:
    if isinstance(v, str):
        v = [s for s in re.split(r"[,\s]+", v) if s]
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError("modes: at least one mode is required")
    out = []
    for m in v:
        m = MODE_ALIASES.get(str(m).lower(), str(m).lower())
        if m not in MODES:
            raise ConfigError(f"modes: unknown mode {m!r}; choose from {MODES}")
        if m not in out:
            out.append(m)
    return tuple(out)


def _sweep(d) -> Optional[Sweep]:
    if d is None:
        return None
    d = _check_keys(d, ("variable", "values"), "sweep")
    var = d.get("variable")
    if var not in SWEEP_VARIABLES:
        raise ConfigError(f"sweep.variable: {var!r} is not one of {SWEEP_VARIABLES}")
    vals = d.get("values")
    if not isinstance(vals, list) or not vals:
        raise ConfigError("sweep.values: expected a non-empty list")
    vals = tuple(float(v) for v in vals)
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError("sweep.values: values must be strictly increasing")
    if var in ("n_ports",) and any(v != int(v) or v < 1 for v in vals):
        raise ConfigError("sweep.values: port counts must be positive integers")
    return Sweep(var, vals)


def parse_config(text: str, source: str = "<config>") -> RunSpec:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{source}: YAML parse error{where}: {getattr(exc, 'problem', exc)}") from None
    doc = _check_keys(doc, ("scenario", "sweep", "modes", "mc", "noma", "outputs"), source)
    try:
        scenario, shares = _scenario(doc.get("scenario"))
        mc = _check_keys(doc.get("mc"), ("trials", "seed", "sampler", "chunk_size", "workers"), "mc")
        noma = _check_keys(doc.get("noma"), ("factors",), "noma")
        outputs = _check_keys(doc.get("outputs"), ("csv", "svg"), "outputs")
        factors = tuple(float(f) for f in noma.get("factors", (0.75, 0.25)))
        if len(factors) != 2 or abs(sum(factors) - 1) > 1e-12 or factors[0] <= factors[1]:
            raise ConfigError("noma.factors: expected [a1, a2] with a1 > a2 > 0 and a1 + a2 = 1")
        return RunSpec(
            scenario=scenario,
            sweep=_sweep(doc.get("sweep")),
            modes=_modes(doc.get("modes", ["exact", "asymptotic"])),
            mc=McConfig(**{k: (v if k == "sampler" else int(v)) for k, v in mc.items()}),
            noma_factors=factors,
            csv_path=outputs.get("csv"),
            svg_path=outputs.get("svg"),
            power_shares=shares,
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{source}: invalid configuration: {exc}") from None


def load_config(path) -> RunSpec:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, str(path))


# -- sweeps -------------------------------------------------------------------------

def apply_sweep(sc: RsmaScenario, variable: str, value: float, shares=(0.75, 0.25)) -> RsmaScenario:
    """Scenario with one sweep variable set (applied to every user)."""
    if variable == "power_dbm":
        return sc.with_power_dbm(value)
    if variable == "alpha_c":
        return replace(sc, power=RsmaPower.from_shares(value, shares))
    if variable == "threshold_common":
        return sc.with_thresholds(common=value)
    if variable == "m_user":
        return replace(sc, users=tuple(replace(u, fading=FadingParams(value, u.fading.omega)) for u in sc.users))
    if variable in ("n_ports", "aperture"):
        users = []
        for u in sc.users:
            n = int(value) if variable == "n_ports" else u.fas.n_ports
            w = value if variable == "aperture" else u.fas.aperture
            grid = FasConfig.from_totals(n, w)
            users.append(replace(u, fas=replace(u.fas, n1=grid.n1, n2=grid.n2, w1=grid.w1, w2=grid.w2)))
        return replace(sc, users=tuple(users))
    raise ConfigError(f"unknown sweep variable {variable!r}")
