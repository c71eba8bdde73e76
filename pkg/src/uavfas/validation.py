"""Acceptance gates: analytic outage vs. Monte Carlo, limits, trends, kernels.

Each gate returns a :class:`GateResult`; :func:`run_all` runs them in
order. Gates 1-9 are blocking, gate 10 (the NOMA comparison, which
depends on a reconstructed baseline) only warns.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy import stats

from . import specfun
from .channel import FadingParams, gamma_gain_cdf
from .errors import InfeasibleConfigurationError
from .montecarlo import McConfig, simulate_op
from .rsma import (
    RsmaPower,
    RsmaScenario,
    dbm_to_watts,
    effective_thresholds,
    feasibility_bounds,
    noma_outage_mc,
    outage_probability,
    outage_probability_asymptotic,
)

__all__ = ["GateResult", "ValidationOptions", "GATES", "run_all", "literal_audit", "POWER_GRID_DBM"]

POWER_GRID_DBM = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
MIN_MEANINGFUL_TRIALS = 10_000


@dataclass
class GateResult:
    criterion: int
    name: str
    passed: bool
    blocking: bool = True
    detail: str = ""
    data: Dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def status(self) -> str:
        if self.passed:
            return "PASS"
        return "FAIL" if self.blocking else "WARN"

    def line(self) -> str:
        return f"[{self.status}] criterion {self.criterion}: {self.name} -- {self.detail}"

    def to_dict(self) -> Dict:
        d = asdict(self)
        d["status"] = self.status
        return d


@dataclass(frozen=True)
class ValidationOptions:
    trials: int = 10**6
    seed: int = 20250101
    workers: int = 1
    coverage_seeds: int = 50
    coverage_trials: int = 20_000
    noma_trials: int = 200_000
    power_grid: tuple = POWER_GRID_DBM

    def mc(self, **kw) -> McConfig:
        return McConfig(**{"trials": self.trials, "seed": self.seed, "workers": self.workers, **kw})


def _users(sc: RsmaScenario):
    return range(1, sc.n_users + 1)


# -- 1 ---------------------------------------------------------------------------------------

def gate_oracle(sc: RsmaScenario, opt: ValidationOptions) -> GateResult:
    """Exact OP within 3 standard errors of the copula-sampler Monte Carlo.

    The gate uses max(estimated se, se implied by the exact value) so that
    points with zero or all outages do not produce a zero-width interval.
    """
    rows, ok = [], True
    for dbm in opt.power_grid:
        s = sc.with_power_dbm(dbm)
        for k in _users(s):
            exact = outage_probability(k, s).value
            mc = simulate_op(k, s, opt.mc(sampler="copula"))
            se = max(mc.std_error, math.sqrt(exact * (1 - exact) / mc.trials))
            z = abs(exact - mc.value) / se if se > 0 else (0.0 if exact == mc.value else math.inf)
            ok &= z <= 3.0
            rows.append(dict(power_dbm=dbm, user=k, exact=exact, mc=mc.value, mc_se=mc.std_error, z=z))
    worst = max(rows, key=lambda r: r["z"])
    return GateResult(1, "analytic vs Monte Carlo", ok,
                      detail=f"max |z| = {worst['z']:.2f} at {worst['power_dbm']} dBm user {worst['user']}"
                             f" ({opt.trials} trials)",
                      data={"rows": rows})


# -- 2 ---------------------------------------------------------------------------------------

def gate_asymptote(sc: RsmaScenario, opt: ValidationOptions) -> GateResult:
    rows, ok, notes = [], True, []
    for k in _users(sc):
        ratios = []
        for dbm in opt.power_grid:
            s = sc.with_power_dbm(dbm)
            ex = outage_probability(k, s).value
            asy = outage_probability_asymptotic(k, s).value
            ratios.append((dbm, ex, asy / ex if ex > 0 else math.nan))
        rows += [dict(user=k, power_dbm=d, exact=e, ratio=r) for d, e, r in ratios]
        tail = [r for r in ratios if r[1] <= 1e-3]
        if not tail:
            ok = False
            notes.append(f"user {k}: exact OP never reaches 1e-3 on the grid")
            continue
        first = tail[0][2]
        in_band = 0.9 <= first <= 1.1
        dev = [abs(r[2] - 1) for r in tail]
        monotone = all(b < a for a, b in zip(dev, dev[1:]))
        ok &= in_band and monotone
        notes.append(f"user {k}: ratio {first:.3f} at {tail[0][0]} dBm"
                     f" ({'in' if in_band else 'outside'} [0.9, 1.1]), tail "
                     f"{'monotone' if monotone else 'not monotone'} toward 1")
    return GateResult(2, "asymptote convergence", ok, detail="; ".join(notes), data={"rows": rows})


# -- 3 ---------------------------------------------------------------------------------------

def gate_single_port(sc: RsmaScenario, opt: ValidationOptions) -> GateResult:
    one = sc.with_fas(n1=1, n2=1, theta_override=None)
    worst = 0.0
    for dbm in opt.power_grid:
        s = one.with_power_dbm(dbm)
        for k in _users(s):
            z_relay, z_user = effective_thresholds(k, s)
            u = s.user(k)
            ref = 1 - (1 - gamma_gain_cdf(z_relay, s.uav_fading)) * (1 - gamma_gain_cdf(z_user, u.fading))
            worst = max(worst, abs(outage_probability(k, s).value - ref))
    return GateResult(3, "single-port degeneracy", worst <= 1e-9, detail=f"max abs error {worst:.2e}",
                      data={"max_abs_error": worst})


# -- 4 ---------------------------------------------------------------------------------------

def gate_feasibility(sc: RsmaScenario, opt: ValidationOptions) -> GateResult:
    s5 = sc.with_power_dbm(5.0)
    checks, ok = [], True
    for k in _users(s5):
        max_c, max_p = feasibility_bounds(s5.power, k)
        for stream, bound in (("common", max_c), ("private", max_p)):
            if not math.isfinite(bound):
                continue
            kw = {stream: 0.999 * bound}
            inside = s5.with_thresholds(**kw)
            op = outage_probability(k, inside).value
            try:
                outage_probability(k, s5.with_thresholds(**{stream: 1.001 * bound}))
                raised = False
            except InfeasibleConfigurationError:
                raised = True
            good = op >= 0.999 and raised
            ok &= good
            checks.append(dict(user=k, stream=stream, bound=bound, op_inside=op, raised_outside=raised))
    bounds = sorted({round(c["bound"], 12) for c in checks})
    return GateResult(4, "feasibility boundary", ok,
                      detail=f"bounds {bounds}; min OP inside {min(c['op_inside'] for c in checks):.6f}",
                      data={"checks": checks})


# -- 5 ---------------------------------------------------------------------------------------

def gate_ports_trend(sc: RsmaScenario, opt: ValidationOptions) -> GateResult:
    notes, ok = [], True
    for k in _users(sc):
        ops = [outage_probability(k, sc.with_power_dbm(d)).value for d in opt.power_grid]
        dec = all(b < a for a, b in zip(ops, ops[1:]))
        ok &= dec
        notes.append(f"user {k} strictly decreasing in P: {dec}")
    s10 = sc.with_power_dbm(10.0)
    for k in _users(s10):
        four = outage_probability(k, s10.with_fas(n1=2, n2=2, w1=1.0, w2=1.0)).value
        single = outage_probability(k, s10.with_fas(n1=1, n2=1)).value
        big = outage_probability(k, s10.with_fas(n1=2, n2=2, w1=math.sqrt(2), w2=math.sqrt(2))).value
        small = outage_probability(k, s10.with_fas(n1=2, n2=2, w1=0.5, w2=0.5)).value
        ok &= four < single and big < small
        notes.append(f"user {k} @10 dBm: N=4 {four:.4g} vs N=1 {single:.4g}; W=2 {big:.4g} vs W=0.25 {small:.4g}")
    return GateResult(5, "ports and aperture trend", ok, detail="; ".join(notes))


# -- 6 ---------------------------------------------------------------------------------------

def gate_fading_trend(sc: RsmaScenario, opt: ValidationOptions, power_dbm: float = 20.0) -> GateResult:
    notes, ok = [], True
    s = sc.with_power_dbm(power_dbm)
    for k in _users(s):
        ops = [outage_probability(k, s.with_users(fading=FadingParams(m, 1.0))).value for m in (1, 2, 4)]
        dec = ops[0] > ops[1] > ops[2]
        ok &= dec
        notes.append(f"user {k} @{power_dbm} dBm m=1,2,4: " + ", ".join(f"{v:.3g}" for v in ops))
    if s.n_users >= 2:
        o1, o2 = outage_probability(1, s).value, outage_probability(2, s).value
        ok &= o2 < o1
        notes.append(f"user 2 {o2:.3g} vs user 1 {o1:.3g} @{power_dbm} dBm")
    # the order over the whole grid is reported; at the lowest powers both
    # values round to the same double
    order = []
    for d in opt.power_grid:
        sd = sc.with_power_dbm(d)
        if sd.n_users >= 2:
            o1, o2 = outage_probability(1, sd).value, outage_probability(2, sd).value
            order.append(dict(power_dbm=d, op1=o1, op2=o2, user2_better=o2 < o1))
    return GateResult(6, "Nakagami-m trend and user order", ok, detail="; ".join(notes), data={"order": order})


# -- 7 ---------------------------------------------------------------------------------------

def alpha_sweep(sc: RsmaScenario, gamma_c: float, grid, k: int = 1):
    rows = []
    for a in grid:
        s = replace(sc, power=RsmaPower.from_shares(float(a), _shares(sc))).with_thresholds(common=gamma_c)
        try:
            rows.append((float(a), outage_probability(k, s).value))
        except InfeasibleConfigurationError:
            rows.append((float(a), None))
    return rows


def _shares(sc: RsmaScenario):
    total = sc.power.private_total
    return tuple(a / total for a in sc.power.alpha_p)


def gate_alpha_shape(sc: RsmaScenario, opt: ValidationOptions, power_dbm: float = 30.0) -> GateResult:
    """Interior minimum over alpha_c, and where the infeasible region ends.

    The infeasible region is alpha_c <= gamma_c / (1 + gamma_c), so its
    right edge grows with gamma_c. The criterion as stated asks for the
    opposite direction; both directions are reported.
    """
    grid = np.round(np.arange(0.01, 1.0, 0.01), 2)
    s = sc.with_power_dbm(power_dbm)
    onsets, minima, curves = {}, {}, {}
    interior = True
    for gc in (0.3, 0.6):
        rows = alpha_sweep(s, gc, grid)
        curves[gc] = rows
        infeasible = [a for a, v in rows if v is None]
        onsets[gc] = max(infeasible) if infeasible else None
        feas = [(a, v) for a, v in rows if v is not None]
        vals = np.array([v for _, v in feas])
        i = int(np.argmin(vals))
        minima[gc] = feas[i][0]
        interior &= 0 < i < len(feas) - 1 and vals[i] < min(vals[0], vals[-1])
    stated = onsets[0.3] is not None and onsets[0.6] is not None and onsets[0.3] > onsets[0.6]
    observed = onsets[0.3] is not None and onsets[0.6] is not None and onsets[0.3] < onsets[0.6]
    ok = interior and stated
    detail = (f"interior minimum: {interior} (argmin alpha_c {minima}); infeasible up to alpha_c "
              f"{onsets[0.3]} at gamma_c=0.3 and {onsets[0.6]} at gamma_c=0.6 -> onset moves "
              f"{'right' if observed else 'left'} as gamma_c increases; stated requirement "
              f"'moves right as gamma_c decreases': {stated}")
    data = {
        "onsets": {str(k): v for k, v in onsets.items()},
        "argmin": {str(k): v for k, v in minima.items()},
        "onset_increases_with_gamma_c": observed,
        "curves": {str(k): v for k, v in curves.items()},
    }
    return GateResult(7, "alpha_c sweep shape", ok, detail=detail, data=data)


# -- 8 ---------------------------------------------------------------------------------------

def gate_specfun(sc: RsmaScenario, opt: ValidationOptions) -> GateResult:
    worst_z, n = 0.0, 0
    for x in (-1.0, 0.5, 2.0):
        for theta in (0.1, 0.5, 0.9):
            for dof in (3.0, 10.0, 25.0):
                spec = specfun.EquicorrMvt(4, dof, theta)
                det = specfun.equicorr_mvt_cdf_common(x, spec)
                q = specfun.mvt_cdf_qmc(np.full(4, x), spec.matrix(), dof, target_se=1e-4, seed=n)
                worst_z = max(worst_z, abs(det - q.value) / q.std_error)
                n += 1
    p = np.concatenate([np.linspace(1e-6, 1 - 1e-6, 201), [1e-10, 1 - 1e-10]])
    rt = max(float(np.max(np.abs(specfun.student_t_cdf(specfun.student_t_quantile(p, d), d) - p)))
             for d in (1.0, 3.0, 25.0))
    g = np.linspace(0.0, 20.0, 201)
    erl = 0.0
    for m in (1, 2, 3, 4, 6):
        closed = 1 - np.exp(-g) * sum(g**j / math.factorial(j) for j in range(m))
        erl = max(erl, float(np.max(np.abs(specfun.reg_lower_inc_gamma(m, g) - closed))))
    ok = worst_z <= 3.0 and rt <= 1e-9 and erl <= 1e-12
    return GateResult(8, "special-function kernels", ok,
                      detail=f"max |z| vs QMC {worst_z:.2f} over {n} points; quantile round-trip {rt:.1e};"
                             f" Erlang error {erl:.1e}",
                      data={"max_z": worst_z, "roundtrip": rt, "erlang": erl})


# -- 9 ---------------------------------------------------------------------------------------

def gate_mc_protocol(sc: RsmaScenario, opt: ValidationOptions, power_dbm: float = 15.0) -> GateResult:
    s = sc.with_power_dbm(power_dbm)
    base = McConfig(trials=max(opt.coverage_trials, 10_000) * 5 + 7, seed=opt.seed, chunk_size=4096)
    counts = [simulate_op(1, s, replace(base, workers=w)).outages for w in (1, 2, 4)]
    identical = len(set(counts)) == 1
    exact = outage_probability(1, s).value
    z = stats.norm.ppf(0.995)
    covered = 0
    for i in range(opt.coverage_seeds):
        est = simulate_op(1, s, McConfig(trials=opt.coverage_trials, seed=opt.seed + 1 + i))
        covered += abs(est.value - exact) <= z * est.std_error
    need = math.ceil(0.9 * opt.coverage_seeds)
    ok = identical and covered >= need
    return GateResult(9, "Monte Carlo determinism and coverage", ok,
                      detail=f"outage counts across 1/2/4 workers {counts}; 99% CI covered exact OP in "
                             f"{covered}/{opt.coverage_seeds} seeds (need {need})",
                      data={"counts": counts, "covered": covered})


# -- 10 --------------------------------------------------------------------------------------

def gate_noma(sc: RsmaScenario, opt: ValidationOptions) -> GateResult:
    rows, ok = [], True
    if sc.n_users != 2:
        return GateResult(10, "RSMA vs NOMA", False, blocking=False, detail="NOMA baseline needs two users")
    for dbm in opt.power_grid:
        s = sc.with_power_dbm(dbm)
        for k in (1, 2):
            r = outage_probability(k, s).value
            n = noma_outage_mc(k, s, trials=opt.noma_trials, seed=opt.seed)
            good = r <= n.value + 3 * n.std_error
            ok &= good
            rows.append(dict(power_dbm=dbm, user=k, rsma=r, noma=n.value, noma_se=n.std_error, rsma_not_worse=good))
    bad = [f"{r['power_dbm']} dBm user {r['user']}" for r in rows if not r["rsma_not_worse"]]
    detail = "RSMA not worse everywhere" if ok else "NOMA better at " + ", ".join(bad)
    return GateResult(10, "RSMA vs NOMA (reconstructed baseline)", ok, blocking=False,
                      detail=detail, data={"rows": rows})


GATES: Dict[int, Callable[[RsmaScenario, ValidationOptions], GateResult]] = {
    1: gate_oracle,
    2: gate_asymptote,
    3: gate_single_port,
    4: gate_feasibility,
    5: gate_ports_trend,
    6: gate_fading_trend,
    7: gate_alpha_shape,
    8: gate_specfun,
    9: gate_mc_protocol,
    10: gate_noma,
}


def run_gate(i: int, sc: RsmaScenario, opt: ValidationOptions) -> GateResult:
    t0 = time.perf_counter()
    res = GATES[i](sc, opt)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(sc: Optional[RsmaScenario] = None, opt: ValidationOptions = ValidationOptions(),
            only=None, echo: Optional[Callable[[str], None]] = None) -> List[GateResult]:
    sc = sc or RsmaScenario.default()
    if opt.trials < MIN_MEANINGFUL_TRIALS:
        warnings.warn(f"{opt.trials} Monte Carlo trials: the confidence-interval gates are statistically "
                      "meaningless at this size", RuntimeWarning, stacklevel=2)
    out = []
    for i in sorted(only or GATES):
        res = run_gate(i, sc, opt)
        if not res.passed and not res.blocking:
            warnings.warn(res.line(), RuntimeWarning, stacklevel=2)
        if echo:
            echo(res.line())
        out.append(res)
    return out


def literal_audit(sc: RsmaScenario, opt: ValidationOptions, power_dbm: float = 15.0,
                  bs_offset_db: float = 10.0) -> Dict:
    """Compare the literal and corrected second-hop readings at P_b != P_a.

    The simulation follows the literal SINR forms; the closed form is shown
    under both readings so the divergence is visible.
    """
    base = sc.with_power_dbm(power_dbm)
    s = replace(base, p_b=dbm_to_watts(power_dbm + bs_offset_db))
    lit = replace(s, paper_literal_typos=True)
    fix = replace(s, paper_literal_typos=False)
    rows = []
    for k in _users(s):
        mc_lit = simulate_op(k, lit, opt.mc())
        mc_fix = simulate_op(k, fix, opt.mc())
        rows.append(dict(
            user=k,
            exact_literal=outage_probability(k, lit).value,
            exact_corrected=outage_probability(k, fix).value,
            mc_literal=mc_lit.value, mc_literal_se=mc_lit.std_error,
            mc_corrected=mc_fix.value, mc_corrected_se=mc_fix.std_error,
        ))
    return {"power_dbm": power_dbm, "p_b_dbm": power_dbm + bs_offset_db, "rows": rows}
