import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavfas.errors import DomainError, InvalidCorrelationError, NonPSDError, DimensionMismatchError
from uavfas.specfun import (
    EquicorrMvt,
    equicorr_mvn_cdf_common,
    equicorr_mvt_cdf_common,
    ln_gamma,
    mvt_cdf_qmc,
    reg_lower_inc_gamma,
    student_t_cdf,
    student_t_quantile,
)

# mpmath (30 digits) nested adaptive quadrature over the chi and common-normal
# variables for x=1.2, dim=4, dof=25, rho=0.5; about a minute to recompute.
MVT_REFERENCE = 0.70171852969045231647


# -- gamma family ------------------------------------------------------------------

@pytest.mark.parametrize(
    "a, expected",
    [(1.0, 0.0), (4.0, math.log(6.0)), (0.5, 0.5723649429247000870717)],
)
def test_ln_gamma_known_values(a, expected):
    assert ln_gamma(a) == pytest.approx(expected, abs=1e-14)


def test_ln_gamma_relative_accuracy_against_mpmath():
    for a in np.geomspace(1e-3, 1e3, 41):
        ref = float(mp.loggamma(mp.mpf(a)))
        assert abs(ln_gamma(a) - ref) <= 1e-12 * max(1.0, abs(ref))


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_ln_gamma_domain(bad):
    with pytest.raises(DomainError):
        ln_gamma(bad)


def test_reg_lower_inc_gamma_examples():
    assert reg_lower_inc_gamma(2, 0.0) == 0.0
    assert reg_lower_inc_gamma(1, math.log(2)) == pytest.approx(0.5, abs=1e-15)
    # root of 1 - e^-x (1 + x) = 0.9 found with mpmath.findroot
    assert reg_lower_inc_gamma(2, 3.88972016986742905790) == pytest.approx(0.9, abs=1e-12)


@pytest.mark.parametrize("a,x", [(0.0, 1.0), (-2.0, 1.0), (2.0, -0.1)])
def test_reg_lower_inc_gamma_domain(a, x):
    with pytest.raises(DomainError):
        reg_lower_inc_gamma(a, x)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 6])
def test_reg_lower_inc_gamma_matches_erlang(m):
    x = np.linspace(0.0, 40.0, 401)
    erlang = 1.0 - np.exp(-x) * sum(x**j / math.factorial(j) for j in range(m))
    assert np.max(np.abs(reg_lower_inc_gamma(m, x) - erlang)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.5, 10.0), xs=st.lists(st.floats(0.0, 60.0), min_size=2, max_size=20))
def test_reg_lower_inc_gamma_monotone_cdf(a, xs):
    xs = np.sort(np.asarray(xs))
    vals = reg_lower_inc_gamma(a, xs)
    assert np.all(np.diff(vals) >= 0)
    assert reg_lower_inc_gamma(a, 0.0) == 0.0
    assert reg_lower_inc_gamma(a, 1e4) == pytest.approx(1.0, abs=1e-15)


# -- Student t ---------------------------------------------------------------------

def test_student_t_cdf_examples():
    assert student_t_cdf(0.0, 25) == 0.5
    assert student_t_cdf(math.inf, 25) == 1.0
    assert student_t_cdf(1.0, 1) == pytest.approx(0.75, abs=1e-15)


def test_student_t_cdf_symmetry_and_monotonicity():
    x = np.linspace(-30, 30, 601)
    for dof in (1, 2, 25, 200):
        c = student_t_cdf(x, dof)
        assert np.all(np.diff(c) >= 0)
        assert np.all(np.diff(c[x <= 2.0]) > 0)  # upper values round to 1.0 in double
        assert np.max(np.abs(c + student_t_cdf(-x, dof) - 1.0)) < 1e-15


def test_student_t_cdf_against_mpmath():
    mp.mp.dps = 30
    for dof in (1, 2.5, 25):
        for x in (-7.0, -1.3, 0.4, 2.0, 9.0):
            ref = mp.mpf(1) / 2 + x * mp.gamma((dof + 1) / mp.mpf(2)) * mp.hyp2f1(
                0.5, (dof + 1) / 2.0, 1.5, -x * x / dof
            ) / (mp.sqrt(mp.pi * dof) * mp.gamma(dof / mp.mpf(2)))
            assert abs(student_t_cdf(x, dof) - float(ref)) <= 1e-12


def test_student_t_cdf_domain():
    with pytest.raises(DomainError):
        student_t_cdf(0.3, 0.0)


def test_student_t_quantile_examples():
    assert student_t_quantile(0.5, 25) == pytest.approx(0.0, abs=1e-15)
    assert student_t_quantile(0.75, 1) == pytest.approx(1.0, abs=1e-9)
    # mpmath bisection of the exact CDF
    assert student_t_quantile(0.975, 25) == pytest.approx(2.05953855275329774889, abs=1e-10)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.5])
def test_student_t_quantile_domain(p):
    with pytest.raises(DomainError):
        student_t_quantile(p, 25)


def test_student_t_quantile_infinite_on_request():
    assert student_t_quantile(0.0, 25, allow_infinite=True) == -math.inf
    assert student_t_quantile(1.0, 25, allow_infinite=True) == math.inf


@pytest.mark.parametrize("dof", [1, 2, 25, 200])
def test_quantile_inverts_cdf_on_probability_scale(dof):
    p = np.concatenate([np.geomspace(1e-12, 0.5, 200), 1 - np.geomspace(1e-10, 0.5, 200)])
    q = student_t_quantile(p, dof)
    assert np.max(np.abs(student_t_cdf(q, dof) - p)) <= 1e-10
    dyadic = np.arange(1, 4096) / 4096.0  # 1 - p is exact for these
    qd = student_t_quantile(dyadic, dof)
    assert np.max(np.abs(qd + student_t_quantile(1 - dyadic, dof))) <= 1e-9 * np.max(np.abs(qd))


@pytest.mark.parametrize("dof", [1, 2, 25, 200])
def test_quantile_of_cdf_is_identity(dof):
    """x -> cdf -> quantile returns x wherever float64 keeps the information.

    For x > 0 the CDF is 1 - tail and rounding to double destroys the tail
    once the density falls below ~1e-7 (dof=200, x near 8). There the
    check compares against the exact inverse of the rounded probability.
    """
    x = np.linspace(-8, 8, 321)
    p = student_t_cdf(x, dof)
    q = student_t_quantile(np.clip(p, 1e-300, np.nextafter(1, 0)), dof)
    dens = np.exp(
        math.lgamma((dof + 1) / 2) - math.lgamma(dof / 2) - 0.5 * math.log(dof * math.pi)
        - (dof + 1) / 2 * np.log1p(x * x / dof)
    )
    well_posed = (x <= 0) | (dens * 1e-9 >= 2.3e-16)
    assert np.max(np.abs(q[well_posed] - x[well_posed])) <= 1e-9
    mp.mp.dps = 40
    for xi, pi, qi in zip(x[~well_posed], p[~well_posed], q[~well_posed]):
        tail = mp.mpf(1) - mp.mpf(float(pi))
        exact = float(mp.findroot(
            lambda t: mp.betainc(dof / 2.0, 0.5, 0, dof / (dof + t * t), regularized=True) / 2 - tail,
            xi,
        ))
        assert abs(qi - exact) <= 1e-9 * abs(exact)


# -- equicorrelated multivariate t ---------------------------------------------------

def test_equicorr_spec_validation():
    EquicorrMvt(1, 25, -5.0)  # any rho in one dimension
    with pytest.raises(InvalidCorrelationError):
        EquicorrMvt(4, 25, -1.0 / 3.0)
    with pytest.raises(InvalidCorrelationError):
        EquicorrMvt(3, 25, 1.01)
    with pytest.raises(DomainError):
        EquicorrMvt(0, 25, 0.5)
    with pytest.raises(DomainError):
        EquicorrMvt(2, 0.0, 0.5)


def test_equicorr_degenerate_cases():
    marg = student_t_cdf(0.7, 25)
    assert equicorr_mvt_cdf_common(0.7, EquicorrMvt(1, 25, 0.3)) == marg
    assert equicorr_mvt_cdf_common(0.7, EquicorrMvt(4, 25, 1.0)) == marg
    assert equicorr_mvt_cdf_common(math.inf, EquicorrMvt(4, 25, 0.3)) == 1.0
    assert equicorr_mvt_cdf_common(-math.inf, EquicorrMvt(4, 25, 0.3)) == 0.0


def test_equicorr_matches_high_precision_reference():
    assert equicorr_mvt_cdf_common(1.2, EquicorrMvt(4, 25, 0.5)) == pytest.approx(MVT_REFERENCE, abs=1e-8)


def test_equicorr_matches_plain_monte_carlo():
    rng = np.random.default_rng(7)
    n, dim, dof, rho, x = 10**7, 4, 25.0, 0.5, 1.2
    hits = 0
    for _ in range(10):
        m = n // 10
        z = math.sqrt(rho) * rng.standard_normal((m, 1)) + math.sqrt(1 - rho) * rng.standard_normal((m, dim))
        t = z * np.sqrt(dof / rng.chisquare(dof, (m, 1)))
        hits += int(np.count_nonzero(np.all(t <= x, axis=1)))
    p = hits / n
    se = math.sqrt(p * (1 - p) / n)
    assert abs(equicorr_mvt_cdf_common(x, EquicorrMvt(dim, dof, rho)) - p) <= 3 * se


def test_equicorr_negative_rho_routes_to_qmc():
    spec = EquicorrMvt(4, 25, -0.2)
    val = equicorr_mvt_cdf_common(0.8, spec)
    ref = mvt_cdf_qmc(np.full(4, 0.8), spec.matrix(), 25, target_se=1e-5, seed=99)
    assert abs(val - ref.value) <= 1e-4


def test_equicorr_monotone_in_x_dim_and_rho():
    xs = np.linspace(-3, 3, 13)
    for rho in (0.0, 0.3, 0.9):
        vals = [equicorr_mvt_cdf_common(x, EquicorrMvt(4, 25, rho)) for x in xs]
        assert np.all(np.diff(vals) >= 0)
    for x in (-1.0, 0.5, 2.0):
        by_dim = [equicorr_mvt_cdf_common(x, EquicorrMvt(d, 25, 0.4)) for d in (1, 2, 4, 8, 16)]
        assert np.all(np.diff(by_dim) <= 1e-15)
        by_rho = [equicorr_mvt_cdf_common(x, EquicorrMvt(4, 10, r)) for r in (0.0, 0.2, 0.5, 0.8, 0.99, 1.0)]
        assert np.all(np.diff(by_rho) >= -1e-12)


def test_equicorr_rho_ordering_agrees_with_qmc():
    prev = None
    for r in (0.1, 0.5, 0.9):
        q = mvt_cdf_qmc(np.full(3, 0.3), EquicorrMvt(3, 5, r).matrix(), 5, target_se=2e-5, seed=3)
        if prev is not None:
            assert q.value > prev
        prev = q.value


def test_large_dof_converges_to_normal():
    for rho in (0.0, 0.25, 0.7):
        for x in (-1.0, 0.3, 1.5):
            t_val = equicorr_mvt_cdf_common(x, EquicorrMvt(4, 1e6, rho))
            n_val = equicorr_mvn_cdf_common(x, 4, rho)
            assert abs(t_val - n_val) <= 1e-6


def test_normal_orthant_independent_oracle():
    # equicorrelated rho = 1/2 normal orthant at 0 in 3 dimensions is 1/4
    assert equicorr_mvn_cdf_common(0.0, 3, 0.5) == pytest.approx(0.25, abs=1e-10)
    # and 1/5 in 4 dimensions
    assert equicorr_mvn_cdf_common(0.0, 4, 0.5) == pytest.approx(0.2, abs=1e-10)


# -- QMC evaluator ----------------------------------------------------------------

def test_qmc_one_dimension():
    est = mvt_cdf_qmc([0.0], [[1.0]], 25, target_se=1e-4, seed=1)
    assert abs(est.value - 0.5) <= max(3 * est.std_error, 1e-12)
    assert est.samples_used > 0


def test_qmc_equicorrelated_cross_check():
    spec = EquicorrMvt(4, 25, 0.5)
    est = mvt_cdf_qmc(np.full(4, 1.2), spec.matrix(), 25, target_se=1e-4, seed=5)
    assert est.std_error <= 1e-4
    assert abs(est.value - equicorr_mvt_cdf_common(1.2, spec)) <= 3 * est.std_error


def test_qmc_identity_correlation_against_quadrature():
    """Uncorrelated t components are still dependent through the shared scale,
    so the reference is the one-factor quadrature at rho = 0, not a product."""
    est = mvt_cdf_qmc([0.7, 0.7], np.eye(2), 25, target_se=1e-5, seed=11)
    ref = equicorr_mvt_cdf_common(0.7, EquicorrMvt(2, 25, 0.0))
    assert abs(est.value - ref) <= 3 * est.std_error + 1e-9
    assert ref > student_t_cdf(0.7, 25) ** 2


def test_qmc_deterministic_for_seed():
    corr = [[1.0, 0.3, 0.1], [0.3, 1.0, -0.2], [0.1, -0.2, 1.0]]
    a = mvt_cdf_qmc([0.5, 1.0, -0.2], corr, 4, target_se=1e-3, seed=42)
    b = mvt_cdf_qmc([0.5, 1.0, -0.2], corr, 4, target_se=1e-3, seed=42)
    assert a == b


def test_qmc_handles_singular_matrix():
    est = mvt_cdf_qmc([0.4, 0.4], np.ones((2, 2)), 25, target_se=1e-5, seed=2)
    assert abs(est.value - student_t_cdf(0.4, 25)) <= 3 * est.std_error + 1e-9


def test_qmc_errors():
    with pytest.raises(NonPSDError):
        mvt_cdf_qmc([0, 0, 0], [[1, 0.9, -0.9], [0.9, 1, 0.9], [-0.9, 0.9, 1]], 5)
    with pytest.raises(DimensionMismatchError):
        mvt_cdf_qmc([0, 0], np.eye(3), 5)
    with pytest.raises(NonPSDError):
        mvt_cdf_qmc([0, 0], [[1, 0.2], [0.3, 1]], 5)
