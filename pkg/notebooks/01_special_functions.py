"""
Special functions behind the outage formula
===========================================

The best-port CDF of a fluid antenna is a t-copula evaluated on the
diagonal, i.e. an equicorrelated multivariate-t CDF at a common point.
Here we check the one-dimensional quadrature against randomized QMC
and look at how the copula reacts to the correlation parameter.
"""
import numpy as np

from uavfas import specfun

# univariate pieces come straight from scipy.special
print("P(T_25 <= 2.0595) =", specfun.student_t_cdf(2.0595385527532977, 25))
print("t_25 quantile at 0.975 =", specfun.student_t_quantile(0.975, 25))

# the equicorrelated CDF: one-factor quadrature vs. QMC on the full matrix
spec = specfun.EquicorrMvt(dim=4, dof=25.0, rho=0.5)
for x in (-1.0, 0.0, 1.2, 3.0):
    det = specfun.equicorr_mvt_cdf_common(x, spec)
    q = specfun.mvt_cdf_qmc(np.full(4, x), spec.matrix(), 25.0, target_se=1e-5, seed=1)
    print(f"x={x:5.1f}  quadrature {det:.8f}  QMC {q.value:.8f} +- {q.std_error:.1e}")

# more correlation -> the maximum of the ports behaves more like one port
u = 0.1
x = specfun.student_t_quantile(u, 25.0)
for rho in (0.0, 0.25, 0.5, 0.75, 0.99):
    c = specfun.equicorr_mvt_cdf_common(x, specfun.EquicorrMvt(4, 25.0, rho)) if rho > 0 else \
        specfun.mvt_cdf_qmc(np.full(4, x), np.eye(4), 25.0, target_se=1e-6).value
    print(f"rho={rho:4.2f}  C(u,u,u,u) = {c:.3e}   (u^4 = {u**4:.1e}, u = {u})")
