"""
Monte Carlo oracle and the copula approximation
===============================================

Two samplers: the t-copula (the model behind the closed form) and a
physical one that sums m correlated complex-Gaussian fields with the
Bessel port covariance. The first checks the arithmetic, the second
checks the model.
"""
from dataclasses import replace

from uavfas import McConfig, RsmaScenario, outage_probability, simulate_op

sc = RsmaScenario.default()
mc = McConfig(trials=200_000, seed=7)
for p in (10.0, 15.0, 20.0):
    s = sc.with_power_dbm(p)
    for k in (1, 2):
        ex = outage_probability(k, s).value
        cop = simulate_op(k, s, mc)
        phy = simulate_op(k, s, replace(mc, sampler="physical"))
        print(f"P={p:4.0f} user {k}: exact {ex:.4e}  copula MC {cop.value:.4e} +- {cop.std_error:.1e}  "
              f"physical MC {phy.value:.4e} +- {phy.std_error:.1e}")

# results do not depend on how chunks are spread over threads
s = sc.with_power_dbm(15.0)
print([simulate_op(1, s, replace(mc, workers=w)).outages for w in (1, 4)])
