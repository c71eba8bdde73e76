"""
RSMA against a two-user NOMA baseline
=====================================

NOMA here: the BS superposes the users with factors (0.75, 0.25), the
far user decodes its own stream, the near user runs SIC; both hops must
succeed. Each user's NOMA target carries the same rate as its RSMA
common + private targets. The comparison depends on these choices.
"""
from uavfas import RsmaScenario, noma_outage_mc, outage_probability

sc = RsmaScenario.default()
for p in (10.0, 15.0, 20.0, 25.0):
    s = sc.with_power_dbm(p)
    for k in (1, 2):
        r = outage_probability(k, s).value
        n = noma_outage_mc(k, s, trials=100_000, seed=1)
        print(f"P={p:4.0f} user {k}: RSMA {r:.3e}  NOMA {n.value:.3e} +- {n.std_error:.1e}")
