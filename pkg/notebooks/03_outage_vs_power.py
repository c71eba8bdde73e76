"""
Outage probability versus transmit power
========================================

Exact and high-SNR outage for both users on the reference deployment,
then the effect of the port count, aperture and Nakagami m. A chart is
written to outage_vs_power.svg.
"""
import numpy as np

from uavfas import RsmaScenario, outage_probability, outage_probability_asymptotic
from uavfas.channel import FadingParams
from uavfas.svgplot import line_chart

sc = RsmaScenario.default()
powers = np.arange(0, 41, 5.0)
series = {}
for k in (1, 2):
    ex = [outage_probability(k, sc.with_power_dbm(p)).value for p in powers]
    asy = [outage_probability_asymptotic(k, sc.with_power_dbm(p)).value for p in powers]
    series[f"user {k} exact"] = list(zip(powers, ex))
    series[f"user {k} asymptotic"] = list(zip(powers, asy))
    for p, e, a in zip(powers, ex, asy):
        print(f"user {k}  P={p:4.0f} dBm  exact {e:.3e}  asymptotic {a:.3e}  ratio {a / e:.3f}")

# the asymptote only becomes tight well below OP = 1e-3
with open("outage_vs_power.svg", "w") as fh:
    fh.write(line_chart(series, "transmit power P (dBm)",
                        styles={k: ("6,4" if "asym" in k else "") for k in series}))

# more ports and larger apertures help; so does milder fading
s10 = sc.with_power_dbm(10.0)
for label, s in [("N=1", s10.with_fas(n1=1, n2=1)), ("N=4, W=0.25", s10.with_fas(w1=0.5, w2=0.5)),
                 ("N=4, W=1", s10), ("N=4, W=2", s10.with_fas(w1=2**0.5, w2=2**0.5)),
                 ("N=9, W=1", s10.with_fas(n1=3, n2=3))]:
    print(f"10 dBm {label:12s} OP user 1 = {outage_probability(1, s).value:.4f}")

s20 = sc.with_power_dbm(20.0)
for m in (1, 2, 4):
    s = s20.with_users(fading=FadingParams(m, 1.0))
    print(f"20 dBm m={m}  OP user 1 {outage_probability(1, s).value:.3e}  user 2 {outage_probability(2, s).value:.3e}")
