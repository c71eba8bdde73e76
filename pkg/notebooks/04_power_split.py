"""
Common-stream power share
=========================

Sweeping alpha_c at a fixed common-rate target: small alpha_c makes the
common stream undecodable (the infeasible region alpha_c <= g / (1 + g)),
large alpha_c starves the private streams. The best share sits inside.
"""
import numpy as np

from uavfas import RsmaScenario
from uavfas.validation import alpha_sweep

sc = RsmaScenario.default().with_power_dbm(30.0)
grid = np.round(np.arange(0.05, 1.0, 0.05), 2)
for gc in (0.3, 0.6):
    rows = alpha_sweep(sc, gc, grid)
    print(f"gamma_c = {gc}: infeasible for alpha_c <= {gc / (1 + gc):.4f}")
    for a, v in rows:
        print(f"   alpha_c={a:4.2f}  " + ("infeasible" if v is None else f"OP={v:.3e}"))
