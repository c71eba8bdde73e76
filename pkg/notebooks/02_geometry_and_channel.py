"""
Air-to-ground geometry and the fluid-antenna channel
=====================================================

Path loss mixes LoS and NLoS by the elevation-dependent LoS probability.
The fluid antenna at each user has N ports whose fields are correlated
through J0(2 pi d / lambda); the copula collapses that matrix to one
scalar Theta.
"""
import numpy as np

from uavfas import channel, geometry
from uavfas.channel import FadingParams, FasConfig
from uavfas.geometry import EnvParams, Position3

env = EnvParams()
uav = Position3(10, 10, 100)
for name, p in [("BS", Position3(0, 0, 0)), ("user 1", Position3(200, 200, 0)), ("user 2", Position3(180, 180, 0))]:
    th = geometry.elevation_angle(uav, p)
    print(f"{name:7s} elevation {th:6.2f} deg  P_LoS {geometry.los_probability(th, env):.3f}  "
          f"distance {geometry.link_distance(uav, p):7.2f} m  L {geometry.path_loss(uav, p, env):.3e}")

# port correlation of a 2x2 grid over one square wavelength
cfg = FasConfig()
print(np.round(channel.correlation_matrix(cfg), 4))

# the scalar copula parameter under both reduction rules
for w in (0.25, 1.0, 2.0, 4.0):
    side = np.sqrt(w)
    a = FasConfig(2, 2, side, side)
    b = FasConfig(2, 2, side, side, theta_rule="mean")
    print(f"W={w:4.2f}  Theta(mean_square)={channel.effective_theta(a):+.4f}  Theta(mean)={channel.effective_theta(b):+.4f}")

# best-port CDF vs a single port (m = 2)
f = FadingParams(2.0, 1.0)
for g in (0.05, 0.2, 0.5, 1.0):
    print(f"g={g:4.2f}  single port {channel.gamma_gain_cdf(g, f):.4e}  best of 4 {channel.fas_gain_cdf(g, f, cfg):.4e}")
