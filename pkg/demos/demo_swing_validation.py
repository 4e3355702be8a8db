"""Cross-validate the swing reduction against the full model.

Eliminating the stator currents turns the fourth-order model into a
forced-pendulum-like equation for the shifted power angle, with the
stator convolution realised exactly by a two-dimensional memory state.
The two formulations are mathematically equivalent, so integrating both
from matched initial data and comparing the power angle measures pure
integration error -- it should sit many orders below any physical scale.
"""

import math

import numpy as np

import swingcert as sc
from swingcert.swing import gamma_along

spec = sc.NominalSpec(P_n=500e3, V=6000 * math.sqrt(3), omega_g=100 * math.pi,
                      d_p=3.0, H_seconds=2.0, L_drop_pct=4.0, R_drop_pct=0.5)
params = sc.apply_virtual_inductor(sc.size_parameters(spec), 30.0)
dc = sc.derive_constants(params)

rng = np.random.default_rng(42)
box = sc.simulator.default_basin_box(params)

print("max |delta_full - delta_swing| over 10 s, matched initial data:")
for trial in range(5):
    initial = sc.SgState(*[rng.uniform(lo, hi) for lo, hi in box])
    deviation = sc.cross_validate(params, initial, t_end=10.0)
    print(f"  trial {trial}: deviation = {deviation:.3e} rad")

print("\nForcing seen by the pendulum form along one trajectory:")
initial = sc.SgState(*[rng.uniform(lo, hi) for lo, hi in box])
config = sc.IntegratorConfig(rel_tol=1e-9, abs_tol=1e-11, t_end=10.0,
                             n_samples=2001)
traj = sc.simulate_ese(params, initial, config)
gamma, P = gamma_along(traj.times, traj.states, params,
                       (initial.i_d, initial.i_q, initial.delta))
for t_lo, t_hi in ((0.0, 0.5), (0.5, 2.0), (2.0, 5.0), (5.0, 10.0)):
    window = (traj.times >= t_lo) & (traj.times < t_hi)
    print(f"  t in [{t_lo:4.1f}, {t_hi:4.1f}): max |gamma| = "
          f"{np.max(np.abs(gamma[window])):.2e}, "
          f"P range = [{P[window].min():+.4f}, {P[window].max():+.4f}]")
print(f"  a-priori bound Gamma = {dc.Gamma:.3f}; steady memory term "
      f"P_inf = {dc.P_inf:.4f}")
print("\nThe forcing decays to zero: the trajectory settles into synchronous")
print("rotation, which is exactly what the certificate argument exploits.")
