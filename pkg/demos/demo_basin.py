"""Monte-Carlo sampling of trajectory outcomes.

Initial states are drawn uniformly from a physically scaled box (currents
within three grid-driven current scales, rotor speed up to twice grid
frequency, angle over one turn) and each trajectory is classified as
converged to an equilibrium, periodic, or undecided.  The certified
n = 30 machine sends every sample to the stable equilibrium; the
doubled-resistor variant splits between the equilibrium and the
pole-slipping orbit.
"""

import math

import swingcert as sc

spec = sc.NominalSpec(P_n=500e3, V=6000 * math.sqrt(3), omega_g=100 * math.pi,
                      d_p=3.0, H_seconds=2.0, L_drop_pct=4.0, R_drop_pct=0.5)
base = sc.size_parameters(spec)

cases = {
    "n=30 (certified)": sc.apply_virtual_inductor(base, 30.0),
    "R_s = 2.16 ohm (not aGAS)": base.replace(R_s=2.16),
}

for label, params in cases.items():
    stats = sc.basin_sample(params, n=60, seed=7)
    print(f"{label}: {stats.n} samples, seed {stats.seed}")
    print(f"  converged to stable equilibrium: {stats.converged_stable}")
    print(f"  converged to unstable point:     {stats.converged_unstable}")
    print(f"  periodic (pole slipping):        {stats.periodic}")
    print(f"  undecided:                       {stats.undecided}")
    for kind, state in stats.exemplars.items():
        i_d, i_q, omega, delta = state
        print(f"  e.g. {kind}: i_d={i_d:8.1f} A, i_q={i_q:8.1f} A, "
              f"omega={omega:6.1f} rad/s, delta={delta:+.2f} rad")
    print()
