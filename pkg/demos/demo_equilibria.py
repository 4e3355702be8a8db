"""Locate and classify equilibria across parameter variants.

Synchronous operation corresponds to equilibria of the rotating-frame
model.  Depending on the equilibrium cosine Lambda the model has zero,
one or two of them (modulo 2*pi); the 500 kW machine has a stable and an
unstable branch, while a weak-droop variant keeps both branches but
loses stability of each -- something a constantly forced pendulum can
never do.
"""

import math

import swingcert as sc

spec = sc.NominalSpec(P_n=500e3, V=6000 * math.sqrt(3), omega_g=100 * math.pi,
                      d_p=3.0, H_seconds=2.0, L_drop_pct=4.0, R_drop_pct=0.5)
base = sc.size_parameters(spec)
T_a = spec.P_n / spec.omega_g

variants = {
    "n=1 (as sized)": base,
    "n=30 virtual inductor": sc.apply_virtual_inductor(base, 30.0),
    "R_s doubled to 2.16 ohm": base.replace(R_s=2.16),
    "D_p=15 weak droop": base.replace(D_p=15.0, T_m=T_a + 15.0 * spec.omega_g),
}

for label, params in variants.items():
    dc = sc.derive_constants(params)
    points = sc.solve_equilibria(params)
    print(f"{label}: Lambda = {dc.Lambda:+.4f}, {len(points)} equilibria")
    for pt in points:
        slowest = min(abs(z.real) for z in pt.eigenvalues)
        print(f"  branch {pt.branch}: delta_e = {pt.state.delta:+8.4f} rad, "
              f"{pt.classification.value:14s} slowest |Re eig| = {slowest:.3f}")
    print()

print("With the mechanical torque held instead of re-derived, the weak-droop")
print("variant has no equilibria at all (|Lambda| > 1):")
frozen = base.replace(D_p=15.0)
print(f"  Lambda = {sc.derive_constants(frozen).Lambda:+.4f} -> "
      f"{len(sc.solve_equilibria(frozen))} equilibria")
