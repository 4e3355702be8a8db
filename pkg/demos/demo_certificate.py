"""Evaluate the stability certificate for the 500 kW machine.

For each assumed forcing bound d in (0, Gamma] the certificate computes
nscr(d), the forcing level the trajectory can actually sustain, from
closed-form envelope integrals of the stator memory term, plus a rotor
rate band whose applicability requires omega_max^d <= 2 omega_min^d.
If nscr(d) < d everywhere (and all equilibria are hyperbolic), almost
every initial state converges to synchronous rotation.

The script writes the per-d table as CSV (columns d, nscr, omega_min_d,
omega_max_d, band_ok) and, when matplotlib is importable, saves the two
standard diagnostic plots.
"""

import math

import numpy as np

import swingcert as sc

spec = sc.NominalSpec(P_n=500e3, V=6000 * math.sqrt(3), omega_g=100 * math.pi,
                      d_p=3.0, H_seconds=2.0, L_drop_pct=4.0, R_drop_pct=0.5)
params = sc.size_parameters(spec)

for n in (1.0, 30.0):
    effective = sc.apply_virtual_inductor(params, n) if n > 1 else params
    report = sc.check_certificate(effective)
    print(f"n = {n:g}: {report.verdict}")
    print(f"  worst margin d - nscr(d) = {report.margin:.3e} at d = {report.worst_d:.3e}")
    print(f"  relative margin          = {report.rel_margin:.3f}")
    print(f"  rate band applicable     = {bool(np.all(report.band_ok))}")
    print(f"  equilibria               = {report.equilibrium_classifications}")
    csv_path = f"certificate_n{int(n)}.csv"
    with open(csv_path, "w") as fh:
        fh.write(sc.certificate_csv(report))
    print(f"  wrote {csv_path}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not available; skipping plots")
else:
    report = sc.check_certificate(sc.apply_virtual_inductor(params, 30.0))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    ax1.loglog(report.d_grid, report.d_grid, "k--", label="identity")
    ax1.loglog(report.d_grid, report.nscr_values, label="nscr(d)")
    ax1.set_xlabel("d")
    ax1.legend()
    ax1.set_title("certificate map vs identity (n = 30)")
    ax2.semilogx(report.d_grid, report.omega_max_d, label="omega_max^d")
    ax2.semilogx(report.d_grid, report.omega_min_d, label="omega_min^d")
    ax2.semilogx(report.d_grid, 2 * report.omega_min_d, ":", label="2 omega_min^d")
    ax2.set_xlabel("d")
    ax2.legend()
    ax2.set_title("rotor rate band")
    fig.tight_layout()
    fig.savefig("certificate_n30.png", dpi=130)
    print("wrote certificate_n30.png")
