"""Computable sufficient condition for almost global asymptotic stability.

For an assumed bound d on the pendulum forcing, the eventual angle rate of
the normalised swing equation is trapped in a band [omega_n, omega_p];
shifted by rho*omega_g this gives rotor-rate bounds omega_min_d <
omega_rho < omega_max_d.  When the band is tight enough
(omega_max_d <= 2 omega_min_d), one-sided sinusoid envelopes g and h of
the rotating phase give closed-form upper/lower bounds P_u^d, P_l^d on
the stator memory term P(s), and

    nscr(d) = V_r * max(P_u^d - P_inf, P_inf - P_l^d)

bounds the forcing the trajectory actually generates.  If nscr(d) < d for
every d in (0, Gamma] (and the band condition holds there), the assumed
bound contracts to zero: every trajectory converges to an equilibrium,
and with all equilibria hyperbolic the model is almost globally
asymptotically stable.

A finite grid cannot literally check "for all d"; ``check_certificate``
evaluates a dense log-spaced grid including d = Gamma, reports the worst
margin, and refuses to certify when the relative margin is below a
disclosed threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DerivedConstants, SgParameters, derive_constants
from .equilibria import Stability, solve_equilibria

_HALF_PI = 0.5 * math.pi
_TWO_PI = 2.0 * math.pi

# Slack for floating-point comparisons on interval endpoints.
_EDGE_EPS = 1e-9

DEFAULT_GRID_POINTS = 2000
DEFAULT_GRID_FLOOR = 1e-6          # grid starts at Gamma * this
DEFAULT_REL_MARGIN_THRESHOLD = 1e-3

VERDICT_CERTIFIED = "certified-agas"
VERDICT_NOT_CERTIFIED = "not-certified"


def rest_angles(beta: float, d: float):
    """Envelope rest angles (psi1, psi2) with sin(psi1) = beta + d and
    sin(psi2) = beta - d, both in (-pi/2, pi/2).

    Defined iff |beta| + d < 1; returns None otherwise.
    """
    if abs(beta) + d >= 1.0:
        return None
    return math.asin(beta + d), math.asin(beta - d)


@dataclass(frozen=True)
class VelocityBand:
    """Eventual bounds on the normalised rotor rate for a forcing bound d.

    When the rest angles exist and the damping clears the capture
    threshold (alpha > 2 sin(|psi_i|/2)), the refined envelope angles
    phi1, phi2 apply; otherwise the fallback S_n = -1, S_p = 1 is used and
    psi/phi fields are None.  Always omega_n < omega_p and hence
    omega_min_d < omega_max_d.
    """

    d: float
    psi1: float | None
    psi2: float | None
    phi1: float | None
    phi2: float | None
    S_n: float
    S_p: float
    omega_n: float
    omega_p: float
    omega_min_d: float
    omega_max_d: float
    refined: bool

    @property
    def band_ok(self) -> bool:
        """Envelope applicability: positive band with omega_max <= 2 omega_min."""
        return self.omega_min_d > 0.0 and self.omega_max_d <= 2.0 * self.omega_min_d


def velocity_band(dc: DerivedConstants, d: float) -> VelocityBand:
    """Velocity trap for forcing bound d (see ``VelocityBand``)."""
    if not d > 0.0:
        raise ValueError(f"d must be > 0, got {d!r}")
    alpha, beta = dc.alpha, dc.beta
    pair = rest_angles(beta, d)
    psi1 = psi2 = phi1 = phi2 = None
    refined = False
    if pair is not None:
        psi1, psi2 = pair
        if alpha > 2.0 * math.sin(abs(psi1) / 2.0) and alpha > 2.0 * math.sin(
            abs(psi2) / 2.0
        ):
            refined = True
    if refined:
        slack = 4.0 * d / alpha**2
        phi1 = min(_HALF_PI, psi1 + slack)
        phi2 = max(-_HALF_PI, psi2 - slack)
        S_n = -math.sin(phi1)
        S_p = -math.sin(phi2)
    else:
        S_n, S_p = -1.0, 1.0
    omega_n = (S_n + beta - d) / alpha
    omega_p = (S_p + beta + d) / alpha
    shift = dc.rho * dc.omega_g
    return VelocityBand(
        d=d, psi1=psi1, psi2=psi2, phi1=phi1, phi2=phi2, S_n=S_n, S_p=S_p,
        omega_n=omega_n, omega_p=omega_p,
        omega_min_d=omega_n + shift, omega_max_d=omega_p + shift,
        refined=refined,
    )


def _check_band(omega_min: float, omega_max: float):
    if not (0.0 < omega_min <= omega_max * (1.0 + _EDGE_EPS)):
        raise ValueError(f"need 0 < omega_min <= omega_max, got {omega_min}, {omega_max}")
    if omega_max > 2.0 * omega_min * (1.0 + _EDGE_EPS):
        raise ValueError(
            f"band condition omega_max <= 2 omega_min violated: {omega_max} > 2*{omega_min}"
        )


def envelope_g(tau, omega_min: float, omega_max: float):
    """Upper envelope of the rotating phase sine over one fast period.

    Piecewise on [0, 2*pi/omega_max]: the fast sine up to its crest, the
    plateau 1 until the slow sine crests, then the slow sine down to the
    matching point 3*pi/(omega_min+omega_max), then the fast sine again.
    Requires omega_min <= omega_max <= 2 omega_min.
    """
    _check_band(omega_min, omega_max)
    t = np.asarray(tau, dtype=float)
    hi = _TWO_PI / omega_max
    if np.any(t < -_EDGE_EPS * hi) or np.any(t > hi * (1.0 + _EDGE_EPS)):
        raise ValueError(f"tau outside [0, {hi}]")
    b1 = math.pi / (2.0 * omega_max)
    b2 = math.pi / (2.0 * omega_min)
    b3 = 3.0 * math.pi / (omega_min + omega_max)
    out = np.select(
        [t < b1, t < b2, t < b3],
        [np.sin(omega_max * t), np.ones_like(t), np.sin(omega_min * t)],
        default=np.sin(omega_max * t),
    )
    return float(out) if np.ndim(tau) == 0 else out


def envelope_h(tau, omega_min: float, omega_max: float):
    """Lower envelope of the rotating phase sine over one slow period.

    Piecewise on [0, 2*pi/omega_min]: the slow sine, the fast sine from
    pi/(omega_min+omega_max) down to its trough, the plateau -1, then the
    slow sine back to zero.  Requires omega_min <= omega_max <= 2 omega_min.
    """
    _check_band(omega_min, omega_max)
    t = np.asarray(tau, dtype=float)
    hi = _TWO_PI / omega_min
    if np.any(t < -_EDGE_EPS * hi) or np.any(t > hi * (1.0 + _EDGE_EPS)):
        raise ValueError(f"tau outside [0, {hi}]")
    c1 = math.pi / (omega_min + omega_max)
    c2 = 3.0 * math.pi / (2.0 * omega_max)
    c3 = 3.0 * math.pi / (2.0 * omega_min)
    out = np.select(
        [t < c1, t < c2, t < c3],
        [np.sin(omega_min * t), np.sin(omega_max * t), -np.ones_like(t)],
        default=np.sin(omega_min * t),
    )
    return float(out) if np.ndim(tau) == 0 else out


def exp_sin_moment(a: float, omega: float, tau0: float, tau1: float, phase: float = 0.0) -> float:
    """Closed form of Int_{tau0}^{tau1} e^{-a tau} sin(omega tau + phase) dtau.

    The antiderivative is -e^{-a tau} (a sin(omega tau + phase) +
    omega cos(omega tau + phase)) / (a^2 + omega^2).  With omega = 0 and
    phase = +-pi/2 this covers the constant pieces +-1.
    """
    if not a > 0.0:
        raise ValueError(f"a must be > 0, got {a!r}")
    den = a * a + omega * omega

    def anti(tau):
        arg = omega * tau + phase
        return -math.exp(-a * tau) * (a * math.sin(arg) + omega * math.cos(arg)) / den

    return anti(tau1) - anti(tau0)


def _integral_exp_envelope_g(a: float, omega_min: float, omega_max: float) -> float:
    """Int_0^{2 pi / omega_max} e^{-a tau} g(tau) dtau, piecewise closed form."""
    b1 = math.pi / (2.0 * omega_max)
    b2 = math.pi / (2.0 * omega_min)
    b3 = 3.0 * math.pi / (omega_min + omega_max)
    b4 = _TWO_PI / omega_max
    return (
        exp_sin_moment(a, omega_max, 0.0, b1)
        + exp_sin_moment(a, 0.0, b1, b2, phase=_HALF_PI)
        + exp_sin_moment(a, omega_min, b2, b3)
        + exp_sin_moment(a, omega_max, b3, b4)
    )


def _integral_exp_envelope_h(a: float, omega_min: float, omega_max: float) -> float:
    """Int_0^{2 pi / omega_min} e^{-a tau} h(tau) dtau, piecewise closed form."""
    c1 = math.pi / (omega_min + omega_max)
    c2 = 3.0 * math.pi / (2.0 * omega_max)
    c3 = 3.0 * math.pi / (2.0 * omega_min)
    c4 = _TWO_PI / omega_min
    return (
        exp_sin_moment(a, omega_min, 0.0, c1)
        + exp_sin_moment(a, omega_max, c1, c2)
        + exp_sin_moment(a, 0.0, c2, c3, phase=-_HALF_PI)
        + exp_sin_moment(a, omega_min, c3, c4)
    )


def p_bounds_for_band(p_rho: float, omega_min: float, omega_max: float) -> tuple:
    """(P_l, P_u) for an explicit admissible rate band in normalised time.

    P_u = p rho / (1 - e^{-p rho T_max}) * Int_0^{T_max} e^{-p rho tau} g;
    P_l likewise with h over [0, T_min], where the geometric-sum period T
    is T_max when the h-integral is negative, T_min otherwise.
    """
    _check_band(omega_min, omega_max)
    T_max = _TWO_PI / omega_max
    T_min = _TWO_PI / omega_min
    ig = _integral_exp_envelope_g(p_rho, omega_min, omega_max)
    ih = _integral_exp_envelope_h(p_rho, omega_min, omega_max)
    # -expm1(-x) = 1 - e^{-x}, stable when p rho T is small.
    P_u = p_rho * ig / -math.expm1(-p_rho * T_max)
    T = T_max if ih < 0.0 else T_min
    P_l = p_rho * ih / -math.expm1(-p_rho * T)
    return P_l, P_u


def p_bounds(dc: DerivedConstants, d: float) -> tuple:
    """(P_l^d, P_u^d): eventual bounds on the stator memory term P(s).

    Falls back to the trivial bounds (0, 1) when the rate band for this d
    is not applicable (omega_max_d > 2 omega_min_d, or omega_min_d <= 0).
    As d -> 0 the band collapses onto rho*omega_g and both bounds converge
    to P_inf.
    """
    band = velocity_band(dc, d)
    if not band.band_ok:
        return 0.0, 1.0
    return p_bounds_for_band(dc.p * dc.rho, band.omega_min_d, band.omega_max_d)


def nscr(dc: DerivedConstants, d: float) -> float:
    """Certificate map: the forcing bound a trajectory can sustain given d.

    nscr(d) = V_r * max(P_u^d - P_inf, P_inf - P_l^d) >= 0, defined on
    (0, Gamma].
    """
    if not 0.0 < d <= dc.Gamma * (1.0 + _EDGE_EPS):
        raise ValueError(f"d must lie in (0, Gamma={dc.Gamma}], got {d!r}")
    P_l, P_u = p_bounds(dc, d)
    return dc.V_r * max(P_u - dc.P_inf, dc.P_inf - P_l)


@dataclass
class CertificateReport:
    """Grid evaluation of the stability certificate.

    ``margin`` is min(d - nscr(d)) over the grid and ``rel_margin`` the
    minimum of (d - nscr(d))/d; the verdict requires every grid point to
    satisfy nscr(d) < d with the band applicable, all equilibria
    hyperbolic, and rel_margin at or above the disclosed threshold (the
    grid is dense but finite, so a vanishing relative margin cannot be
    distinguished from a failure between grid points).
    """

    d_grid: np.ndarray
    nscr_values: np.ndarray
    omega_min_d: np.ndarray
    omega_max_d: np.ndarray
    band_ok: np.ndarray
    margin: float
    rel_margin: float
    worst_d: float
    hyperbolicity_ok: bool
    equilibrium_classifications: tuple
    verdict: str
    notes: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict == VERDICT_CERTIFIED

    def to_dict(self, include_grid: bool = False) -> dict:
        out = {
            "verdict": self.verdict,
            "n_grid": int(len(self.d_grid)),
            "d_min": float(self.d_grid[0]),
            "d_max": float(self.d_grid[-1]),
            "margin": self.margin,
            "rel_margin": self.rel_margin,
            "worst_d": self.worst_d,
            "band_ok_all": bool(np.all(self.band_ok)),
            "hyperbolicity_ok": self.hyperbolicity_ok,
            "equilibrium_classifications": list(self.equilibrium_classifications),
            "notes": list(self.notes),
        }
        if include_grid:
            out["d_grid"] = self.d_grid.tolist()
            out["nscr"] = self.nscr_values.tolist()
            out["omega_min_d"] = self.omega_min_d.tolist()
            out["omega_max_d"] = self.omega_max_d.tolist()
            out["band_ok"] = [bool(b) for b in self.band_ok]
        return out


def certificate_grid(Gamma: float, n_points: int = DEFAULT_GRID_POINTS,
                     spacing: str = "log") -> np.ndarray:
    """d grid over (0, Gamma], always ending exactly at Gamma."""
    if n_points < 2:
        raise ValueError(f"need at least 2 grid points, got {n_points}")
    if spacing == "log":
        grid = np.geomspace(Gamma * DEFAULT_GRID_FLOOR, Gamma, n_points)
    elif spacing == "linear":
        grid = np.linspace(Gamma / n_points, Gamma, n_points)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    grid[-1] = Gamma
    return grid


def check_certificate(
    params: SgParameters,
    n_points: int = DEFAULT_GRID_POINTS,
    spacing: str = "log",
    rel_margin_threshold: float = DEFAULT_REL_MARGIN_THRESHOLD,
) -> CertificateReport:
    """Evaluate the certificate on a d grid and issue a verdict.

    Certified iff nscr(d) < d and the rate band applies at every grid
    point, all equilibria are hyperbolic, and the relative margin clears
    ``rel_margin_threshold``.
    """
    dc = derive_constants(params)
    grid = certificate_grid(dc.Gamma, n_points, spacing)

    values = np.empty_like(grid)
    w_min = np.empty_like(grid)
    w_max = np.empty_like(grid)
    ok = np.empty(len(grid), dtype=bool)
    for i, d in enumerate(grid):
        band = velocity_band(dc, float(d))
        w_min[i] = band.omega_min_d
        w_max[i] = band.omega_max_d
        ok[i] = band.band_ok
        if band.band_ok:
            P_l, P_u = p_bounds_for_band(dc.p * dc.rho, band.omega_min_d, band.omega_max_d)
        else:
            P_l, P_u = 0.0, 1.0
        values[i] = dc.V_r * max(P_u - dc.P_inf, dc.P_inf - P_l)

    margins = grid - values
    i_worst = int(np.argmin(margins / grid))
    margin = float(np.min(margins))
    rel_margin = float(np.min(margins / grid))

    points = solve_equilibria(params)
    classifications = tuple(pt.classification.value for pt in points)
    hyperbolic = bool(points) and all(
        pt.classification is not Stability.NON_HYPERBOLIC for pt in points
    )

    notes = []
    condition_holds = bool(np.all(values < grid) and np.all(ok))
    if condition_holds and hyperbolic and rel_margin < rel_margin_threshold:
        notes.append(
            f"grid-resolution: relative margin {rel_margin:.3e} below threshold "
            f"{rel_margin_threshold:.1e}; condition may fail between grid points"
        )
    if not hyperbolic:
        notes.append("equilibria missing or not all hyperbolic")

    certified = condition_holds and hyperbolic and rel_margin >= rel_margin_threshold
    return CertificateReport(
        d_grid=grid,
        nscr_values=values,
        omega_min_d=w_min,
        omega_max_d=w_max,
        band_ok=ok,
        margin=margin,
        rel_margin=rel_margin,
        worst_d=float(grid[i_worst]),
        hyperbolicity_ok=hyperbolic,
        equilibrium_classifications=classifications,
        verdict=VERDICT_CERTIFIED if certified else VERDICT_NOT_CERTIFIED,
        notes=notes,
    )


def certificate_csv(report: CertificateReport) -> str:
    """Per-d table as CSV text: d, nscr, omega_min_d, omega_max_d, band_ok.

    Floats carry 17 significant digits so downstream plots reproduce the
    certificate exactly.
    """
    lines = ["d,nscr,omega_min_d,omega_max_d,band_ok"]
    for d, v, lo, hi, ok in zip(
        report.d_grid, report.nscr_values, report.omega_min_d,
        report.omega_max_d, report.band_ok,
    ):
        lines.append(f"{d:.17g},{v:.17g},{lo:.17g},{hi:.17g},{int(ok)}")
    return "\n".join(lines) + "\n"
