"""Time integration and trajectory classification.

Wraps an adaptive Runge-Kutta 4(5) integrator (scipy's embedded
Dormand-Prince pair) and a fixed-step classic RK4, produces sampled
trajectories, and classifies them as converged to an equilibrium
(modulo 2*pi, with the integer sheet recorded), periodic, or undecided.
Periodic orbits are detected on a Poincare section of the power angle.
All operations are deterministic given their inputs and seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core import (
    NumericalError,
    SgParameters,
    SgState,
    TWO_PI,
    derive_constants,
    full_rhs,
    wrap_angle,
)
from .equilibria import EquilibriumPoint, Stability, solve_equilibria
from .swing import ese_from_full, ese_rhs_fn

FULL_COLUMNS = ("i_d", "i_q", "omega", "delta")
ESE_COLUMNS = ("eta", "eta_dot", "w_re", "w_im")


class StiffnessError(NumericalError):
    """Adaptive step size underflowed; carries the last reached state."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    method is "rk45" (adaptive, embedded error control) or "rk4"
    (fixed step; the step is ``max_step`` when finite, else t_end/5000).
    ``n_samples`` output samples are placed uniformly on [0, t_end] unless
    explicit sample times are passed to ``integrate``.  ``seed`` only
    matters for sampling-based drivers built on top.
    """

    method: str = "rk45"
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf
    t_end: float = 10.0
    n_samples: int = 2001
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.t_end <= 0:
            raise ValueError("t_end must be > 0")
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")


# Verdicts ------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergedToEquilibrium:
    equilibrium: EquilibriumPoint
    sheet: int

    kind = "converged"


@dataclass(frozen=True)
class PeriodicOrbit:
    period: float
    mean_omega: float
    omega_below_grid: bool | None = None

    kind = "periodic"


@dataclass(frozen=True)
class Undecided:
    reason: str = ""

    kind = "undecided"


def verdict_to_dict(verdict) -> dict:
    out = {"kind": verdict.kind}
    if isinstance(verdict, ConvergedToEquilibrium):
        out["branch"] = verdict.equilibrium.branch
        out["delta_e"] = verdict.equilibrium.state.delta
        out["sheet"] = verdict.sheet
        out["classification"] = verdict.equilibrium.classification.value
    elif isinstance(verdict, PeriodicOrbit):
        out["period"] = verdict.period
        out["mean_omega"] = verdict.mean_omega
        out["omega_below_grid"] = verdict.omega_below_grid
    elif isinstance(verdict, Undecided) and verdict.reason:
        out["reason"] = verdict.reason
    return out


@dataclass
class Trajectory:
    """Sampled solution: strictly increasing times, one state per row."""

    times: np.ndarray
    states: np.ndarray
    verdict: object = field(default_factory=Undecided)
    columns: tuple = FULL_COLUMNS

    def column(self, name: str) -> np.ndarray:
        return self.states[:, self.columns.index(name)]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


# Integration ---------------------------------------------------------------

def _rk4_fixed(rhs, y0, t_eval, step):
    """Classic fourth-order steps between consecutive sample times.

    The initial state is taken at t = 0; a leading segment is integrated
    when the first sample time is positive.
    """
    y = np.asarray(y0, dtype=float).copy()
    out = np.empty((len(t_eval), len(y)))

    def advance(y, t0, t1):
        if t1 <= t0:
            return y
        n_sub = max(1, int(math.ceil((t1 - t0) / step - 1e-12)))
        h = (t1 - t0) / n_sub
        t = t0
        for _ in range(n_sub):
            k1 = np.asarray(rhs(t, y))
            k2 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k1))
            k3 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k2))
            k4 = np.asarray(rhs(t + h, y + h * k3))
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        return y

    out[0] = advance(y, 0.0, t_eval[0])
    for i in range(len(t_eval) - 1):
        out[i + 1] = advance(out[i], t_eval[i], t_eval[i + 1])
    return out


def integrate(rhs, initial, config: IntegratorConfig, t_eval=None,
              columns: tuple = FULL_COLUMNS) -> Trajectory:
    """Integrate ``dy/dt = rhs(t, y)`` from t=0 to config.t_end.

    Samples are taken at ``t_eval`` when given, else uniformly.  Raises
    StiffnessError when the adaptive integrator underflows its step size.
    """
    y0 = np.asarray(initial, dtype=float)
    if t_eval is None:
        t_eval = np.linspace(0.0, config.t_end, config.n_samples)
    else:
        t_eval = np.asarray(t_eval, dtype=float)

    if config.method == "rk4":
        step = config.max_step if math.isfinite(config.max_step) else config.t_end / 5000.0
        states = _rk4_fixed(rhs, y0, t_eval, step)
        return Trajectory(times=t_eval.copy(), states=states, columns=columns)

    sol = solve_ivp(
        rhs,
        (0.0, float(t_eval[-1])),
        y0,
        method="RK45",
        rtol=config.rel_tol,
        atol=config.abs_tol,
        max_step=config.max_step,
        t_eval=t_eval,
    )
    if sol.status == -1:
        raise StiffnessError(
            f"integration failed at t={sol.t[-1] if len(sol.t) else 0.0}: {sol.message}",
            t=float(sol.t[-1]) if len(sol.t) else 0.0,
            state=sol.y[:, -1].copy() if sol.y.size else y0,
        )
    return Trajectory(times=sol.t.copy(), states=sol.y.T.copy(), columns=columns)


def simulate_full(params: SgParameters, initial: SgState,
                  config: IntegratorConfig, t_eval=None) -> Trajectory:
    """Full-model trajectory from an initial state."""
    return integrate(full_rhs(params), initial.as_array(), config, t_eval,
                     columns=FULL_COLUMNS)


def simulate_ese(params: SgParameters, initial: SgState,
                 config: IntegratorConfig, t_eval=None) -> Trajectory:
    """ESE trajectory matched to a full-model initial state."""
    ese0, init_currents = ese_from_full(initial, params)
    rhs = ese_rhs_fn(params, init_currents)
    return integrate(rhs, ese0.as_array(), config, t_eval, columns=ESE_COLUMNS)


# Classification ------------------------------------------------------------

def _convergence_scales(equilibria) -> np.ndarray:
    cur = max([1.0] + [max(abs(pt.state.i_d), abs(pt.state.i_q)) for pt in equilibria])
    omega = max([1.0] + [abs(pt.state.omega) for pt in equilibria])
    return np.array([cur, cur, omega, 1.0])


def detect_convergence(traj: Trajectory, equilibria, tol: float = 1e-3,
                       params: SgParameters | None = None,
                       window_fraction: float = 0.1):
    """Classify a full-model trajectory.

    ConvergedToEquilibrium when the last ``window_fraction`` of samples
    stays within ``tol`` of one equilibrium (per-component scaled; delta
    compared modulo 2*pi, winding sheet recorded); otherwise defers to
    ``detect_periodic``; otherwise Undecided.
    """
    n = len(traj.times)
    window = traj.states[max(0, n - max(2, int(math.ceil(window_fraction * n)))):]
    scales = _convergence_scales(equilibria)
    for pt in equilibria:
        target = pt.state.as_array()
        err = np.abs(window - target) / scales
        err[:, 3] = np.abs(wrap_angle(window[:, 3] - target[3])) / scales[3]
        if float(err.max()) < tol:
            sheet = int(round((float(np.mean(window[:, 3])) - target[3]) / TWO_PI))
            return ConvergedToEquilibrium(equilibrium=pt, sheet=sheet)
    verdict = detect_periodic(traj, params=params)
    return verdict


def detect_periodic(traj: Trajectory, params: SgParameters | None = None,
                    interval_tol: float = 0.01, state_tol: float = 0.02,
                    max_crossings: int = 12):
    """Periodic-orbit detection on a Poincare section of the power angle.

    The section is delta mod 2*pi = delta(t_end) mod 2*pi, crossed in the
    decreasing-delta direction.  PeriodicOrbit when the states (i_d, i_q,
    omega) at successive crossings agree within ``state_tol`` (relative)
    and the crossing intervals agree within ``interval_tol``; fewer than 3
    crossings gives Undecided.
    """
    t = traj.times
    delta = traj.column("delta")
    anchor = delta[-1]
    # A rotating orbit drops delta by 2*pi per turn, so it crosses each
    # level anchor + 2*pi*k exactly once; one crossing is taken per sheet
    # (a decaying oscillation around a fixed point re-crosses a single
    # level and never qualifies).
    k_lo = int(math.ceil((float(delta.min()) - anchor) / TWO_PI))
    k_hi = int(math.floor((float(delta.max()) - anchor) / TWO_PI))
    crossings = []  # (time, interpolated state)
    for k in range(k_hi, k_lo - 1, -1):
        level = anchor + TWO_PI * k
        below = delta <= level
        hits = np.nonzero(~below[:-1] & below[1:])[0]
        if len(hits) == 0:
            continue
        i = int(hits[0])
        d0, d1 = delta[i], delta[i + 1]
        if d1 == d0:
            continue
        frac = (d0 - level) / (d0 - d1)
        tc = t[i] + frac * (t[i + 1] - t[i])
        state = traj.states[i] + frac * (traj.states[i + 1] - traj.states[i])
        crossings.append((tc, state))
    crossings.sort(key=lambda c: c[0])
    if len(crossings) < 3:
        return Undecided(reason="fewer than 3 section crossings")

    crossings = crossings[-max_crossings:]
    times = np.array([c[0] for c in crossings])
    states = np.array([c[1] for c in crossings])
    intervals = np.diff(times)
    period = float(np.mean(intervals))
    if period <= 0 or np.any(np.abs(intervals - period) > interval_tol * period):
        return Undecided(reason="section crossing intervals not repeating")

    # Crossing-state agreement is judged against the orbit's own excursion,
    # not the raw magnitudes (omega can hover near zero on a stalled orbit).
    segment = traj.states[traj.times >= times[0]]
    scales = np.maximum(1.0, np.ptp(segment[:, :3], axis=0))
    spread = np.abs(states[:, :3] - states[0, :3]) / scales
    if float(spread.max()) > state_tol:
        return Undecided(reason="section states not repeating")

    mask = t >= times[-2]
    omega_orbit = traj.column("omega")[mask]
    mean_omega = float(np.mean(omega_orbit))
    below = None
    if params is not None:
        below = bool(np.max(omega_orbit) < params.omega_g)
    return PeriodicOrbit(period=period, mean_omega=mean_omega, omega_below_grid=below)


# Sampling ------------------------------------------------------------------

def default_basin_box(params: SgParameters) -> tuple:
    """Physically scaled sampling box for initial states."""
    dc = derive_constants(params)
    c = 3.0 * dc.i_v
    return (
        (-c, c),
        (-c, c),
        (0.0, 2.0 * params.omega_g),
        (-math.pi, math.pi),
    )


def default_horizon(params: SgParameters, equilibria=None) -> float:
    """Simulation horizon tied to the slowest stable linear mode.

    20 / min|Re eigenvalue| of the stable equilibrium when one exists,
    otherwise 60 s.
    """
    if equilibria is None:
        equilibria = solve_equilibria(params)
    for pt in equilibria:
        if pt.classification is Stability.STABLE:
            rate = min(abs(z.real) for z in pt.eigenvalues)
            if rate > 0:
                return 20.0 / rate
    return 60.0


@dataclass
class BasinStatistics:
    """Monte-Carlo classification counts over sampled initial states."""

    n: int
    seed: int
    converged_stable: int = 0
    converged_unstable: int = 0
    periodic: int = 0
    undecided: int = 0
    exemplars: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "converged_stable": self.converged_stable,
            "converged_unstable": self.converged_unstable,
            "periodic": self.periodic,
            "undecided": self.undecided,
            "exemplars": {k: list(v) for k, v in self.exemplars.items()},
        }


def sample_initial_state(box, seed: int, index: int) -> SgState:
    """Deterministic initial state number ``index`` for a given seed.

    Each trajectory gets its own stream derived from (seed, index), so
    results do not depend on execution order.
    """
    rng = np.random.default_rng([seed, index])
    draws = [rng.uniform(lo, hi) for lo, hi in box]
    return SgState(*draws)


def classify_initial_state(params, initial, equilibria, config, tol=1e-3):
    """Simulate one initial state and classify the outcome."""
    traj = simulate_full(params, initial, config)
    traj.verdict = detect_convergence(traj, equilibria, tol=tol, params=params)
    return traj.verdict


def basin_sample(params: SgParameters, n: int, box=None, seed: int = 0,
                 config: IntegratorConfig | None = None,
                 tol: float = 1e-3, executor=None) -> BasinStatistics:
    """Classify ``n`` seeded-random initial states from ``box``.

    Deterministic for a given seed.  ``executor`` may be a
    concurrent.futures executor; aggregation is by index, so parallel
    execution cannot change the statistics.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if box is None:
        box = default_basin_box(params)
    equilibria = solve_equilibria(params)
    if config is None:
        t_end = default_horizon(params, equilibria)
        # Enough samples to resolve pole-slip orbits in the classifier.
        n_samples = int(min(20000, max(2000, 2000.0 * t_end))) + 1
        config = IntegratorConfig(
            rel_tol=1e-6, abs_tol=1e-8,
            t_end=t_end, n_samples=n_samples,
            seed=seed,
        )
    initials = [sample_initial_state(box, seed, i) for i in range(n)]
    work = lambda st: classify_initial_state(params, st, equilibria, config, tol)
    if executor is None:
        verdicts = [work(st) for st in initials]
    else:
        verdicts = list(executor.map(work, initials))

    stats = BasinStatistics(n=n, seed=seed)
    for initial, verdict in zip(initials, verdicts):
        if isinstance(verdict, ConvergedToEquilibrium):
            if verdict.equilibrium.classification is Stability.STABLE:
                key = "converged_stable"
                stats.converged_stable += 1
            else:
                key = "converged_unstable"
                stats.converged_unstable += 1
        elif isinstance(verdict, PeriodicOrbit):
            key = "periodic"
            stats.periodic += 1
        else:
            key = "undecided"
            stats.undecided += 1
        stats.exemplars.setdefault(key, tuple(initial.as_array()))
    return stats


# Cross-validation ----------------------------------------------------------

def combined_full_ese_rhs(params: SgParameters, initial: SgState):
    """Stacked 8-state system: full model and matched ESE, integrated together."""
    rhs_full = full_rhs(params)
    ese0, init_currents = ese_from_full(initial, params)
    rhs_ese = ese_rhs_fn(params, init_currents)
    y0 = np.concatenate([initial.as_array(), ese0.as_array()])

    def rhs(t, y):
        return rhs_full(t, y[:4]) + rhs_ese(t, y[4:])

    return rhs, y0


def cross_validate(params: SgParameters, initial: SgState,
                   t_end: float = 10.0, rel_tol: float = 1e-9,
                   abs_tol: float = 1e-11, n_samples: int = 2001) -> float:
    """Max |delta_full - delta_ese| over the horizon for matched initial data.

    The two formulations are mathematically equivalent, so the deviation
    measures integration error only.
    """
    dc = derive_constants(params)
    rhs, y0 = combined_full_ese_rhs(params, initial)
    config = IntegratorConfig(rel_tol=rel_tol, abs_tol=abs_tol, t_end=t_end,
                              n_samples=n_samples)
    traj = integrate(rhs, y0, config, columns=FULL_COLUMNS + ESE_COLUMNS)
    delta_full = traj.states[:, 3]
    delta_ese = traj.states[:, 4] - 1.5 * math.pi - dc.phi
    return float(np.max(np.abs(delta_full - delta_ese)))


# Serialisation --------------------------------------------------------------

def trajectory_csv(traj: Trajectory) -> str:
    """Trajectory as CSV: time column, one column per state component,
    and a trailing structured verdict record.
    """
    import json

    lines = ["t," + ",".join(traj.columns)]
    for t, row in zip(traj.times, traj.states):
        lines.append(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in row))
    lines.append("# verdict: " + json.dumps(verdict_to_dict(traj.verdict), sort_keys=True))
    return "\n".join(lines) + "\n"
