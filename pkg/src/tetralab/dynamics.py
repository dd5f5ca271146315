"""Trajectory integration, separation and floor-to-ceiling chord search.

The chord search sweeps a deterministic seed grid on the start region
(and start phases for time-periodic Hamiltonians), integrates each seed
forward with event detection on the target region's enclosing
hypersurface, certifies hits by a membership test, and then refines the
best candidate with a derivative-free pattern search that minimizes the
arrival time.  The returned chord is the minimal-time certified chord
over the sweep, with ties broken by seed order, so results do not depend
on thread scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .contact import Region
from .phase_core import HamiltonianSpec, sgrad


class EscapeError(RuntimeError):
    """The trajectory left the configured norm ball; carries last state."""

    def __init__(self, message, t, state):
        super().__init__(message)
        self.t = float(t)
        self.state = np.asarray(state, dtype=float)


class StiffnessError(RuntimeError):
    """The adaptive integrator failed to advance (step underflow)."""


def deterministic_map(fn, items, threads=1):
    """Map preserving input order; thread count never changes the output."""
    if threads is None or threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class Trajectory:
    """A sampled integral curve with dense output.

    ``times``/``states`` are the accepted solver steps (states wrapped to
    the chart); ``dense`` evaluates the unwrapped dense-output
    interpolant.  ``event_times`` lists the detected roots of the caller
    supplied event functional.
    """

    chart: object
    times: np.ndarray
    states: np.ndarray
    tol: float
    n_steps: int
    event_times: tuple = ()
    dense: Callable = field(default=None, compare=False, repr=False)

    def __call__(self, t):
        return self.chart.wrap(self.dense(t))

    @property
    def t0(self):
        return float(self.times[0])

    @property
    def t1(self):
        return float(self.times[-1])

    def sample(self, ts):
        return np.array([self(t) for t in np.atleast_1d(ts)])

    def write_csv(self, path):
        header = "t," + ",".join(self.chart.labels)
        data = np.column_stack([self.times, self.states])
        np.savetxt(path, data, delimiter=",", header=header, comments="",
                   fmt="%.17g")


def integrate(H: HamiltonianSpec, x0, t0, t1, tol=1e-10,
              escape_norm=100.0, events=None, method="DOP853",
              max_step=np.inf) -> Trajectory:
    """Adaptive dense-output integration of the Hamiltonian flow of H.

    Periodic coordinates are integrated unwrapped and reduced on output;
    the right-hand side wraps before evaluating the gradient so the
    dynamics itself never sees drifted angles.
    """
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got [{t0}, {t1}]")
    chart = H.chart

    def rhs(t, y):
        return sgrad(H, chart.wrap(y), t)

    ev_list = []

    def escape(t, y):
        return escape_norm - float(np.linalg.norm(y))

    escape.terminal = True
    ev_list.append(escape)
    user_events = []
    if events:
        for g in events:
            def wrapped(t, y, g=g):
                return g(chart.wrap(y))

            wrapped.terminal = getattr(g, "terminal", False)
            user_events.append(wrapped)
    ev_list.extend(user_events)

    x0 = np.asarray(chart.wrap(x0), dtype=float)
    sol = solve_ivp(rhs, (t0, t1), x0, method=method, rtol=tol,
                    atol=tol * 1e-2, dense_output=True, events=ev_list,
                    max_step=max_step)
    if sol.status == -1:
        raise StiffnessError(f"integrator failed: {sol.message}")
    if sol.status == 1 and len(sol.t_events[0]) > 0:
        raise EscapeError(
            f"trajectory norm exceeded {escape_norm}",
            sol.t_events[0][0], chart.wrap(sol.y[:, -1]),
        )
    ev_times = tuple(
        float(t) for te in sol.t_events[1:] for t in te
    )
    states = np.array([chart.wrap(y) for y in sol.y.T])
    return Trajectory(
        chart=chart,
        times=np.asarray(sol.t, dtype=float),
        states=states,
        tol=float(tol),
        n_steps=len(sol.t) - 1,
        event_times=tuple(sorted(ev_times)),
        dense=sol.sol,
    )


# ---------------------------------------------------------------------------
# Derivative-free local refinement
# ---------------------------------------------------------------------------

def pattern_search(f, x0, bounds, max_evals=200, shrink=0.5,
                   min_step=1e-12, init_frac=0.1):
    """Coordinate pattern search on a box; deterministic poll order."""
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    x = np.array([min(max(v, lo), hi)
                  for v, (lo, hi) in zip(np.atleast_1d(x0), bounds)])
    steps = np.array([(hi - lo) * init_frac for lo, hi in bounds])
    fx = f(x)
    evals = 1
    while evals < max_evals and steps.max() > min_step:
        improved = False
        for i in range(len(x)):
            for sign in (1.0, -1.0):
                y = x.copy()
                lo, hi = bounds[i]
                y[i] = min(max(x[i] + sign * steps[i], lo), hi)
                if y[i] == x[i]:
                    continue
                fy = f(y)
                evals += 1
                if fy < fx:
                    x, fx = y, fy
                    improved = True
                    break
                if evals >= max_evals:
                    break
            if evals >= max_evals:
                break
        if not improved:
            steps *= shrink
    return x, fx, evals


# ---------------------------------------------------------------------------
# Separation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparationReport:
    """Delta(G; Y0, Y1) = min over Y1 x period of G minus max over Y0."""

    delta: float
    min_value: float
    max_value: float
    argmin: np.ndarray
    argmax: np.ndarray
    argmin_time: float
    argmax_time: float
    n_samples: int
    separating: bool


def _extremize_on_region(G, region: Region, n_samples, sign,
                         refine_evals=120):
    """sign=+1 minimizes G over the region x time, sign=-1 maximizes."""
    times = [0.0]
    if G.time_periodic and not G.autonomous:
        times = list(np.linspace(0.0, 1.0, 17)[:-1])
    best = None
    for pr, comp in region.sample_params(n_samples):
        x = region.param_point(pr, comp)
        for t in times:
            v = sign * G(x, t)
            if best is None or v < best[0]:
                best = (v, pr, comp, t)
    _, pr, comp, t0 = best
    bounds = list(region.param_bounds)
    x0 = list(pr)
    time_axis = len(times) > 1
    if time_axis:
        bounds.append((0.0, 1.0))
        x0.append(t0)

    def obj(z):
        params = z[:-1] if time_axis else z
        t = z[-1] if time_axis else t0
        return sign * G(region.param_point(params, comp), t)

    if bounds:
        z, fv, _ = pattern_search(obj, np.array(x0), bounds,
                                  max_evals=refine_evals)
        params = z[:-1] if time_axis else z
        t = float(z[-1]) if time_axis else t0
    else:
        fv = best[0]
        params, t = pr, t0
    return sign * fv, region.param_point(params, comp), t


def separation(G: HamiltonianSpec, Y0: Region, Y1: Region,
               n_samples=256) -> SeparationReport:
    """Estimate Delta(G; Y0, Y1) by dense sampling plus local refinement."""
    vmin, xmin, tmin = _extremize_on_region(G, Y1, n_samples, +1.0)
    vmax, xmax, tmax = _extremize_on_region(G, Y0, n_samples, -1.0)
    delta = vmin - vmax
    return SeparationReport(
        delta=float(delta),
        min_value=float(vmin),
        max_value=float(vmax),
        argmin=xmin,
        argmax=xmax,
        argmin_time=float(tmin),
        argmax_time=float(tmax),
        n_samples=int(n_samples),
        separating=bool(delta > 0.0),
    )


def chord_budget(kappa, delta_sep, delta_pert=0.0):
    """Time budget kappa / (Delta - delta) of the interlinking bound."""
    gap = delta_sep - delta_pert
    if gap <= 0.0:
        raise ValueError(
            f"separation {delta_sep} does not exceed perturbation "
            f"margin {delta_pert}: no finite chord budget"
        )
    return kappa / gap


# ---------------------------------------------------------------------------
# Chord search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Chord:
    """A certified trajectory segment from X0 to X1."""

    trajectory: Trajectory
    start: np.ndarray
    end: np.ndarray
    t0: float
    t1: float
    start_distance: float
    end_distance: float
    seed_params: np.ndarray
    seed_component: int

    @property
    def time_length(self):
        return self.t1 - self.t0

    def validate(self, X0: Region, X1: Region, time_budget, tol=1e-6):
        ok = (
            X0.distance(self.start) <= tol
            and X1.distance(self.end) <= tol
            and 0.0 < self.time_length <= time_budget + 1e-12
        )
        return bool(ok)


@dataclass(frozen=True)
class ChordSearchResult:
    found: bool
    chord: Optional[Chord]
    best_distance: float
    n_seeds: int
    n_phases: int
    message: str = ""


@dataclass(frozen=True)
class ChordSearchConfig:
    n_seeds: int = 64
    n_phases: int = 16
    tol: float = 1e-6
    ode_tol: float = 1e-10
    escape_norm: float = 100.0
    refine: bool = True
    max_refine_evals: int = 200
    threads: int = 1
    miss_samples: int = 64


def find_chord(G: HamiltonianSpec, X0: Region, X1: Region, time_budget,
               config: ChordSearchConfig = ChordSearchConfig()
               ) -> ChordSearchResult:
    """Minimal-time certified chord from X0 to X1 within the budget."""
    if time_budget <= 0.0:
        raise ValueError("time_budget must be positive")
    for x in X0.sample_points(32):
        if X1.membership(x, config.tol):
            raise ValueError("start and target regions are not disjoint")

    phases = [0.0]
    if G.time_periodic and not G.autonomous:
        phases = list(np.linspace(0.0, 1.0, config.n_phases,
                                  endpoint=False))
    seeds = X0.sample_params(config.n_seeds)
    jobs = [(pi, phase, si, pr, comp)
            for pi, phase in enumerate(phases)
            for si, (pr, comp) in enumerate(seeds)]

    def attempt(params, comp, phase):
        """(hit_time or None, best target distance) for one seed."""
        x0 = X0.param_point(params, comp)
        ev = X1.event_fn
        try:
            traj = integrate(G, x0, phase, phase + time_budget,
                             tol=config.ode_tol,
                             escape_norm=config.escape_norm,
                             events=[ev])
        except (EscapeError, StiffnessError):
            return None, math.inf
        hit = None
        for tr in traj.event_times:
            if tr - phase <= 1e-12:
                continue
            if X1.membership(traj(tr), config.tol):
                hit = tr - phase
                break
        ts = np.linspace(traj.t0, traj.t1, config.miss_samples)
        dist = min(X1.distance(traj(t)) for t in ts)
        return hit, dist

    results = deterministic_map(
        lambda job: attempt(job[3], job[4], job[1]),
        jobs, threads=config.threads,
    )

    best_idx, best_time, best_dist = None, math.inf, math.inf
    for idx, (hit, dist) in enumerate(results):
        best_dist = min(best_dist, dist)
        if hit is not None and hit < best_time - 1e-15:
            best_idx, best_time = idx, hit

    if best_idx is None:
        # shooting refinement on the nearest miss, minimizing distance
        miss_idx = int(np.argmin([d for _, d in results]))
        _, phase, _, pr, comp = jobs[miss_idx]
        if config.refine and len(X0.param_bounds) > 0:
            def miss_obj(z):
                hit, dist = attempt(z, comp, phase)
                return dist if hit is None else -1.0 / (1.0 + hit)

            z, fv, _ = pattern_search(miss_obj, np.array(pr),
                                      X0.param_bounds,
                                      max_evals=config.max_refine_evals)
            hit, dist = attempt(z, comp, phase)
            if hit is not None:
                return _certify(G, X0, X1, z, comp, phase, time_budget,
                                config, dist)
            best_dist = min(best_dist, dist)
        return ChordSearchResult(
            found=False, chord=None, best_distance=float(best_dist),
            n_seeds=len(seeds), n_phases=len(phases),
            message="no certified chord at the swept resolution",
        )

    _, phase, _, pr, comp = jobs[best_idx]
    if config.refine and len(X0.param_bounds) > 0:
        def time_obj(z):
            hit, dist = attempt(z, comp, phase)
            if hit is None:
                return time_budget + dist
            return hit

        z, fv, _ = pattern_search(time_obj, np.array(pr), X0.param_bounds,
                                  max_evals=config.max_refine_evals)
        hit, _ = attempt(z, comp, phase)
        if hit is not None and hit <= best_time:
            pr = z
    return _certify(G, X0, X1, np.asarray(pr, float), comp, phase,
                    time_budget, config, best_dist)


def _certify(G, X0, X1, params, comp, phase, time_budget, config,
             best_dist) -> ChordSearchResult:
    """Re-integrate the winning seed and package the certified chord."""
    x0 = X0.param_point(params, comp)
    traj = integrate(G, x0, phase, phase + time_budget,
                     tol=config.ode_tol, escape_norm=config.escape_norm,
                     events=[X1.event_fn])
    hit = None
    for tr in traj.event_times:
        if tr - phase > 1e-12 and X1.membership(traj(tr), config.tol):
            hit = tr
            break
    if hit is None:
        return ChordSearchResult(
            found=False, chord=None, best_distance=float(best_dist),
            n_seeds=config.n_seeds, n_phases=config.n_phases,
            message="candidate failed re-certification",
        )
    end = traj(hit)
    chord = Chord(
        trajectory=traj,
        start=traj(phase),
        end=end,
        t0=float(phase),
        t1=float(hit),
        start_distance=X0.distance(traj(phase)),
        end_distance=X1.distance(end),
        seed_params=np.asarray(params, dtype=float),
        seed_component=int(comp),
    )
    return ChordSearchResult(
        found=True, chord=chord, best_distance=0.0,
        n_seeds=config.n_seeds, n_phases=config.n_phases,
    )
