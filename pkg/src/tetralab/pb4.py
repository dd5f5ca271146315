"""Gridded minimax estimation of the bracket invariant on 2D windows.

The invariant is the infimum, over compactly supported pairs (F, G)
with F <= 0 on X0, F >= 1 on X1, G <= 0 on Y0, G >= 1 on Y1, of the
maximum of the Poisson bracket {F, G}.  On a 2D window with coordinates
(s, u) and omega = ds^du (p = s, q = u) the bracket of grid fields is

    {F, G} = dF/du * dG/ds - dF/ds * dG/du

with centered differences, periodic in u on cylinder windows.  Any
feasible pair yields an upper estimate of the invariant up to
discretization error; the optimizer descends a log-sum-exp smoothed
maximum of the positive part of the bracket with constraint projection
after every step, from multiple deterministic starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.ndimage import binary_dilation, gaussian_filter

from .phase_core import HamiltonianSpec, PhaseChart


class InfeasibleError(ValueError):
    """A grid field violates a constraint mask; names the mask."""


@dataclass(frozen=True)
class GridWindow:
    """Rectangle [s_lo, s_hi] x [u_lo, u_hi) gridded n_s x n_u.

    On cylinder windows (periodic_u) the u-axis has n_u cells without a
    duplicated endpoint; the s-axis always includes both endpoints.
    """

    s_lo: float
    s_hi: float
    u_lo: float
    u_hi: float
    n_s: int
    n_u: int
    periodic_u: bool = True

    @property
    def h_s(self):
        return (self.s_hi - self.s_lo) / (self.n_s - 1)

    @property
    def h_u(self):
        cells = self.n_u if self.periodic_u else self.n_u - 1
        return (self.u_hi - self.u_lo) / cells

    def s_nodes(self):
        return self.s_lo + self.h_s * np.arange(self.n_s)

    def u_nodes(self):
        return self.u_lo + self.h_u * np.arange(self.n_u)


MASK_NAMES = ("X0", "X1", "Y0", "Y1")


@dataclass(frozen=True)
class Pb4Problem:
    """Window, constraint masks and thickening radius of one instance."""

    window: GridWindow
    masks: dict
    thicken_radius: int = 0

    def __post_init__(self):
        for name in MASK_NAMES:
            if name not in self.masks:
                raise ValueError(f"missing constraint mask {name}")
            m = np.asarray(self.masks[name], dtype=bool)
            if m.shape != (self.window.n_s, self.window.n_u):
                raise ValueError(f"mask {name} has shape {m.shape}")
        for a, b in (("X0", "X1"), ("Y0", "Y1")):
            if np.any(self.thickened(a) & self.thickened(b)):
                raise ValueError(
                    f"thickened masks {a} and {b} are not disjoint"
                )

    def thickened(self, name):
        m = np.asarray(self.masks[name], dtype=bool)
        r = self.thicken_radius
        if r <= 0:
            return m
        if self.window.periodic_u:
            pad = np.concatenate([m[:, -r:], m, m[:, :r]], axis=1)
            pad = binary_dilation(pad, iterations=r)
            out = pad[:, r:-r].copy()
            out[:, :r] |= pad[:, -r:]
            out[:, -r:] |= pad[:, :r]
            return out
        return binary_dilation(m, iterations=r)

    def frame_mask(self):
        w = self.window
        f = np.zeros((w.n_s, w.n_u), dtype=bool)
        f[0, :] = f[-1, :] = True
        if not w.periodic_u:
            f[:, 0] = f[:, -1] = True
        return f

    def interior_mask(self):
        w = self.window
        m = np.zeros((w.n_s, w.n_u), dtype=bool)
        if w.periodic_u:
            m[1:-1, :] = True
        else:
            m[1:-1, 1:-1] = True
        return m


# ---------------------------------------------------------------------------
# Discrete differential operators (centered differences)
# ---------------------------------------------------------------------------

def _d_s(a, h):
    out = np.zeros_like(a)
    out[1:-1] = (a[2:] - a[:-2]) / (2.0 * h)
    return out


def _d_s_adjoint(w, h):
    out = np.zeros_like(w)
    out[2:] += w[1:-1] / (2.0 * h)
    out[:-2] -= w[1:-1] / (2.0 * h)
    return out


def _d_u(a, h, periodic):
    if periodic:
        return (np.roll(a, -1, axis=1) - np.roll(a, 1, axis=1)) / (2.0 * h)
    out = np.zeros_like(a)
    out[:, 1:-1] = (a[:, 2:] - a[:, :-2]) / (2.0 * h)
    return out


def _d_u_adjoint(w, h, periodic):
    if periodic:
        return -_d_u(w, h, True)
    out = np.zeros_like(w)
    out[:, 2:] += w[:, 1:-1] / (2.0 * h)
    out[:, :-2] -= w[:, 1:-1] / (2.0 * h)
    return out


def discrete_bracket(problem: Pb4Problem, F, G):
    """{F, G} = F_u G_s - F_s G_u on the grid (zero on the frame)."""
    w = problem.window
    per = w.periodic_u
    return (_d_u(F, w.h_u, per) * _d_s(G, w.h_s)
            - _d_s(F, w.h_s) * _d_u(G, w.h_u, per))


def feasible_pair_value(problem: Pb4Problem, F, G, tol=1e-12):
    """Max of the discrete bracket over interior nodes, after checking
    every constraint; any feasible pair upper-estimates the invariant up
    to discretization error."""
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    frame = problem.frame_mask()
    checks = [
        ("X0", F[problem.thickened("X0")], "max", 0.0),
        ("X1", F[problem.thickened("X1")], "min", 1.0),
        ("Y0", G[problem.thickened("Y0")], "max", 0.0),
        ("Y1", G[problem.thickened("Y1")], "min", 1.0),
    ]
    for name, vals, kind, bound in checks:
        if vals.size == 0:
            raise InfeasibleError(f"constraint mask {name} is empty")
        if kind == "max" and vals.max() > bound + tol:
            raise InfeasibleError(
                f"field violates {name}: max {vals.max():.3e} > {bound}"
            )
        if kind == "min" and vals.min() < bound - tol:
            raise InfeasibleError(
                f"field violates {name}: min {vals.min():.3e} < {bound}"
            )
    for nm, A in (("F", F), ("G", G)):
        if np.abs(A[frame]).max() > tol:
            raise InfeasibleError(f"{nm} does not vanish on the frame")
    b = discrete_bracket(problem, F, G)
    return float(b[problem.interior_mask()].max())


def project_fields(problem: Pb4Problem, F, G):
    """Nearest feasible fields: clip on masks, zero the frame."""
    F = np.array(F, dtype=float)
    G = np.array(G, dtype=float)
    frame = problem.frame_mask()
    tX0, tX1 = problem.thickened("X0"), problem.thickened("X1")
    tY0, tY1 = problem.thickened("Y0"), problem.thickened("Y1")
    F[tX0] = np.minimum(F[tX0], 0.0)
    F[tX1] = np.maximum(F[tX1], 1.0)
    G[tY0] = np.minimum(G[tY0], 0.0)
    G[tY1] = np.maximum(G[tY1], 1.0)
    F[frame] = 0.0
    G[frame] = 0.0
    return F, G


# ---------------------------------------------------------------------------
# Feasible interpolant construction
# ---------------------------------------------------------------------------

def _row_range(mask):
    rows = np.where(mask.any(axis=1))[0]
    return (int(rows.min()), int(rows.max())) if rows.size else None


def _circular_arc(cols, n):
    """Longest-gap complement: the contiguous arc (start, end) covering
    a wrapped column set, as inclusive indices mod n."""
    cols = sorted(set(int(c) % n for c in cols))
    if len(cols) == n:
        return 0, n - 1
    gaps = []
    for i, c in enumerate(cols):
        nxt = cols[(i + 1) % len(cols)]
        gap = (nxt - c) % n
        gaps.append((gap, c, nxt))
    _, end_c, start_c = max(gaps)
    return start_c, end_c  # arc runs start_c .. end_c (mod n)


def _s_ramp_profile(n_s, lo_rows, hi_rows):
    """Row profile: 0 across lo_rows, 1 across hi_rows, linear between,
    returning to 0 two rows before the frame on the far side."""
    prof = np.zeros(n_s)
    (l0, l1), (h0, h1) = lo_rows, hi_rows
    if l1 < h0:  # ascending
        a, b = l1, h0
        prof[a:b + 1] = np.linspace(0.0, 1.0, b - a + 1)
        hold = min(h1 + 2, n_s - 3)
        prof[b:hold + 1] = 1.0
        prof[hold:n_s - 1] = np.linspace(1.0, 0.0, n_s - 1 - hold)
    else:  # descending: 1 on the low-index side
        a, b = h1, l0
        prof[a:b + 1] = np.linspace(1.0, 0.0, b - a + 1)
        hold = max(h0 - 2, 2)
        prof[hold:a + 1] = 1.0
        prof[1:hold + 1] = np.linspace(0.0, 1.0, hold)
    prof[0] = prof[-1] = 0.0
    return prof


def _u_ramp_profile(n_u, zero_cols, one_cols):
    """Wrapped column profile: 0 on one arc, 1 on the other, linear
    transitions over the complementary arcs."""
    z0, z1 = _circular_arc(zero_cols, n_u)
    o0, o1 = _circular_arc(one_cols, n_u)
    prof = np.zeros(n_u)

    def arc_indices(a, b):
        i = a
        out = [i]
        while i != b:
            i = (i + 1) % n_u
            out.append(i)
        return out

    up = arc_indices(z1, o0)  # rising transition
    for j, i in enumerate(up):
        prof[i] = j / max(len(up) - 1, 1)
    down = arc_indices(o1, z0)  # falling transition
    for j, i in enumerate(down):
        prof[i] = 1.0 - j / max(len(down) - 1, 1)
    for i in arc_indices(z0, z1):  # pin the constraint arcs last
        prof[i] = 0.0
    for i in arc_indices(o0, o1):
        prof[i] = 1.0
    return prof


def _build_field(problem, lo_name, hi_name):
    """A feasible field for one constraint pair, oriented automatically."""
    w = problem.window
    lo = problem.thickened(lo_name)
    hi = problem.thickened(hi_name)
    lo_rows, hi_rows = _row_range(lo), _row_range(hi)
    s_separated = (lo_rows[1] < hi_rows[0]) or (hi_rows[1] < lo_rows[0])
    if s_separated:
        prof = _s_ramp_profile(w.n_s, lo_rows, hi_rows)
        return np.repeat(prof[:, None], w.n_u, axis=1)
    zero_cols = np.where(lo.any(axis=0))[0]
    one_cols = np.where(hi.any(axis=0))[0]
    prof = _u_ramp_profile(w.n_u, zero_cols, one_cols)
    band = np.zeros(w.n_s)
    r0 = min(_row_range(lo)[0], _row_range(hi)[0])
    r1 = max(_row_range(lo)[1], _row_range(hi)[1])
    band[r0:r1 + 1] = 1.0
    return band[:, None] * prof[None, :]


def interpolant_pair(problem: Pb4Problem):
    """Deterministic feasible start: ramp interpolants of the masks."""
    F = _build_field(problem, "X0", "X1")
    G = _build_field(problem, "Y0", "Y1")
    return project_fields(problem, F, G)


# ---------------------------------------------------------------------------
# Optimizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pb4Config:
    n_starts: int = 8
    iterations: int = 30
    temperatures: tuple = (50.0, 200.0, 800.0)
    learning_rate: float = 0.01
    blur_sigma: float = 1.0
    perturbation_scale: float = 0.02
    validate_every: int = 5
    threads: int = 1
    seed: int = 0


@dataclass(frozen=True)
class Pb4Report:
    estimate: float
    F: np.ndarray
    G: np.ndarray
    resolution: tuple
    trace: tuple
    best_start: int

    def describe(self):
        return {
            "estimate": self.estimate,
            "resolution": list(self.resolution),
            "best_start": self.best_start,
            "starts": [dict(t) for t in self.trace],
        }


def _smoothed_max_gradients(problem, F, G, beta):
    w = problem.window
    per = w.periodic_u
    Fu, Fs = _d_u(F, w.h_u, per), _d_s(F, w.h_s)
    Gu, Gs = _d_u(G, w.h_u, per), _d_s(G, w.h_s)
    B = Fu * Gs - Fs * Gu
    interior = problem.interior_mask()
    P = np.where(interior, np.maximum(B, 0.0), 0.0)
    m = P.max()
    weights = np.exp(beta * (P - m)) * (B > 0) * interior
    tot = weights.sum()
    if tot <= 0.0:
        z = np.zeros_like(F)
        return z, z.copy(), 0.0
    weights = weights / tot
    dF = (_d_u_adjoint(weights * Gs, w.h_u, per)
          - _d_s_adjoint(weights * Gu, w.h_s))
    dG = (_d_s_adjoint(weights * Fu, w.h_s)
          - _d_u_adjoint(weights * Fs, w.h_u, per))
    return dF, dG, float(m)


def _blur(a, sigma, periodic):
    if sigma <= 0:
        return a
    mode = ("nearest", "wrap") if periodic else ("nearest", "nearest")
    return gaussian_filter(a, sigma=sigma, mode=mode)


def _run_start(problem, config, start_index, warm):
    F, G = warm
    per = problem.window.periodic_u
    if start_index > 0:
        rng = np.random.default_rng(config.seed * 1000 + start_index)
        F = F + _blur(rng.standard_normal(F.shape), 2.0, per) \
            * config.perturbation_scale
        G = G + _blur(rng.standard_normal(G.shape), 2.0, per) \
            * config.perturbation_scale
    F, G = project_fields(problem, F, G)
    best_val = feasible_pair_value(problem, F, G)
    best_F, best_G = F, G
    iters = 0
    for beta in config.temperatures:
        for it in range(config.iterations):
            dF, dG, _ = _smoothed_max_gradients(problem, F, G, beta)
            dF = _blur(dF, config.blur_sigma, per)
            dG = _blur(dG, config.blur_sigma, per)
            nF = np.abs(dF).max()
            nG = np.abs(dG).max()
            if max(nF, nG) < 1e-15:
                break
            F = F - config.learning_rate * dF / (nF + 1e-15)
            G = G - config.learning_rate * dG / (nG + 1e-15)
            F, G = project_fields(problem, F, G)
            iters += 1
            if (it + 1) % config.validate_every == 0:
                val = feasible_pair_value(problem, F, G)
                if val < best_val:
                    best_val, best_F, best_G = val, F, G
    val = feasible_pair_value(problem, F, G)
    if val < best_val:
        best_val, best_F, best_G = val, F, G
    return best_val, best_F, best_G, iters


def estimate_pb4_plus(problem: Pb4Problem,
                      config: Pb4Config = Pb4Config(),
                      warm_start=None) -> Pb4Report:
    """Best validated feasible value over deterministic multi-starts.

    ``warm_start`` (a field pair, e.g. a previous report's optimum)
    replaces the interpolant start after projection onto this problem's
    constraints; since projection preserves feasibility, warm-started
    estimates are exactly monotone under constraint relaxation.
    """
    from .dynamics import deterministic_map

    if warm_start is not None:
        base = project_fields(problem, warm_start[0], warm_start[1])
    else:
        base = interpolant_pair(problem)
    results = deterministic_map(
        lambda i: _run_start(problem, config, i, base),
        list(range(config.n_starts)),
        threads=config.threads,
    )
    best_idx = 0
    for i, res in enumerate(results):
        if res[0] < results[best_idx][0] - 1e-15:
            best_idx = i
    val, F, G, _ = results[best_idx]
    trace = tuple(
        (("start", i), ("value", float(r[0])), ("iterations", int(r[3])))
        for i, r in enumerate(results)
    )
    return Pb4Report(
        estimate=float(val),
        F=F,
        G=G,
        resolution=(problem.window.n_s, problem.window.n_u),
        trace=trace,
        best_start=best_idx,
    )


def relabeled(problem: Pb4Problem) -> Pb4Problem:
    """The (Y1, Y0, X0, X1) relabeling whose estimate agrees with the
    original by anti-symmetry of the invariant."""
    m = problem.masks
    return Pb4Problem(
        window=problem.window,
        masks={"X0": m["Y1"], "X1": m["Y0"],
               "Y0": m["X0"], "Y1": m["X1"]},
        thicken_radius=problem.thicken_radius,
    )


# ---------------------------------------------------------------------------
# Prototype instance: cylinder tetragon masks
# ---------------------------------------------------------------------------

def prototype_problem(n=128, R0=1.0, R1=2.0, T=0.25, s_margin=0.5,
                      thicken_radius=0) -> Pb4Problem:
    """Cylinder-window instance whose exact invariant is 1/((R1-R0)*T).

    Masks are the grid cells meeting the floor (X0, s=R0), ceiling
    (X1, s=R1), low wall (Y0, u=T) and high wall (Y1, u=0).
    """
    w = GridWindow(
        s_lo=R0 - s_margin, s_hi=R1 + s_margin,
        u_lo=0.0, u_hi=1.0, n_s=n, n_u=n, periodic_u=True,
    )
    s = w.s_nodes()
    u = w.u_nodes()
    row0 = np.abs(s - R0) <= w.h_s / 2 + 1e-12
    row1 = np.abs(s - R1) <= w.h_s / 2 + 1e-12
    shell = (s >= R0 - w.h_s / 2 - 1e-12) & (s <= R1 + w.h_s / 2 + 1e-12)

    def u_near(val):
        d = np.abs((u - val + 0.5) % 1.0 - 0.5)
        return d <= w.h_u / 2 + 1e-12

    def u_in_arc(lo, hi):
        du = (u - lo) % 1.0
        return (du <= hi - lo + w.h_u / 2 + 1e-12) | u_near(lo)

    arc = u_in_arc(0.0, T)
    masks = {
        "X0": row0[:, None] & arc[None, :],
        "X1": row1[:, None] & arc[None, :],
        "Y0": shell[:, None] & u_near(T)[None, :],
        "Y1": shell[:, None] & u_near(0.0)[None, :],
    }
    return Pb4Problem(window=w, masks=masks, thicken_radius=thicken_radius)


def shrink_prototype_masks(problem: Pb4Problem, cells=2) -> Pb4Problem:
    """Shrink every mask by trimming ``cells`` columns/rows from the
    ends of its arc; the feasible set grows, so the invariant estimate
    cannot increase (tested with warm starts)."""
    out = {}
    for name, m in problem.masks.items():
        m = np.asarray(m, dtype=bool)
        new = m.copy()
        if name in ("X0", "X1"):
            cols = np.where(m.any(axis=0))[0]
            drop = set(list(cols[:cells]) + list(cols[-cells:]))
            new[:, sorted(drop)] = False
        else:
            rows = np.where(m.any(axis=1))[0]
            drop = set(list(rows[:cells]) + list(rows[-cells:]))
            new[sorted(drop), :] = False
        if not new.any():
            raise ValueError(f"shrinking emptied mask {name}")
        out[name] = new
    return replace(problem, masks=out)


# ---------------------------------------------------------------------------
# Analytic prototype Hamiltonian pair (for the chord mean-value check)
# ---------------------------------------------------------------------------

def prototype_hamiltonian_pair(R0=1.0, R1=2.0, T=0.25):
    """Smooth representatives (F, G) of the prototype feasible pair on
    the cylinder chart (p = s, q = u).

    F depends on s only (ramp 0 -> 1 across [R0, R1]); G = g(u) * b(s)
    with g descending 1 -> 0 across [0, T] and b a plateau bump equal to
    1 on a neighborhood of [R0, R1].  Along any chord of G from floor to
    ceiling, {F, G} is constant and equals the reciprocal chord time.
    """
    chart = PhaseChart(dim_pairs=1, periodic=(True,), labels=("s", "u"))
    width = R1 - R0

    def f_ramp(s):
        x = (s - R0) / width
        return float(min(max(x, 0.0), 1.0))

    def f_ramp_d(s):
        return 1.0 / width if R0 <= s <= R1 else 0.0

    def g_desc(q):
        q = q % 1.0
        if q <= T:
            return 1.0 - q / T
        lo, hi = 0.55, 0.95
        if q >= hi:
            return 1.0
        if q <= lo:
            return 0.0
        return (q - lo) / (hi - lo)

    def g_desc_d(q):
        q = q % 1.0
        if q <= T:
            return -1.0 / T
        lo, hi = 0.55, 0.95
        if lo < q < hi:
            return 1.0 / (hi - lo)
        return 0.0

    pad, roll = 0.1, 0.2

    def bump(s):
        if R0 - pad <= s <= R1 + pad:
            return 1.0
        if s <= R0 - pad - roll or s >= R1 + pad + roll:
            return 0.0
        x = (s - (R1 + pad)) / roll if s > R1 else ((R0 - pad) - s) / roll
        return 1.0 - (6 * x ** 5 - 15 * x ** 4 + 10 * x ** 3)

    def bump_d(s):
        if R0 - pad <= s <= R1 + pad:
            return 0.0
        if s <= R0 - pad - roll or s >= R1 + pad + roll:
            return 0.0
        if s > R1:
            x = (s - (R1 + pad)) / roll
            return -(30 * x ** 4 - 60 * x ** 3 + 30 * x ** 2) / roll
        x = ((R0 - pad) - s) / roll
        return (30 * x ** 4 - 60 * x ** 3 + 30 * x ** 2) / roll

    F = HamiltonianSpec(
        chart=chart,
        value=lambda x, t: f_ramp(x[0]),
        gradient=lambda x, t: np.array([f_ramp_d(x[0]), 0.0]),
        name="prototype-F",
    )
    G = HamiltonianSpec(
        chart=chart,
        value=lambda x, t: g_desc(x[1]) * bump(x[0]),
        gradient=lambda x, t: np.array(
            [g_desc(x[1]) * bump_d(x[0]), g_desc_d(x[1]) * bump(x[0])]
        ),
        name="prototype-G",
    )
    return F, G


# ---------------------------------------------------------------------------
# Wall witness
# ---------------------------------------------------------------------------

def _smoothstep(x):
    x = min(max(x, 0.0), 1.0)
    return 3 * x ** 2 - 2 * x ** 3


def _smoothstep_int(x):
    """Integral of _smoothstep from 0 to x (x clipped to [0,1])."""
    x = min(max(x, 0.0), 1.0)
    return x ** 3 - x ** 4 / 2.0


def _quintic(x):
    x = min(max(x, 0.0), 1.0)
    return 6 * x ** 5 - 15 * x ** 4 + 10 * x ** 3


def _quintic_d(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return 30 * x ** 4 - 60 * x ** 3 + 30 * x ** 2


@dataclass(frozen=True)
class WallWitness:
    """C^2 ramp u(s): zero outside (R0+delta1, R1+delta1), u(R1) = 1,
    non-decreasing on [R0, R1] with slope <= 1/(R1-R0) + delta2."""

    R0: float
    R1: float
    delta1: float
    delta2: float
    ease_width: float

    def profile(self, s):
        a = self.R0 + self.delta1
        b = self.R1
        w = self.ease_width
        norm = (b - a) - w
        if s <= a:
            return 0.0
        if s <= b:
            acc = 0.0
            if s > a:
                acc += w * _smoothstep_int(min((s - a) / w, 1.0))
            if s > a + w:
                acc += min(s, b - w) - (a + w)
            if s > b - w:
                acc += w * (0.5 - _smoothstep_int((b - s) / w))
            return acc / norm
        # descent back to 0 inside (R1, R1 + delta1)
        w2 = 0.9 * self.delta1
        return 1.0 - _quintic((s - b) / w2)

    def slope(self, s):
        a = self.R0 + self.delta1
        b = self.R1
        w = self.ease_width
        norm = (b - a) - w
        if s <= a or s >= b + 0.9 * self.delta1:
            return 0.0
        if s <= b:
            if s < a + w:
                return _smoothstep((s - a) / w) / norm
            if s > b - w:
                return _smoothstep((b - s) / w) / norm
            return 1.0 / norm
        w2 = 0.9 * self.delta1
        return -_quintic_d((s - b) / w2) / w2

    @property
    def max_slope(self):
        a = self.R0 + self.delta1
        return 1.0 / ((self.R1 - a) - self.ease_width)

    def hamiltonian(self) -> HamiltonianSpec:
        """u(s) as a Hamiltonian on the cylinder chart (p = s, q = u):
        its flow advances u at rate u'(s) along Reeb lines."""
        chart = PhaseChart(dim_pairs=1, periodic=(True,),
                           labels=("s", "u"))
        return HamiltonianSpec(
            chart=chart,
            value=lambda x, t: self.profile(x[0]),
            gradient=lambda x, t: np.array([self.slope(x[0]), 0.0]),
            name="wall-witness",
        )


def wall_witness(R0, R1, delta1=0.005, delta2=0.01) -> WallWitness:
    if not (0.0 < R0 < R1):
        raise ValueError("need 0 < R0 < R1")
    if delta1 <= 0.0 or delta2 <= 0.0:
        raise ValueError("delta1 and delta2 must be positive")
    width = R1 - R0
    # slope bound 1/(width - delta1 - w) <= 1/width + delta2 pins the
    # ease width w; infeasible deltas are rejected.
    w_max = (width - delta1) - width / (1.0 + delta2 * width)
    if w_max <= 0.0:
        raise ValueError(
            f"delta1={delta1} too large for slope margin delta2={delta2}: "
            "no ease width satisfies the derivative bound"
        )
    return WallWitness(
        R0=float(R0), R1=float(R1),
        delta1=float(delta1), delta2=float(delta2),
        ease_width=0.8 * w_max,
    )
