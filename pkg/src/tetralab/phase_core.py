"""Symplectic calculus on flat phase charts.

Conventions used throughout the package
---------------------------------------
Coordinates on a chart with n pairs are ordered ``(p_1..p_n, q_1..q_n)``
and the symplectic form is the standard ``omega = dp ^ dq``.  Hamiltonian
vector fields are defined by ``i_v omega = -dH``, which in coordinates
reads

    pdot_i = -dH/dq_i,    qdot_i = +dH/dp_i.

The Poisson bracket is ``{F, G} = dF(sgrad G)``, i.e. the rate of change
of F along the flow of G.  Under the sign convention above this gives

    {F, G} = sum_i dF/dq_i * dG/dp_i - dF/dp_i * dG/dq_i,

so in particular ``{p, q} = -1``.  The literature is split on this sign;
it is fixed once here and everything else in the package follows it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg


class EvaluationError(ValueError):
    """A Hamiltonian callback returned a non-finite value.

    Carries the offending phase-space point in ``point``.
    """

    def __init__(self, message, point):
        super().__init__(f"{message} at point {np.asarray(point)!r}")
        self.point = np.asarray(point, dtype=float)


@dataclass(frozen=True)
class PhaseChart:
    """Flat chart R^{2n} with optional flat-torus q-factors.

    ``periodic[i]`` marks q_i as an angle coordinate identified mod 1.
    """

    dim_pairs: int
    periodic: tuple = ()
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.dim_pairs < 1:
            raise ValueError("dim_pairs must be >= 1")
        per = tuple(bool(b) for b in self.periodic)
        if not per:
            per = (False,) * self.dim_pairs
        if len(per) != self.dim_pairs:
            raise ValueError("periodic mask length must equal dim_pairs")
        object.__setattr__(self, "periodic", per)
        if not self.labels:
            n = self.dim_pairs
            labels = tuple(f"p{i+1}" for i in range(n)) + tuple(
                f"q{i+1}" for i in range(n)
            )
            object.__setattr__(self, "labels", labels)

    @property
    def dim(self):
        return 2 * self.dim_pairs

    def wrap(self, coords):
        """Reduce periodic q-coordinates to [0, 1)."""
        out = np.array(coords, dtype=float)
        n = self.dim_pairs
        for i, per in enumerate(self.periodic):
            if per:
                out[n + i] %= 1.0
                # x % 1.0 can round to exactly 1.0 for tiny negative x
                if out[n + i] == 1.0:
                    out[n + i] = 0.0
        return out

    def point(self, coords):
        return PhasePoint(self.wrap(coords), self)


@dataclass(frozen=True)
class PhasePoint:
    """A point of a chart; periodic coordinates already reduced."""

    coords: np.ndarray
    chart: PhaseChart

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (self.chart.dim,):
            raise ValueError(
                f"expected {self.chart.dim} coordinates, got {c.shape}"
            )
        object.__setattr__(self, "coords", self.chart.wrap(c))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)


def _as_coords(x):
    if isinstance(x, PhasePoint):
        return x.coords
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Scalar field on chart x time with an analytic gradient callback.

    ``value(x, t)`` returns a float, ``gradient(x, t)`` the covector
    ``(dH/dp_1.., dH/dq_1..)`` as a length-2n array.  Callbacks receive a
    plain ndarray (periodic coordinates reduced) and must be pure.
    """

    chart: PhaseChart
    value: Callable
    gradient: Callable
    time_periodic: bool = False
    autonomous: bool = True
    name: str = ""

    def __call__(self, x, t=0.0):
        v = float(self.value(self.chart.wrap(_as_coords(x)), t))
        if not np.isfinite(v):
            raise EvaluationError(f"non-finite value of {self.name or 'H'}", x)
        return v

    def grad(self, x, t=0.0):
        g = np.asarray(self.gradient(self.chart.wrap(_as_coords(x)), t), float)
        if not np.all(np.isfinite(g)):
            raise EvaluationError(
                f"non-finite gradient of {self.name or 'H'}", x
            )
        return g


def constant_hamiltonian(chart, c=0.0, name="const"):
    zeros = np.zeros(chart.dim)
    return HamiltonianSpec(
        chart=chart,
        value=lambda x, t: c,
        gradient=lambda x, t: zeros,
        time_periodic=True,
        autonomous=True,
        name=name,
    )


def sgrad(H: HamiltonianSpec, x, t=0.0):
    """Hamiltonian vector field of H at (x, t): (-dH/dq, +dH/dp)."""
    g = H.grad(x, t)
    n = H.chart.dim_pairs
    out = np.empty_like(g)
    out[:n] = -g[n:]
    out[n:] = g[:n]
    return out


def poisson_bracket(F: HamiltonianSpec, G: HamiltonianSpec, x, t=0.0):
    """{F, G} = dF(sgrad G) = sum_i F_q G_p - F_p G_q (so {p,q} = -1)."""
    gf = F.grad(x, t)
    gg = G.grad(x, t)
    n = F.chart.dim_pairs
    return float(np.dot(gf[n:], gg[:n]) - np.dot(gf[:n], gg[n:]))


def extended_chart(chart: PhaseChart) -> PhaseChart:
    """Chart of M x T*S^1 with the extra pair (r, theta), theta periodic."""
    n = chart.dim_pairs
    return PhaseChart(
        dim_pairs=n + 1,
        periodic=chart.periodic + (True,),
        labels=chart.labels[:n] + ("r",) + chart.labels[n:] + ("theta",),
    )


def split_extended(coords, base_chart):
    """Split extended coordinates into (base coords, r, theta)."""
    n = base_chart.dim_pairs
    c = np.asarray(coords, dtype=float)
    base = np.concatenate([c[:n], c[n + 1 : 2 * n + 1]])
    return base, float(c[n]), float(c[2 * n + 1])


def join_extended(base_coords, r, theta, base_chart):
    n = base_chart.dim_pairs
    b = np.asarray(base_coords, dtype=float)
    return np.concatenate([b[:n], [r], b[n:], [theta]])


def autonomize(G: HamiltonianSpec) -> HamiltonianSpec:
    """Autonomous H(x, r, theta) = G(x, theta) + r on the extended chart.

    Projections of H-trajectories to the base chart are G-trajectories of
    the same time-length; theta advances at unit rate along the flow.
    """
    if G.autonomous:
        raise ValueError(
            "autonomize expects a time-periodic Hamiltonian; "
            "an autonomous one would silently gain a spurious r-dynamics"
        )
    if not G.time_periodic:
        raise ValueError("autonomize requires period-1 time dependence")
    base = G.chart
    n = base.dim_pairs
    ext = extended_chart(base)

    def value(c, t):
        xb, r, theta = split_extended(c, base)
        return G.value(base.wrap(xb), theta) + r

    def gradient(c, t):
        xb, r, theta = split_extended(c, base)
        xb = base.wrap(xb)
        g = np.asarray(G.gradient(xb, theta), dtype=float)
        # dG/dtheta by centered differences: theta enters only through
        # the explicit time slot of G.
        h = 1e-6
        dtheta = (G.value(xb, theta + h) - G.value(xb, theta - h)) / (2 * h)
        out = np.empty(2 * n + 2)
        out[:n] = g[:n]
        out[n] = 1.0  # dH/dr
        out[n + 1 : 2 * n + 1] = g[n:]
        out[2 * n + 1] = dtheta
        return out

    return HamiltonianSpec(
        chart=ext,
        value=value,
        gradient=gradient,
        time_periodic=False,
        autonomous=True,
        name=f"aut({G.name})" if G.name else "aut",
    )


def _pfaffian(a):
    """Pfaffian of a real antisymmetric matrix via the real Schur form."""
    a = np.asarray(a, dtype=float)
    m = a.shape[0]
    if m % 2:
        return 0.0
    t, z = scipy.linalg.schur(a, output="real")
    pf = np.linalg.det(z)
    for i in range(0, m, 2):
        pf *= t[i, i + 1]
    return float(pf)


@dataclass(frozen=True)
class VolumeFactor:
    """Result of the deformed-volume identity check at one point.

    ``det_ratio`` is the top-power ratio of the deformed form
    omega_tau = omega + tau dF^dG against omega, computed as a Pfaffian
    ratio of the assembled 2n x 2n matrices; ``analytic`` is the closed
    form 1 - tau*{F, G}.  ``degenerate`` flags tau*{F,G} >= 1, where
    omega_tau stops being symplectic.
    """

    det_ratio: float
    analytic: float
    degenerate: bool


def omega_matrix(n):
    """Matrix of omega = dp^dq in (p, q) block order: omega(e_i,e_j)."""
    o = np.zeros((2 * n, 2 * n))
    o[:n, n:] = np.eye(n)
    o[n:, :n] = -np.eye(n)
    return o


def volume_factor(F, G, tau, x, t=0.0) -> VolumeFactor:
    n = F.chart.dim_pairs
    gf = F.grad(x, t)
    gg = G.grad(x, t)
    m = omega_matrix(n) + tau * (np.outer(gf, gg) - np.outer(gg, gf))
    ratio = _pfaffian(m) / _pfaffian(omega_matrix(n))
    pb = poisson_bracket(F, G, x, t)
    analytic = 1.0 - tau * pb
    return VolumeFactor(
        det_ratio=float(ratio),
        analytic=float(analytic),
        degenerate=bool(tau * pb >= 1.0),
    )
