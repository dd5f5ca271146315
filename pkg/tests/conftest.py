"""Shared fixtures and numerical oracles for the test suite.

Heavy runs (chord sweeps, grid estimates) execute once per session and
are reused by both the module tests and the acceptance suite; each
fixture records its wall-clock time so runtime budgets can be asserted.
"""

import json
import math
import time
from dataclasses import dataclass

import numpy as np
import pytest

from tetralab.dynamics import ChordSearchConfig, find_chord, separation
from tetralab.pb4 import (Pb4Config, estimate_pb4_plus, prototype_problem,
                          relabeled, shrink_prototype_masks, wall_witness)
from tetralab.phase_core import HamiltonianSpec, poisson_bracket
from tetralab.contact import CircleModel, build_tetragon
from tetralab.scenarios import (PerturbationSpec, ScenarioConfig,
                                run_mechanical, run_reeb_chord,
                                run_superconductivity,
                                run_unstable_equilibrium)


@dataclass(frozen=True)
class Timed:
    value: object
    elapsed: float


def timed(fn):
    t0 = time.perf_counter()
    v = fn()
    return Timed(v, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def fd_gradient(H: HamiltonianSpec, x, t=0.0):
    """Centered finite-difference gradient oracle, step 1e-6*(1+|x_i|)."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(len(x)):
        h = 1e-6 * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (H.value(xp, t) - H.value(xm, t)) / (2 * h)
    return g


def check_gradient(H, points, t=0.0, rtol=1e-5):
    for x in points:
        g = H.grad(x, t)
        gf = fd_gradient(H, x, t)
        assert np.allclose(g, gf, rtol=rtol, atol=1e-7), (
            f"gradient mismatch at {x}: {g} vs fd {gf}"
        )


def fd_bracket_spec(F, G):
    """{F, G} as a HamiltonianSpec with a finite-difference gradient,
    for nesting brackets in identity checks."""
    def value(x, t):
        return poisson_bracket(F, G, x, t)

    def gradient(x, t):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        for i in range(len(x)):
            h = 1e-6 * (1.0 + abs(x[i]))
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            g[i] = (value(xp, t) - value(xm, t)) / (2 * h)
        return g

    return HamiltonianSpec(chart=F.chart, value=value, gradient=gradient)


def polynomial_hamiltonian(chart, coeffs):
    """Quadratic form sum c_ij x_i x_j + linear terms, analytic gradient."""
    A, b = coeffs
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    return HamiltonianSpec(
        chart=chart,
        value=lambda x, t: float(x @ A @ x + b @ x),
        gradient=lambda x, t: (A + A.T) @ x + b,
    )


def gaussian_hamiltonian(chart, centers, widths, amps, name="bumps"):
    """Sum of radial Gaussian bumps with analytic gradients."""
    centers = [np.asarray(c, dtype=float) for c in centers]

    def value(x, t):
        return sum(
            a * math.exp(-float(np.dot(x - c, x - c)) / w ** 2)
            for c, w, a in zip(centers, widths, amps)
        )

    def gradient(x, t):
        g = np.zeros(chart.dim)
        for c, w, a in zip(centers, widths, amps):
            d = x - c
            g += a * math.exp(-float(np.dot(d, d)) / w ** 2) \
                * (-2.0 / w ** 2) * d
        return g

    return HamiltonianSpec(chart=chart, value=value, gradient=gradient,
                           name=name)


# ---------------------------------------------------------------------------
# Session-scoped heavy runs (threads=1 baselines)
# ---------------------------------------------------------------------------

def scenario_payload(report):
    return json.dumps(report.describe(), sort_keys=True)


@pytest.fixture(scope="session")
def unstable_run():
    return timed(lambda: run_unstable_equilibrium(
        ScenarioConfig(scenario="unstable_equilibrium")))


@pytest.fixture(scope="session")
def perturbed_run():
    return timed(lambda: run_unstable_equilibrium(
        ScenarioConfig(scenario="unstable_equilibrium",
                       perturbation=PerturbationSpec(delta_target=0.25))))


@pytest.fixture(scope="session")
def channel_run_k1():
    return timed(lambda: run_superconductivity(
        ScenarioConfig(scenario="superconductivity", k=1)))


@pytest.fixture(scope="session")
def channel_run_k2():
    return timed(lambda: run_superconductivity(
        ScenarioConfig(scenario="superconductivity", k=2)))


@pytest.fixture(scope="session")
def mechanical_run():
    return timed(lambda: run_mechanical(
        ScenarioConfig(scenario="mechanical", beta=0.5)))


@pytest.fixture(scope="session")
def reeb_run():
    return timed(lambda: run_reeb_chord(
        ScenarioConfig(scenario="reeb_chord")))


@pytest.fixture(scope="session")
def reeb_constant_run():
    return timed(lambda: run_reeb_chord(
        ScenarioConfig(scenario="reeb_chord", reeb_factor_base=1.5,
                       reeb_factor_amp=0.0)))


@pytest.fixture(scope="session")
def pb4_runs():
    def compute():
        r128 = estimate_pb4_plus(prototype_problem(128))
        r256 = estimate_pb4_plus(prototype_problem(256))
        return r128, r256

    return timed(compute)


@pytest.fixture(scope="session")
def pb4_property_runs(pb4_runs):
    """Relabeled / shrunk / thickened re-estimates warm-started from the
    128^2 optimum, for the invariance and monotonicity checks."""
    r128 = pb4_runs.value[0]
    problem = prototype_problem(128)
    return {
        "relabeled": estimate_pb4_plus(relabeled(problem)),
        "shrunk": estimate_pb4_plus(
            shrink_prototype_masks(problem),
            warm_start=(r128.F, r128.G),
        ),
        "thickened": estimate_pb4_plus(
            prototype_problem(128, thicken_radius=1),
            warm_start=(r128.F, r128.G),
        ),
    }


@pytest.fixture(scope="session")
def witness_run():
    def compute():
        ww = wall_witness(1.0, 2.0, delta2=0.01)
        H = ww.hamiltonian()
        tet = build_tetragon(CircleModel(), 1.0, 2.0, 0.25)
        budget = 0.25 / 1.01 - 0.01
        search = find_chord(H, tet.high_wall, tet.low_wall, budget,
                            ChordSearchConfig(n_seeds=1001))
        sep = separation(H, tet.floor, tet.ceiling)
        return ww, search, sep

    return timed(compute)
