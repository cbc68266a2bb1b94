import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import qal

settings.register_profile(
    "numeric",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")

# analytic references for the default box [-30, 30]
BOX_L = 30.0
BOX_ENERGY = np.pi**2 / 7200.0
BOX_DELTA_X = 30.0 * np.sqrt(1.0 / 3.0 - 2.0 / np.pi**2)

HO_ENERGY = 0.5
HO_DELTA_X = 1.0 / np.sqrt(2.0)
HO_PEAK = 1.0 / np.sqrt(np.pi)


@pytest.fixture(scope="session")
def paper_grid():
    return qal.Grid(30.0, 0.04)


@pytest.fixture(scope="session")
def box_result(paper_grid):
    """Relaxed V=0, g5=0 ground state on the default grid (the slow shared run)."""
    V = np.zeros(paper_grid.n_points)
    return qal.ground_state(V, qal.SolverParams(), paper_grid)


@pytest.fixture(scope="session")
def harmonic_result(paper_grid):
    V = 0.5 * paper_grid.x**2
    return qal.ground_state(V, qal.SolverParams(initial_sigma=2.0), paper_grid)


@pytest.fixture(scope="session")
def disordered_v5_g1(paper_grid):
    """Relaxed (V0=5, g5=1) state for one healthy realization."""
    pot = qal.make_potential(5.0, 300, 30.0, 42)
    V = qal.sample_on_grid(pot, paper_grid)
    return V, qal.ground_state(V, qal.SolverParams(g5=1.0), paper_grid)
