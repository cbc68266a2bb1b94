import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

import qal
from qal.errors import NumericalBlowupError, ParameterError, SingularSystemError
from qal.propagation import relax_batch

from conftest import BOX_DELTA_X, BOX_ENERGY, HO_DELTA_X, HO_ENERGY, HO_PEAK


# ---------------------------------------------------------------------------
# tridiagonal solver
# ---------------------------------------------------------------------------


def test_thomas_identity():
    rhs = np.array([1.0, -2.0, 3.5, 0.25])
    got = qal.thomas_solve(np.zeros(3), np.ones(4), np.zeros(3), rhs)
    np.testing.assert_allclose(got, rhs, rtol=0, atol=0)


def test_thomas_against_dense_solver():
    lower = np.array([1.0, 1.0])
    diag = np.array([4.0, 4.0, 4.0])
    upper = np.array([1.0, 1.0])
    rhs = np.array([6.0, 12.0, 10.0])
    A = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
    np.testing.assert_allclose(
        qal.thomas_solve(lower, diag, upper, rhs), np.linalg.solve(A, rhs), rtol=1e-14
    )


def test_thomas_roundtrips_cn_kinetic_system(paper_grid):
    # scaled CN kinetic matrix: diag gamma+2, off-diagonals -1
    m = paper_grid.n_points - 2
    gamma = 4.0 * paper_grid.dx**2 / 0.001
    diag = np.full(m, gamma + 2.0)
    off = np.full(m - 1, -1.0)
    rng = np.random.default_rng(0)
    x_true = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    rhs = diag * x_true
    rhs[:-1] += off * x_true[1:]
    rhs[1:] += off * x_true[:-1]
    got = qal.thomas_solve(off, diag, off, rhs)
    np.testing.assert_allclose(got, x_true, rtol=0, atol=1e-12)


def test_thomas_zero_pivot():
    with pytest.raises(SingularSystemError):
        qal.thomas_solve(np.array([1.0]), np.array([0.0, 1.0]), np.array([1.0]), np.array([1.0, 1.0]))


def test_internal_kinetic_solve_matches_thomas(paper_grid):
    from qal.propagation import _kinetic_solver

    solver = _kinetic_solver(paper_grid, 0.001, "real")
    m = paper_grid.n_points - 2
    rng = np.random.default_rng(1)
    rhs = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    got = solver.solve(rhs)
    diag = np.full(m, solver.gamma + 2.0)
    off = np.full(m - 1, -1.0)
    ref = qal.thomas_solve(off, diag, off, rhs)
    np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------


def _discrete_box_mode(grid, mode=1):
    # eigenvector of the discrete Dirichlet Laplacian, exact for the CN kinetic step
    i = np.arange(grid.n_points)
    vals = np.sin(mode * np.pi * i / (grid.n_points - 1)).astype(np.complex128)
    vals[0] = vals[-1] = 0.0
    return qal.normalize(qal.WaveFunction(grid, vals))


def test_real_step_keeps_box_eigenstate_density(paper_grid):
    psi = _discrete_box_mode(paper_grid)
    V = np.zeros(paper_grid.n_points)
    params = qal.SolverParams(mode="real")
    stepped = qal.step(psi, V, params)
    np.testing.assert_allclose(stepped.density(), psi.density(), rtol=0, atol=1e-8)


def test_real_step_conserves_norm(paper_grid):
    rng = np.random.default_rng(5)
    vals = rng.standard_normal(1501) + 1j * rng.standard_normal(1501)
    vals[0] = vals[-1] = 0.0
    psi = qal.normalize(qal.WaveFunction(paper_grid, vals))
    pot = qal.make_potential(2.0, 300, 30.0, 3)
    V = qal.sample_on_grid(pot, paper_grid)
    stepped = qal.step(psi, V, qal.SolverParams(mode="real", g5=1.0))
    assert stepped.norm() == pytest.approx(psi.norm(), abs=1e-10)


def test_step_requires_zero_boundaries(paper_grid):
    vals = np.ones(1501, dtype=np.complex128)
    psi = qal.WaveFunction(paper_grid, vals)
    with pytest.raises(qal.ContractViolationError):
        qal.step(psi, np.zeros(1501), qal.SolverParams(mode="real"))


def test_imaginary_public_step_matches_relax_kernel(paper_grid):
    pot = qal.make_potential(5.0, 300, 30.0, 42)
    V = qal.sample_on_grid(pot, paper_grid)
    params = qal.SolverParams(g5=1.0, max_steps=10)
    res = relax_batch(V[None, :], params, paper_grid)
    psi = qal.gaussian_seed(paper_grid, params.initial_sigma)
    for _ in range(10):
        psi = qal.step(psi, V, params)
    np.testing.assert_allclose(psi.values.real, res.psi[0], rtol=0, atol=1e-13)
    np.testing.assert_allclose(psi.values.imag, 0.0, rtol=0, atol=0)


def test_free_gaussian_spreading(paper_grid):
    # analytic width of a freely spreading Gaussian: (s0/sqrt2) sqrt(1 + t^2/s0^4)
    psi = qal.gaussian_seed(paper_grid, 1.0)
    out = qal.evolve_real(psi, np.zeros(1501), qal.SolverParams(mode="real"), t_final=1.0)
    d = qal.diagnostics(out)
    assert d.delta_x == pytest.approx(1.0, rel=5e-3)


def test_real_norm_drift_over_1000_steps(paper_grid, harmonic_result):
    V = 0.5 * paper_grid.x**2
    out = qal.evolve_real(harmonic_result.psi, V, qal.SolverParams(mode="real"), t_final=1.0)
    assert abs(out.norm() - 1.0) < 1e-8


def test_relaxed_harmonic_state_is_stationary(paper_grid, harmonic_result):
    V = 0.5 * paper_grid.x**2
    out = qal.evolve_real(harmonic_result.psi, V, qal.SolverParams(mode="real"), t_final=1.0)
    dev = np.max(np.abs(out.density() - harmonic_result.psi.density()))
    assert dev < 1e-4


def test_evolve_real_mode_guard(paper_grid):
    psi = qal.gaussian_seed(paper_grid, 1.0)
    with pytest.raises(ParameterError):
        qal.evolve_real(psi, np.zeros(1501), qal.SolverParams(mode="imaginary"), 1.0)


# ---------------------------------------------------------------------------
# ground-state relaxation
# ---------------------------------------------------------------------------


def test_box_ground_state_oracle(box_result):
    assert box_result.converged
    assert box_result.energy == pytest.approx(BOX_ENERGY, rel=5e-3)
    d = qal.diagnostics(box_result.psi)
    assert d.delta_x == pytest.approx(BOX_DELTA_X, rel=1e-2)


def test_harmonic_ground_state_oracle(harmonic_result):
    assert harmonic_result.converged
    assert harmonic_result.energy == pytest.approx(HO_ENERGY, rel=5e-3)
    d = qal.diagnostics(harmonic_result.psi)
    assert d.delta_x == pytest.approx(HO_DELTA_X, rel=1e-2)
    assert d.peak_height == pytest.approx(HO_PEAK, rel=1e-2)


def test_imaginary_energy_monotone_per_step(paper_grid):
    V = 0.5 * paper_grid.x**2
    psi = qal.gaussian_seed(paper_grid, 2.0)
    params = qal.SolverParams()
    E_prev, _ = qal.energies(psi, V, 0.0)
    for _ in range(300):
        psi = qal.step(psi, V, params)
        E, _ = qal.energies(psi, V, 0.0)
        assert E <= E_prev + 1e-10
        E_prev = E


def test_imaginary_energy_monotone_disordered_quintic(paper_grid, disordered_v5_g1):
    V, _ = disordered_v5_g1
    psi = qal.gaussian_seed(paper_grid, 1.0)
    params = qal.SolverParams(g5=1.0)
    E_prev, _ = qal.energies(psi, V, 1.0)
    for _ in range(300):
        psi = qal.step(psi, V, params)
        E, _ = qal.energies(psi, V, 1.0)
        assert E <= E_prev + 1e-10
        E_prev = E


def test_chemical_potential_at_least_energy(disordered_v5_g1):
    _, res = disordered_v5_g1
    assert res.chemical_potential >= res.energy
    # with g5 = 0 the two coincide
    V = np.zeros(res.psi.grid.n_points)
    E, mu = qal.energies(res.psi, V, 0.0)
    assert mu == pytest.approx(E, rel=1e-14)


def test_relaxed_disordered_state_is_stationary(disordered_v5_g1):
    V, res = disordered_v5_g1
    d0 = qal.diagnostics(res.psi)
    out = qal.evolve_real(res.psi, V, qal.SolverParams(mode="real", g5=1.0), t_final=5.0)
    d5 = qal.diagnostics(out)
    assert abs(d5.delta_x - d0.delta_x) / d0.delta_x < 0.02


def test_nonconvergence_reports_flag(paper_grid):
    V = np.zeros(paper_grid.n_points)
    res = qal.ground_state(V, qal.SolverParams(max_steps=200), paper_grid)
    assert not res.converged
    assert res.steps_taken == 200


def test_blowup_raises_with_step_index(paper_grid):
    V = np.full(paper_grid.n_points, -1e6)
    with np.errstate(over="ignore"):
        with pytest.raises(NumericalBlowupError) as err:
            qal.ground_state(V, qal.SolverParams(max_steps=1000), paper_grid)
    assert err.value.step is not None and err.value.step >= 1


def test_ground_state_rejects_real_mode(paper_grid):
    with pytest.raises(ParameterError):
        qal.ground_state(np.zeros(1501), qal.SolverParams(mode="real"), paper_grid)


def test_ground_state_insensitive_to_seed_width(paper_grid):
    pot = qal.make_potential(5.0, 300, 30.0, 42)
    V = qal.sample_on_grid(pot, paper_grid)
    widths = []
    energies = []
    for sigma in (0.5, 1.0, 5.0):
        res = qal.ground_state(V, qal.SolverParams(initial_sigma=sigma), paper_grid)
        widths.append(qal.diagnostics(res.psi).delta_x)
        energies.append(res.energy)
    assert max(widths) - min(widths) < 1e-3
    assert max(energies) - min(energies) < 1e-6


def test_second_order_dt_convergence(paper_grid):
    # halving dt cuts the splitting-induced energy shift by ~4 (clean O(dt^2));
    # measured on a disordered realization where the kinetic/local commutator
    # is large, via Richardson differences of the converged energy
    pot = qal.make_potential(5.0, 300, 30.0, 12)
    V = qal.sample_on_grid(pot, paper_grid)
    E = {}
    for dt in (0.004, 0.002, 0.001):
        E[dt] = qal.ground_state(V, qal.SolverParams(dt=dt, energy_tol=1e-12), paper_grid).energy
    ratio = (E[0.004] - E[0.002]) / (E[0.002] - E[0.001])
    assert 3.0 <= ratio <= 5.0


def test_linear_disordered_ground_matches_eigensolver(paper_grid):
    # dense symmetric tridiagonal eigenproblem as the independent oracle
    off = np.full(paper_grid.n_points - 3, -0.5 / paper_grid.dx**2)
    for V0 in (1.0, 5.0):
        pot = qal.make_potential(V0, 300, 30.0, 12)
        V = qal.sample_on_grid(pot, paper_grid)
        res = qal.ground_state(V, qal.SolverParams(energy_tol=1e-12), paper_grid)
        ev, evec = eigh_tridiagonal(
            1.0 / paper_grid.dx**2 + V[1:-1], off, select="i", select_range=(0, 0)
        )
        ps = np.zeros(paper_grid.n_points)
        ps[1:-1] = evec[:, 0]
        ref = qal.diagnostics(qal.normalize(qal.WaveFunction(paper_grid, ps)))
        got = qal.diagnostics(res.psi)
        assert abs(got.delta_x - ref.delta_x) < 1e-3


def test_batched_relaxation_matches_standalone(paper_grid):
    seeds = (3, 5, 12)
    V = np.stack([
        qal.sample_on_grid(qal.make_potential(5.0, 300, 30.0, s), paper_grid) for s in seeds
    ])
    params = qal.SolverParams(g5=1.0)
    batch = relax_batch(V, params, paper_grid)
    for j in range(len(seeds)):
        single = relax_batch(V[j : j + 1], params, paper_grid)
        np.testing.assert_array_equal(batch.psi[j], single.psi[0])
        assert batch.energy[j] == single.energy[0]
        assert batch.steps[j] == single.steps[0]
        assert batch.converged[j] == single.converged[0]


def test_solver_params_validation():
    with pytest.raises(ParameterError):
        qal.SolverParams(dt=0.0)
    with pytest.raises(ParameterError):
        qal.SolverParams(g5=-1.0)
    with pytest.raises(ParameterError):
        qal.SolverParams(mode="sideways")
    with pytest.raises(ParameterError):
        qal.SolverParams(energy_tol=0.0)
