"""Split-step Crank-Nicolson evolution of the quintic NLSE.

One step is Strang-ordered: half-step of the local term (potential plus
quintic nonlinearity), one Crank-Nicolson step of the kinetic term via a
tridiagonal solve, then the second local half-step using the post-kinetic
density.  Imaginary-time stepping renormalizes after each step and relaxes a
Gaussian seed to the ground state.

The kinetic CN system is written in scaled form with real off-diagonals:

    -psi'_{j-1} + (gamma + 2) psi'_j - psi'_{j+1}
        = psi_{j-1} + (gamma - 2) psi_j + psi_{j+1}

with gamma = 4 dx^2 / dt in imaginary time and gamma = -4i dx^2 / dt in real
time.  Homogeneous Dirichlet walls keep the system tridiagonal; boundary
nodes stay exactly zero.

Ground-state relaxation runs in pure float64 (the seed is real and every
imaginary-time operator is real) through a numba kernel that fuses the local
phases, the Thomas recurrence, and the per-step renormalization.  The kernel
treats each ensemble column independently, so relaxing k disorder
realizations in one batch is bit-identical to k standalone runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.linalg.lapack import zgttrf, zgttrs

from .errors import (
    ContractViolationError,
    DegenerateStateError,
    NumericalBlowupError,
    ParameterError,
    SingularSystemError,
)
from .grid import Grid, WaveFunction

CHECK_INTERVAL = 10  # steps between energy-based convergence checks


@dataclass(frozen=True)
class SolverParams:
    dt: float = 0.001
    g5: float = 0.0
    mode: str = "imaginary"  # "imaginary" | "real"
    max_steps: int = 2_000_000
    energy_tol: float = 1e-10
    initial_sigma: float = 1.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ParameterError("dt must be positive, got %r" % self.dt)
        if self.g5 < 0:
            raise ParameterError("g5 must be nonnegative (defocusing), got %r" % self.g5)
        if self.mode not in ("imaginary", "real"):
            raise ParameterError("mode must be 'imaginary' or 'real', got %r" % self.mode)
        if self.max_steps < 1:
            raise ParameterError("max_steps must be >= 1, got %r" % self.max_steps)
        if self.energy_tol <= 0:
            raise ParameterError("energy_tol must be positive, got %r" % self.energy_tol)
        if self.initial_sigma <= 0:
            raise ParameterError("initial_sigma must be positive, got %r" % self.initial_sigma)


@dataclass(frozen=True)
class GroundStateResult:
    psi: WaveFunction
    energy: float
    chemical_potential: float
    steps_taken: int
    converged: bool


def thomas_solve(lower, diag, upper, rhs):
    """Solve a tridiagonal system by forward elimination and back substitution.

    lower/upper hold the n-1 off-diagonal entries, diag and rhs the n main
    entries.  O(n); raises SingularSystemError on a zero pivot.
    """
    lower = np.asarray(lower)
    upper = np.asarray(upper)
    diag = np.asarray(diag)
    rhs = np.asarray(rhs)
    n = diag.size
    if rhs.size != n or lower.size != n - 1 or upper.size != n - 1:
        raise ContractViolationError(
            "tridiagonal sizes inconsistent: lower %d, diag %d, upper %d, rhs %d"
            % (lower.size, n, upper.size, rhs.size)
        )
    dtype = np.result_type(lower, diag, upper, rhs, np.float64)
    cp = np.empty(n - 1, dtype=dtype)
    dp = np.empty(n, dtype=dtype)
    piv = diag[0]
    if piv == 0:
        raise SingularSystemError("zero pivot at row 0")
    cp[0] = upper[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i - 1] * cp[i - 1]
        if piv == 0:
            raise SingularSystemError("zero pivot at row %d" % i)
        if i < n - 1:
            cp[i] = upper[i] / piv
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / piv
    x = np.empty(n, dtype=dtype)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


# ---------------------------------------------------------------------------
# imaginary-time relaxation kernel (real arithmetic, fused hot loop)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _relax_chunk(psi, expV, cg5, nonlinear, a, inv_den, w, dp, step0, nsteps, blow):
    """Advance every live column of `psi` by `nsteps` imaginary-time steps.

    psi, expV: (k, n).  inv_den holds the precomputed Thomas denominators for
    the constant kinetic matrix (diag a = gamma + 2, off-diagonals -1).
    cg5 = -(dt/2) g5.  Columns whose norm turns nonfinite record their step
    index in `blow` and freeze.
    """
    k, n = psi.shape
    m = n - 2
    for t in range(nsteps):
        for j in range(k):
            if blow[j] >= 0:
                continue
            p = psi[j]
            eV = expV[j]
            if nonlinear:
                for i in range(n):
                    r = p[i] * p[i]
                    u = cg5 * r * r
                    if u > -0.02:
                        e = 1.0 + u * (1.0 + u * (0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u * (1.0 / 120.0)))))
                    else:
                        e = math.exp(u)
                    p[i] = p[i] * eV[i] * e
            else:
                for i in range(n):
                    p[i] = p[i] * eV[i]
            # Crank-Nicolson kinetic step: Thomas forward sweep then back substitution
            dp[0] = (p[0] + (a - 4.0) * p[1] + p[2]) * inv_den[0]
            for i in range(1, m):
                b = p[i] + (a - 4.0) * p[i + 1] + p[i + 2]
                dp[i] = (b + dp[i - 1]) * inv_den[i]
            p[m] = dp[m - 1]
            for i in range(m - 2, -1, -1):
                dp[i] = dp[i] + inv_den[i] * dp[i + 1]
                p[i + 1] = dp[i]
            if nonlinear:
                for i in range(n):
                    r = p[i] * p[i]
                    u = cg5 * r * r
                    if u > -0.02:
                        e = 1.0 + u * (1.0 + u * (0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u * (1.0 / 120.0)))))
                    else:
                        e = math.exp(u)
                    p[i] = p[i] * eV[i] * e
            else:
                for i in range(n):
                    p[i] = p[i] * eV[i]
            s = 0.0
            for i in range(n):
                s += w[i] * p[i] * p[i]
            if not (s > 0.0 and np.isfinite(s)):
                blow[j] = step0 + t + 1
                continue
            inv = 1.0 / np.sqrt(s)
            for i in range(n):
                p[i] = p[i] * inv


def _thomas_inv_denominators(a: float, m: int) -> np.ndarray:
    inv_den = np.empty(m)
    inv_den[0] = 1.0 / a
    for i in range(1, m):
        inv_den[i] = 1.0 / (a - inv_den[i - 1])
    return inv_den


def _row_energies(psi, V, g5, dx, w):
    """Energy functional per row: int( |psi_x|^2/2 + V rho + (g5/3) rho^3 ) dx.

    psi_x is the centered finite difference (one-sided at the walls).
    """
    dpsi = np.empty_like(psi)
    dpsi[:, 1:-1] = (psi[:, 2:] - psi[:, :-2]) * (0.5 / dx)
    dpsi[:, 0] = (psi[:, 1] - psi[:, 0]) * (1.0 / dx)
    dpsi[:, -1] = (psi[:, -1] - psi[:, -2]) * (1.0 / dx)
    rho = psi * psi
    rho3 = rho * rho * rho
    integrand = 0.5 * dpsi * dpsi + V * rho + (g5 / 3.0) * rho3
    return (integrand * w).sum(axis=1)


@dataclass
class BatchRelaxResult:
    psi: np.ndarray        # (k, n) float64, unit norm rows (or last state on blowup)
    energy: np.ndarray     # (k,)
    chemical_potential: np.ndarray
    steps: np.ndarray      # (k,) int64
    converged: np.ndarray  # (k,) bool
    blowup_step: np.ndarray  # (k,) int64, -1 if none


def relax_batch(V: np.ndarray, params: SolverParams, grid: Grid) -> BatchRelaxResult:
    """Relax one Gaussian seed per row of V to the ground state.

    Rows are independent realizations sharing (dt, g5, sigma0); results are
    bit-identical to relaxing each row on its own.  Convergence is declared
    when the relative energy change between checks (every CHECK_INTERVAL
    steps) drops to energy_tol.
    """
    if params.mode != "imaginary":
        raise ParameterError("relaxation requires imaginary-time mode")
    V = np.ascontiguousarray(np.atleast_2d(np.asarray(V, dtype=np.float64)))
    k, n = V.shape
    if n != grid.n_points:
        raise ContractViolationError(
            "potential has %d samples per row; grid has %d nodes" % (n, grid.n_points)
        )
    dt, g5 = params.dt, params.g5
    dx = grid.dx
    w = grid.trapezoid_weights()
    gamma = 4.0 * dx * dx / dt
    a = gamma + 2.0
    inv_den = _thomas_inv_denominators(a, n - 2)
    dp = np.empty(n - 2)

    seed_row = np.exp(-grid.x**2 / (2.0 * params.initial_sigma**2))
    seed_row[0] = seed_row[-1] = 0.0
    psi = np.tile(seed_row, (k, 1))
    psi /= np.sqrt((psi * psi * w).sum(axis=1))[:, None]
    with np.errstate(over="ignore"):
        expV = np.exp(-0.5 * dt * V)
    cg5 = -0.5 * dt * g5
    nonlinear = g5 != 0.0

    out_psi = np.empty_like(psi)
    out_E = np.full(k, np.nan)
    out_steps = np.zeros(k, dtype=np.int64)
    out_conv = np.zeros(k, dtype=bool)
    out_blow = np.full(k, -1, dtype=np.int64)

    cols = np.arange(k)
    V_act = V
    E_prev = np.full(k, np.inf)
    steps_done = 0
    while steps_done < params.max_steps and cols.size > 0:
        nsteps = min(CHECK_INTERVAL, params.max_steps - steps_done)
        blow = np.full(psi.shape[0], -1, dtype=np.int64)
        _relax_chunk(psi, expV, cg5, nonlinear, a, inv_den, w, dp, steps_done, nsteps, blow)
        steps_done += nsteps
        with np.errstate(invalid="ignore", over="ignore"):
            E = _row_energies(psi, V_act, g5, dx, w)
        blown = blow >= 0
        conv = np.zeros(E.shape, dtype=bool)
        ok = ~blown
        conv[ok] = np.abs(E[ok] - E_prev[ok]) <= params.energy_tol * np.abs(E[ok])
        conv[ok] &= np.isfinite(E[ok])
        capped = steps_done >= params.max_steps
        retire = blown | conv | capped
        if retire.any():
            for local in np.flatnonzero(retire):
                col = cols[local]
                out_psi[col] = psi[local]
                out_E[col] = E[local]
                out_steps[col] = blow[local] if blown[local] else steps_done
                out_conv[col] = bool(conv[local])
                out_blow[col] = blow[local]
            keep = ~retire
            psi = np.ascontiguousarray(psi[keep])
            expV = np.ascontiguousarray(expV[keep])
            V_act = np.ascontiguousarray(V_act[keep])
            cols = cols[keep]
            E_prev = E[keep]
        else:
            E_prev = E
    with np.errstate(invalid="ignore", over="ignore"):
        rho = out_psi * out_psi
        rho3 = rho * rho * rho
        mu = out_E + (2.0 * g5 / 3.0) * (rho3 * w).sum(axis=1)
    mu[out_blow >= 0] = np.nan
    return BatchRelaxResult(
        psi=out_psi,
        energy=out_E,
        chemical_potential=mu,
        steps=out_steps,
        converged=out_conv,
        blowup_step=out_blow,
    )


def ground_state(V: np.ndarray, params: SolverParams, grid: Grid) -> GroundStateResult:
    """Imaginary-time relaxation of a Gaussian seed to the ground state."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 1:
        raise ContractViolationError("ground_state expects a 1D potential")
    res = relax_batch(V[None, :], params, grid)
    if res.blowup_step[0] >= 0:
        raise NumericalBlowupError(
            "nonfinite norm during relaxation at step %d" % res.blowup_step[0],
            step=int(res.blowup_step[0]),
        )
    psi = WaveFunction(grid, res.psi[0].astype(np.complex128))
    return GroundStateResult(
        psi=psi,
        energy=float(res.energy[0]),
        chemical_potential=float(res.chemical_potential[0]),
        steps_taken=int(res.steps[0]),
        converged=bool(res.converged[0]),
    )


# ---------------------------------------------------------------------------
# generic complex stepping (real time, and single imaginary steps)
# ---------------------------------------------------------------------------


class _KineticCN:
    """Factorized Crank-Nicolson kinetic solve for one (grid, dt, mode)."""

    def __init__(self, grid: Grid, dt: float, mode: str):
        dx = grid.dx
        if mode == "imaginary":
            self.gamma = complex(4.0 * dx * dx / dt)
        else:
            self.gamma = -4.0j * dx * dx / dt
        m = grid.n_points - 2
        diag = np.full(m, self.gamma + 2.0, dtype=np.complex128)
        off = np.full(m - 1, -1.0, dtype=np.complex128)
        dl, d, du, du2, ipiv, info = zgttrf(off, diag, off)
        if info != 0:
            raise SingularSystemError("kinetic CN factorization failed (info=%d)" % info)
        self._factors = (dl, d, du, du2, ipiv)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        dl, d, du, du2, ipiv = self._factors
        x, info = zgttrs(dl, d, du, du2, ipiv, rhs)
        if info != 0:
            raise SingularSystemError("kinetic CN solve failed (info=%d)" % info)
        return x


_cn_cache: dict = {}


def _kinetic_solver(grid: Grid, dt: float, mode: str) -> _KineticCN:
    key = (grid.n_points, grid.dx, dt, mode)
    solver = _cn_cache.get(key)
    if solver is None:
        solver = _cn_cache[key] = _KineticCN(grid, dt, mode)
    return solver


def _step_values(vals, V, params: SolverParams, grid: Grid, solver: _KineticCN):
    dt, g5 = params.dt, params.g5
    coeff = -0.5 * dt if params.mode == "imaginary" else -0.5j * dt
    rho = vals.real**2 + vals.imag**2
    vals = vals * np.exp(coeff * (V + g5 * rho * rho))
    gamma = solver.gamma
    rhs = vals[:-2] + (gamma - 2.0) * vals[1:-1] + vals[2:]
    vals[1:-1] = solver.solve(rhs)
    rho = vals.real**2 + vals.imag**2
    vals = vals * np.exp(coeff * (V + g5 * rho * rho))
    if params.mode == "imaginary":
        w = grid.trapezoid_weights()
        nrm2 = float((vals.real**2 + vals.imag**2) @ w)
        if not (nrm2 > 0.0 and np.isfinite(nrm2)):
            return vals, nrm2
        vals = vals / np.sqrt(nrm2)
    return vals, None


def _check_step_input(psi: WaveFunction, V: np.ndarray):
    V = np.asarray(V, dtype=np.float64)
    if V.shape != (psi.grid.n_points,):
        raise ContractViolationError(
            "potential has %d samples; grid has %d nodes" % (V.size, psi.grid.n_points)
        )
    if psi.values[0] != 0 or psi.values[-1] != 0:
        raise ContractViolationError("Dirichlet stepping requires zero boundary values")
    return V


def step(psi: WaveFunction, V: np.ndarray, params: SolverParams) -> WaveFunction:
    """One Strang-split Crank-Nicolson step; renormalizes in imaginary mode."""
    V = _check_step_input(psi, V)
    solver = _kinetic_solver(psi.grid, params.dt, params.mode)
    vals, bad = _step_values(psi.values.copy(), V, params, psi.grid, solver)
    if bad is not None:
        raise NumericalBlowupError("nonfinite norm after step (norm^2=%r)" % bad, step=1)
    if not np.all(np.isfinite(vals.view(np.float64))):
        raise NumericalBlowupError("nonfinite amplitude after step", step=1)
    return WaveFunction(psi.grid, vals)


def evolve_real(psi: WaveFunction, V: np.ndarray, params: SolverParams, t_final: float) -> WaveFunction:
    """Real-time propagation over ceil(t_final / dt) steps."""
    if params.mode != "real":
        raise ParameterError("evolve_real requires real-time mode")
    if t_final <= 0:
        raise ParameterError("t_final must be positive, got %r" % t_final)
    V = _check_step_input(psi, V)
    solver = _kinetic_solver(psi.grid, params.dt, "real")
    n_steps = int(math.ceil(t_final / params.dt - 1e-12))
    vals = psi.values.copy()
    w = psi.grid.trapezoid_weights()
    for s in range(1, n_steps + 1):
        vals, _ = _step_values(vals, V, params, psi.grid, solver)
        nrm2 = float((vals.real**2 + vals.imag**2) @ w)
        if not (nrm2 > 0.0 and np.isfinite(nrm2)):
            raise NumericalBlowupError("nonfinite norm at step %d" % s, step=s)
    return WaveFunction(psi.grid, vals)


def energies(psi: WaveFunction, V: np.ndarray, g5: float) -> tuple[float, float]:
    """Energy E and chemical potential mu of a state.

    E weights the quintic term by g5/3 (the functional whose stationarity
    condition is the quintic NLSE); mu weights it by g5.
    """
    V = np.asarray(V, dtype=np.float64)
    if V.shape != (psi.grid.n_points,):
        raise ContractViolationError("potential does not match grid")
    nrm2 = psi.norm()
    if not nrm2 > 0:
        raise DegenerateStateError("zero-norm state has no defined energy")
    w = psi.grid.trapezoid_weights()
    dpsi = np.gradient(psi.values, psi.grid.dx)
    kin = 0.5 * (dpsi.real**2 + dpsi.imag**2)
    rho = psi.density()
    rho3 = rho * rho * rho
    E = float(((kin + V * rho + (g5 / 3.0) * rho3) * w).sum())
    mu = E + float((2.0 * g5 / 3.0) * (rho3 * w).sum())
    return E, mu
