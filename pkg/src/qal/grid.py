"""Uniform 1D mesh, complex field container, and quadrature primitives."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    ContractViolationError,
    DegenerateStateError,
    ParameterError,
)

NORM_TOLERANCE = 1e-12
MIN_POINTS = 16


@dataclass(frozen=True)
class Grid:
    """Equispaced mesh on [-half_width, +half_width], Dirichlet endpoints included.

    The point count is derived from (half_width, dx): callers can never build
    an inconsistent (L, dx, n) triple.  dx must tile the interval exactly.
    """

    half_width: float
    dx: float
    n_points: int = field(init=False, compare=False)
    x: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.half_width <= 0:
            raise ConfigurationError("half_width must be positive, got %r" % self.half_width)
        if self.dx <= 0:
            raise ConfigurationError("dx must be positive, got %r" % self.dx)
        ratio = 2.0 * self.half_width / self.dx
        n_cells = round(ratio)
        if abs(ratio - n_cells) > 1e-8 * max(1.0, ratio):
            raise ConfigurationError(
                "dx=%g does not tile [-L, L] with L=%g" % (self.dx, self.half_width)
            )
        n = n_cells + 1
        if n < MIN_POINTS:
            raise ConfigurationError("grid needs at least %d points, got %d" % (MIN_POINTS, n))
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "x", -self.half_width + np.arange(n) * self.dx)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n_points, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w


def trapezoid_integrate(values: np.ndarray, grid: Grid) -> float:
    """Trapezoidal-rule integral of samples over [-L, L]."""
    values = np.asarray(values)
    if values.shape != (grid.n_points,):
        raise ContractViolationError(
            "expected %d samples, got shape %r" % (grid.n_points, values.shape)
        )
    return float(values @ grid.trapezoid_weights())


@dataclass
class WaveFunction:
    """Complex field samples on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.n_points,):
            raise ContractViolationError(
                "values length %d does not match grid with %d points"
                % (self.values.size, self.grid.n_points)
            )

    def density(self) -> np.ndarray:
        return self.values.real**2 + self.values.imag**2

    def norm(self) -> float:
        """L2 norm squared, i.e. the integral of |psi|^2."""
        return trapezoid_integrate(self.density(), self.grid)

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.values.copy())


def normalize(psi: WaveFunction) -> WaveFunction:
    """Rescale to unit norm by a single positive real factor."""
    nrm2 = psi.norm()
    if not np.isfinite(nrm2) or nrm2 <= 0.0:
        raise DegenerateStateError("cannot normalize a state with norm^2 = %r" % nrm2)
    return WaveFunction(psi.grid, psi.values / np.sqrt(nrm2))


def gaussian_seed(grid: Grid, sigma: float) -> WaveFunction:
    """Unit-norm Gaussian exp(-x^2 / (2 sigma^2)) with exact zeros at the walls."""
    if sigma <= 0:
        raise ParameterError("gaussian width must be positive, got %r" % sigma)
    vals = np.exp(-grid.x**2 / (2.0 * sigma * sigma)).astype(np.complex128)
    vals[0] = vals[-1] = 0.0
    return normalize(WaveFunction(grid, vals))


DUMP_HEADER = "# x re im density"


def write_wavefunction(psi: WaveFunction, path, comment_lines=()) -> None:
    """Text dump, one node per row: x, Re psi, Im psi, |psi|^2 at 17 significant digits."""
    rho = psi.density()
    with open(path, "w") as fh:
        for line in comment_lines:
            fh.write("# %s\n" % line)
        fh.write(DUMP_HEADER + "\n")
        for xi, v, d in zip(psi.grid.x, psi.values, rho):
            fh.write("%.17g %.17g %.17g %.17g\n" % (xi, v.real, v.imag, d))


def read_wavefunction(path) -> WaveFunction:
    """Rebuild a WaveFunction (and its grid) from a dump written by write_wavefunction."""
    xs, res, ims = [], [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ConfigurationError("malformed dump row in %s: %r" % (path, line))
            xs.append(float(parts[0]))
            res.append(float(parts[1]))
            ims.append(float(parts[2]))
    if len(xs) < MIN_POINTS:
        raise ConfigurationError("dump %s holds %d rows; need at least %d" % (path, len(xs), MIN_POINTS))
    x = np.asarray(xs)
    dx = (x[-1] - x[0]) / (len(x) - 1)
    if dx <= 0 or not np.allclose(np.diff(x), dx, rtol=0, atol=1e-9 * max(dx, 1.0)):
        raise ConfigurationError("dump %s is not sampled on a uniform mesh" % path)
    half_width = 0.5 * (x[-1] - x[0])
    if abs(x[0] + half_width) > 1e-9:
        raise ConfigurationError("dump %s mesh is not centered on 0" % path)
    grid = Grid(float(half_width), float(dx))
    return WaveFunction(grid, np.asarray(res) + 1j * np.asarray(ims))
