"""Seed-reproducible piecewise-constant random-amplitude potentials.

The amplitude stream is splitmix64, implemented here bit-exactly so that any
other implementation of the same ten-line recurrence reproduces identical
potentials from identical seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ParameterError
from .grid import Grid

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64_stream(seed: int, count: int) -> np.ndarray:
    """First `count` uniform [0, 1) draws of the splitmix64 generator.

    Each draw advances the 64-bit state by the golden-ratio increment and
    applies the standard two-round xor-multiply finalizer; the top 53 bits
    become the mantissa of the returned double.
    """
    if count < 0:
        raise ParameterError("count must be nonnegative, got %d" % count)
    z = seed & _MASK64
    out = np.empty(count)
    for i in range(count):
        z = (z + _GOLDEN) & _MASK64
        t = z
        t = ((t ^ (t >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        t = ((t ^ (t >> 27)) * 0x94D049BB133111EB) & _MASK64
        t = t ^ (t >> 31)
        out[i] = (t >> 11) * 2.0**-53
    return out


@dataclass(frozen=True)
class RandomPotential:
    """V(x) = V0 * A_n on segment n, with S equal segments tiling [-L, L].

    Segments are half-open [start, end); the last one is closed at +L.
    Outside [-L, L] the potential is zero.
    """

    V0: float
    S: int
    L: float
    seed: int
    amplitudes: np.ndarray = field(repr=False, compare=False)

    def segment_of(self, x) -> np.ndarray:
        idx = np.floor((np.asarray(x, dtype=float) + self.L) * self.S / (2.0 * self.L))
        return np.clip(idx, 0, self.S - 1).astype(np.int64)

    def value_at(self, x):
        """Potential at arbitrary positions (0 outside [-L, L])."""
        x = np.asarray(x, dtype=float)
        inside = (x >= -self.L) & (x <= self.L)
        vals = np.where(inside, self.V0 * self.amplitudes[self.segment_of(x)], 0.0)
        return vals if vals.ndim else float(vals)


def make_potential(V0: float, S: int, L: float, seed: int) -> RandomPotential:
    """Draw the S segment amplitudes, in stream order, from the seeded PRNG."""
    if S < 1:
        raise ParameterError("segment count S must be >= 1, got %d" % S)
    if L <= 0:
        raise ParameterError("half-width L must be positive, got %r" % L)
    if V0 < 0:
        raise ParameterError("amplitude V0 must be nonnegative, got %r" % V0)
    if not 0 <= seed <= _MASK64:
        raise ParameterError("seed must fit in 64 unsigned bits, got %r" % seed)
    amps = splitmix64_stream(seed, S)
    amps.setflags(write=False)
    return RandomPotential(V0=float(V0), S=int(S), L=float(L), seed=int(seed), amplitudes=amps)


def sample_on_grid(pot: RandomPotential, grid: Grid) -> np.ndarray:
    """Potential values at every grid node.

    Node i sits at -L + i*dx, so its segment is floor(i*S/(n-1)) with the
    final node clamped to segment S-1.  Using integer arithmetic here keeps
    nodes that fall exactly on segment boundaries in the mathematically
    correct segment; the floating-point form of the same map can land one
    segment low at those nodes.
    """
    if pot.L != grid.half_width:
        raise ConfigurationError(
            "potential half-width %g does not match grid half-width %g"
            % (pot.L, grid.half_width)
        )
    seg = (np.arange(grid.n_points, dtype=np.int64) * pot.S) // (grid.n_points - 1)
    np.minimum(seg, pot.S - 1, out=seg)
    return pot.V0 * pot.amplitudes[seg]


def write_potential(pot: RandomPotential, grid: Grid, path, comment_lines=()) -> None:
    """Two-column `x V` text file for plotting a realization."""
    V = sample_on_grid(pot, grid)
    with open(path, "w") as fh:
        for line in comment_lines:
            fh.write("# %s\n" % line)
        fh.write("# x V\n")
        for xi, vi in zip(grid.x, V):
            fh.write("%.17g %.17g\n" % (xi, vi))
