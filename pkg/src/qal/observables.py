"""Scalar diagnostics of a density profile."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateStateError, ParameterError
from .grid import WaveFunction, trapezoid_integrate

DEFAULT_FRAGMENTATION_THRESHOLD = 0.4  # ten grid spacings at the default mesh


@dataclass(frozen=True)
class Diagnostics:
    mean_x: float
    peak_x: float
    peak_height: float
    delta_x: float
    norm: float


def diagnostics(psi: WaveFunction) -> Diagnostics:
    """Mean position, peak position/height, and RMS width of |psi|^2.

    The peak is the global density maximum at grid resolution; ties go to the
    leftmost node.
    """
    rho = psi.density()
    grid = psi.grid
    nrm = trapezoid_integrate(rho, grid)
    if not np.isfinite(nrm) or nrm <= 0.0:
        raise DegenerateStateError("diagnostics of a zero-norm state")
    x = grid.x
    mean_x = trapezoid_integrate(x * rho, grid) / nrm
    mean_x2 = trapezoid_integrate(x * x * rho, grid) / nrm
    var = mean_x2 - mean_x * mean_x
    peak_idx = int(np.argmax(rho))
    return Diagnostics(
        mean_x=float(mean_x),
        peak_x=float(x[peak_idx]),
        peak_height=float(rho[peak_idx]),
        delta_x=float(np.sqrt(max(var, 0.0))),
        norm=float(nrm),
    )


def detect_fragmentation(diag: Diagnostics, threshold: float = DEFAULT_FRAGMENTATION_THRESHOLD) -> bool:
    """Flag a multi-peak state: mean and peak positions disagree by more than threshold."""
    if threshold <= 0:
        raise ParameterError("fragmentation threshold must be positive, got %r" % threshold)
    return abs(diag.peak_x - diag.mean_x) > threshold


def finite_difference(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Derivative of value against parameter on an irregular mesh.

    Centered differences at interior points, one-sided at the two ends.
    Parameters must be strictly increasing.
    """
    pts = list(points)
    if len(pts) < 2:
        raise ParameterError("finite_difference needs at least 2 points, got %d" % len(pts))
    p = np.asarray([q[0] for q in pts], dtype=float)
    v = np.asarray([q[1] for q in pts], dtype=float)
    if np.any(np.diff(p) <= 0):
        raise ParameterError("parameters must be strictly increasing")
    d = np.empty_like(v)
    d[0] = (v[1] - v[0]) / (p[1] - p[0])
    d[-1] = (v[-1] - v[-2]) / (p[-1] - p[-2])
    if len(pts) > 2:
        d[1:-1] = (v[2:] - v[:-2]) / (p[2:] - p[:-2])
    return [(float(pi), float(di)) for pi, di in zip(p, d)]
