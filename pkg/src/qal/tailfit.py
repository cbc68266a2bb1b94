"""Exponential and Gaussian tail fits of a density profile.

The exponential model is rho = N exp(-2|x - x_p| / l), fitted per side of the
peak by linear least squares on ln(rho) against |x - x_p| inside a window of
the peak height.  The Gaussian model rho = A exp(-(x - x_p)^2 / sigma^2) is
fitted once on both sides pooled.  A state counts as localized when both tail
lengths exceed its RMS width.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ClassificationUnavailableError, ParameterError
from .grid import WaveFunction
from .observables import Diagnostics

DEFAULT_WINDOW = (0.5, 1e-4)  # fractions of the peak height (high, low)
MIN_SIDE_NODES = 8

STATUS_OK = "ok"
STATUS_TOO_FEW = "insufficient-data"
STATUS_NOT_DECAYING = "non-decaying"

REGIME_EXPONENTIAL = "exponential-localized"
REGIME_GAUSSIAN = "gaussian-localized"
REGIME_EXTENDED = "extended"


@dataclass(frozen=True)
class TailFit:
    l_left: float | None
    l_right: float | None
    amp_left: float | None
    amp_right: float | None
    r2_exp_left: float | None
    r2_exp_right: float | None
    sigma_gauss: float | None
    r2_gauss: float | None
    localized: bool
    status_left: str
    status_right: str

    def side_ok(self, side: str) -> bool:
        return (self.status_left if side == "left" else self.status_right) == STATUS_OK


def _linear_fit(u: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope, intercept, and r^2 of y against u."""
    ubar = u.mean()
    ybar = y.mean()
    du = u - ubar
    dy = y - ybar
    suu = float(du @ du)
    slope = float(du @ dy) / suu
    intercept = ybar - slope * ubar
    resid = dy - slope * du
    ss_res = float(resid @ resid)
    ss_tot = float(dy @ dy)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def fit_tails(psi: WaveFunction, diag: Diagnostics, window: tuple[float, float] = DEFAULT_WINDOW) -> TailFit:
    """Fit both tails of |psi|^2 and classify localization against delta_x.

    window = (f_hi, f_lo): nodes enter a side's fit when their density lies in
    [f_lo * peak, f_hi * peak].  Sides fail independently (too few nodes, or a
    non-decaying fitted slope); failures are recorded in the per-side status
    rather than raised, so ensemble sweeps can log them.
    """
    f_hi, f_lo = window
    if not (0.0 < f_lo < f_hi <= 1.0):
        raise ParameterError("window must satisfy 0 < f_lo < f_hi <= 1, got %r" % (window,))
    rho = psi.density()
    x = psi.grid.x
    peak = diag.peak_height
    if not peak > 0:
        raise ParameterError("density has no positive peak")
    x_p = diag.peak_x

    lo, hi = f_lo * peak, f_hi * peak
    usable = (rho > 0.0) & (rho >= lo) & (rho <= hi)

    results = {}
    pooled_u2, pooled_y = [], []
    for side, mask_side in (("left", x < x_p), ("right", x > x_p)):
        sel = usable & mask_side
        count = int(sel.sum())
        if count == 0:
            results[side] = (None, None, None, STATUS_TOO_FEW)
            continue
        u = np.abs(x[sel] - x_p)
        y = np.log(rho[sel])
        pooled_u2.append(u * u)
        pooled_y.append(y)
        if count < MIN_SIDE_NODES:
            results[side] = (None, None, None, STATUS_TOO_FEW)
            continue
        slope, intercept, r2 = _linear_fit(u, y)
        if slope >= 0.0:
            results[side] = (None, None, None, STATUS_NOT_DECAYING)
            continue
        results[side] = (-2.0 / slope, float(np.exp(intercept)), r2, STATUS_OK)

    sigma_gauss = r2_gauss = None
    if pooled_u2:
        u2 = np.concatenate(pooled_u2)
        y = np.concatenate(pooled_y)
        if u2.size >= MIN_SIDE_NODES:
            slope_g, _, r2g = _linear_fit(u2, y)
            if slope_g < 0.0:
                sigma_gauss = float(np.sqrt(-1.0 / slope_g))
                r2_gauss = r2g

    l_left, amp_left, r2_left, status_left = results["left"]
    l_right, amp_right, r2_right, status_right = results["right"]
    localized = (
        status_left == STATUS_OK
        and status_right == STATUS_OK
        and min(l_left, l_right) > diag.delta_x
    )
    return TailFit(
        l_left=l_left,
        l_right=l_right,
        amp_left=amp_left,
        amp_right=amp_right,
        r2_exp_left=r2_left,
        r2_exp_right=r2_right,
        sigma_gauss=sigma_gauss,
        r2_gauss=r2_gauss,
        localized=localized,
        status_left=status_left,
        status_right=status_right,
    )


def classify_regime(fit: TailFit, diag: Diagnostics) -> str:
    """Label a fitted state: exponential-localized, gaussian-localized, or extended."""
    left_ok = fit.side_ok("left")
    right_ok = fit.side_ok("right")
    if not (left_ok or right_ok):
        raise ClassificationUnavailableError(
            "tail fits failed on both sides (left: %s, right: %s)"
            % (fit.status_left, fit.status_right)
        )
    r2g = fit.r2_gauss if fit.r2_gauss is not None else -np.inf
    if fit.localized:
        if fit.r2_exp_left >= r2g and fit.r2_exp_right >= r2g:
            return REGIME_EXPONENTIAL
        if r2g > fit.r2_exp_left and r2g > fit.r2_exp_right:
            return REGIME_GAUSSIAN
    return REGIME_EXTENDED
