"""Parameter scans over g5, V0, S and disorder seeds, with ensemble statistics.

All seeds of one sweep value relax together in a single batch (columns are
independent, so rows do not depend on the grouping), and values distribute
over a process pool capped by QAL_WORKERS.  Rows are emitted in (value, seed)
order whatever the execution schedule, so repeated runs of the same spec
produce byte-identical CSV files.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .disorder import make_potential, sample_on_grid
from .errors import ClassificationUnavailableError, ParameterError
from .grid import Grid, WaveFunction
from .observables import Diagnostics, diagnostics
from .propagation import SolverParams, relax_batch
from .tailfit import TailFit, classify_regime, fit_tails

SWEEP_VARIABLES = ("g5", "V0", "S")

ROWS_HEADER = (
    "variable,g5,V0,S,seed,converged,steps,mean_x,peak_x,peak_height,delta_x,"
    "l_left,l_right,r2_exp_left,r2_exp_right,sigma_gauss,r2_gauss,localized,regime,status"
)
AGG_HEADER = (
    "variable,value,n_rows,n_l_left,n_l_right,delta_x_median,delta_x_iqr,"
    "l_left_median,l_left_iqr,l_right_median,l_right_iqr,peak_height_median,peak_height_iqr"
)

STATUS_OK = "ok"
STATUS_BLOWUP = "blowup"


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    seeds: tuple
    g5: float = 0.0
    V0: float = 1.0
    S: int = 300
    L: float = 30.0
    dx: float = 0.04
    dt: float = 0.001
    sigma0: float = 1.0
    energy_tol: float = 1e-10
    max_steps: int = 2_000_000
    f_hi: float = 0.5
    f_lo: float = 1e-4
    run_budget: int = 10_000

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ParameterError("sweep variable must be one of %r, got %r" % (SWEEP_VARIABLES, self.variable))
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ParameterError("sweep needs at least one value")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ParameterError("sweep values must be strictly increasing")
        if self.variable == "S" and any(v != int(v) or v < 1 for v in vals):
            raise ParameterError("S sweep values must be positive integers")
        if not self.seeds:
            raise ParameterError("sweep needs at least one seed")
        total = len(vals) * len(self.seeds)
        if total > self.run_budget:
            raise ParameterError(
                "sweep of %d runs exceeds the budget of %d" % (total, self.run_budget)
            )
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def point(self, value: float) -> tuple[float, float, int]:
        """(g5, V0, S) with the swept variable replaced by `value`."""
        g5, V0, S = self.g5, self.V0, self.S
        if self.variable == "g5":
            g5 = float(value)
        elif self.variable == "V0":
            V0 = float(value)
        else:
            S = int(value)
        return g5, V0, S


@dataclass(frozen=True)
class SweepRow:
    variable: str
    g5: float
    V0: float
    S: int
    seed: int
    converged: bool
    steps: int
    wall_time: float
    diag: Diagnostics | None
    fit: TailFit | None
    regime: str | None
    status: str

    def value(self) -> float:
        return float(getattr(self, self.variable))


def _fit_status(fit: TailFit) -> str:
    bad_left = not fit.side_ok("left")
    bad_right = not fit.side_ok("right")
    if bad_left and bad_right:
        return "fit-failed:both"
    if bad_left:
        return "fit-failed:left"
    if bad_right:
        return "fit-failed:right"
    return STATUS_OK


def _run_one_value(spec: SweepSpec, value: float) -> list[SweepRow]:
    g5, V0, S = spec.point(value)
    grid = Grid(spec.L, spec.dx)
    V = np.stack([
        sample_on_grid(make_potential(V0, S, spec.L, seed), grid) for seed in spec.seeds
    ])
    params = SolverParams(
        dt=spec.dt,
        g5=g5,
        mode="imaginary",
        max_steps=spec.max_steps,
        energy_tol=spec.energy_tol,
        initial_sigma=spec.sigma0,
    )
    t0 = time.perf_counter()
    res = relax_batch(V, params, grid)
    elapsed = time.perf_counter() - t0
    rows = []
    for j, seed in enumerate(spec.seeds):
        if res.blowup_step[j] >= 0:
            rows.append(SweepRow(
                variable=spec.variable, g5=g5, V0=V0, S=S, seed=seed,
                converged=False, steps=int(res.steps[j]), wall_time=elapsed,
                diag=None, fit=None, regime=None, status=STATUS_BLOWUP,
            ))
            continue
        psi = WaveFunction(grid, res.psi[j].astype(np.complex128))
        diag = diagnostics(psi)
        fit = fit_tails(psi, diag, window=(spec.f_hi, spec.f_lo))
        try:
            regime = classify_regime(fit, diag)
        except ClassificationUnavailableError:
            regime = None
        rows.append(SweepRow(
            variable=spec.variable, g5=g5, V0=V0, S=S, seed=seed,
            converged=bool(res.converged[j]), steps=int(res.steps[j]), wall_time=elapsed,
            diag=diag, fit=fit, regime=regime, status=_fit_status(fit),
        ))
    return rows


def default_workers() -> int:
    env = os.environ.get("QAL_WORKERS", "")
    if env.strip():
        try:
            count = int(env)
        except ValueError:
            raise ParameterError("QAL_WORKERS must be an integer, got %r" % env)
        if count < 1:
            raise ParameterError("QAL_WORKERS must be >= 1, got %d" % count)
        return count
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[SweepRow]:
    """Relax every (value, seed) pair and return rows sorted by (value, seed)."""
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(spec.values) == 1:
        chunks = [_run_one_value(spec, v) for v in spec.values]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(spec.values))) as pool:
            chunks = list(pool.map(_run_one_value, [spec] * len(spec.values), spec.values))
    return [row for chunk in chunks for row in chunk]


# ---------------------------------------------------------------------------
# scan analysis
# ---------------------------------------------------------------------------


def critical_g5(points: Sequence[tuple[float, float]], jump_factor: float = 5.0):
    """Locate an abrupt jump in delta_x over a g5 scan.

    points: ordered (g5, delta_x) pairs, single-seed or ensemble medians.
    Returns the midpoint of the interval with the largest consecutive jump,
    provided that jump exceeds jump_factor times the median absolute jump;
    None when the series has no abrupt transition.
    """
    if jump_factor <= 0:
        raise ParameterError("jump_factor must be positive")
    pts = [(float(g), float(d)) for g, d in points]
    if len(pts) < 4:
        raise ParameterError("critical_g5 needs at least 4 scan points, got %d" % len(pts))
    g = np.asarray([p[0] for p in pts])
    d = np.asarray([p[1] for p in pts])
    if np.any(np.diff(g) <= 0):
        raise ParameterError("g5 values must be strictly increasing")
    jumps = np.diff(d)
    i_max = int(np.argmax(jumps))
    j_max = float(jumps[i_max])
    med = float(np.median(np.abs(jumps)))
    if j_max > jump_factor * med and j_max > 0.0:
        return float(0.5 * (g[i_max] + g[i_max + 1]))
    return None


def stabilization_check(rows: Iterable[SweepRow], s_split: int) -> tuple[float, float]:
    """Relative std of the peak height below and at/above the segment-count split."""
    low, high = [], []
    for row in rows:
        if row.diag is None:
            continue
        (low if row.S < s_split else high).append(row.diag.peak_height)
    if not low or not high:
        raise ParameterError("stabilization_check needs rows on both sides of S=%d" % s_split)
    low = np.asarray(low)
    high = np.asarray(high)
    return float(low.std() / low.mean()), float(high.std() / high.mean())


@dataclass(frozen=True)
class AggRow:
    variable: str
    value: float
    n_rows: int
    n_l_left: int
    n_l_right: int
    delta_x_median: float | None
    delta_x_iqr: float | None
    l_left_median: float | None
    l_left_iqr: float | None
    l_right_median: float | None
    l_right_iqr: float | None
    peak_height_median: float | None
    peak_height_iqr: float | None


def _median_iqr(vals: list) -> tuple[float | None, float | None]:
    if not vals:
        return None, None
    arr = np.asarray(vals, dtype=float)
    q1, q2, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    return float(q2), float(q3 - q1)


def aggregate(rows: Iterable[SweepRow]) -> list[AggRow]:
    """Per-value medians and interquartile ranges.

    Blowup rows count toward n_rows only; rows whose tail fit failed on a side
    are excluded from that side's localization-length statistics.
    """
    rows = list(rows)
    if not rows:
        raise ParameterError("aggregate needs at least one row")
    groups: dict[float, list[SweepRow]] = {}
    for row in rows:
        groups.setdefault(row.value(), []).append(row)
    out = []
    for value in sorted(groups):
        grp = groups[value]
        dxs = [r.diag.delta_x for r in grp if r.diag is not None]
        pks = [r.diag.peak_height for r in grp if r.diag is not None]
        ll = [r.fit.l_left for r in grp if r.fit is not None and r.fit.side_ok("left")]
        lr = [r.fit.l_right for r in grp if r.fit is not None and r.fit.side_ok("right")]
        dx_med, dx_iqr = _median_iqr(dxs)
        pk_med, pk_iqr = _median_iqr(pks)
        ll_med, ll_iqr = _median_iqr(ll)
        lr_med, lr_iqr = _median_iqr(lr)
        out.append(AggRow(
            variable=grp[0].variable, value=value, n_rows=len(grp),
            n_l_left=len(ll), n_l_right=len(lr),
            delta_x_median=dx_med, delta_x_iqr=dx_iqr,
            l_left_median=ll_med, l_left_iqr=ll_iqr,
            l_right_median=lr_med, l_right_iqr=lr_iqr,
            peak_height_median=pk_med, peak_height_iqr=pk_iqr,
        ))
    return out


def median_delta_x_series(rows: Iterable[SweepRow]) -> list[tuple[float, float]]:
    """(value, ensemble-median delta_x) pairs, ascending in value."""
    return [
        (agg.value, agg.delta_x_median)
        for agg in aggregate(rows)
        if agg.delta_x_median is not None
    ]


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def rows_to_csv(rows: Iterable[SweepRow], comment_lines: Sequence[str] = ()) -> str:
    lines = ["# %s" % c for c in comment_lines]
    lines.append(ROWS_HEADER)
    for r in rows:
        d, f = r.diag, r.fit
        fields = [
            r.variable, _fmt(r.g5), _fmt(r.V0), _fmt(r.S), _fmt(r.seed),
            _fmt(r.converged), _fmt(r.steps),
            _fmt(d.mean_x if d else None), _fmt(d.peak_x if d else None),
            _fmt(d.peak_height if d else None), _fmt(d.delta_x if d else None),
            _fmt(f.l_left if f else None), _fmt(f.l_right if f else None),
            _fmt(f.r2_exp_left if f else None), _fmt(f.r2_exp_right if f else None),
            _fmt(f.sigma_gauss if f else None), _fmt(f.r2_gauss if f else None),
            _fmt(f.localized if f else None),
            r.regime or "",
            r.status,
        ]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def aggs_to_csv(aggs: Iterable[AggRow], comment_lines: Sequence[str] = ()) -> str:
    lines = ["# %s" % c for c in comment_lines]
    lines.append(AGG_HEADER)
    for a in aggs:
        fields = [
            a.variable, _fmt(a.value), _fmt(a.n_rows), _fmt(a.n_l_left), _fmt(a.n_l_right),
            _fmt(a.delta_x_median), _fmt(a.delta_x_iqr),
            _fmt(a.l_left_median), _fmt(a.l_left_iqr),
            _fmt(a.l_right_median), _fmt(a.l_right_iqr),
            _fmt(a.peak_height_median), _fmt(a.peak_height_iqr),
        ]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"
