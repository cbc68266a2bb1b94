import numpy as np
import pytest

import qal
from qal.errors import ParameterError
from qal.observables import Diagnostics
from qal.sweeps import AGG_HEADER, ROWS_HEADER, SweepRow, aggs_to_csv, rows_to_csv


def _quick_spec(**kw):
    base = dict(
        variable="g5",
        values=(0.0, 1.0),
        seeds=(3, 12),
        V0=5.0,
        S=300,
    )
    base.update(kw)
    return qal.SweepSpec(**base)


def _fake_row(value, seed=1, peak=1.0, delta_x=1.0, variable="S", fit=None, diag=True):
    S = int(value) if variable == "S" else 300
    g5 = value if variable == "g5" else 0.0
    V0 = value if variable == "V0" else 1.0
    d = Diagnostics(mean_x=0.0, peak_x=0.0, peak_height=peak, delta_x=delta_x, norm=1.0) if diag else None
    return SweepRow(
        variable=variable, g5=g5, V0=V0, S=S, seed=seed, converged=True, steps=100,
        wall_time=0.0, diag=d, fit=fit, regime=None, status="ok" if d else "blowup",
    )


# ---------------------------------------------------------------------------
# spec validation
# ---------------------------------------------------------------------------


def test_spec_rejects_bad_variable():
    with pytest.raises(ParameterError):
        qal.SweepSpec(variable="dx", values=(1.0, 2.0), seeds=(1,))


def test_spec_rejects_unordered_values():
    with pytest.raises(ParameterError):
        qal.SweepSpec(variable="g5", values=(1.0, 0.5), seeds=(1,))


def test_spec_rejects_empty_seeds():
    with pytest.raises(ParameterError):
        qal.SweepSpec(variable="g5", values=(0.0, 1.0), seeds=())


def test_spec_rejects_fractional_segment_counts():
    with pytest.raises(ParameterError):
        qal.SweepSpec(variable="S", values=(50.0, 100.5), seeds=(1,))


def test_spec_enforces_budget():
    with pytest.raises(ParameterError):
        qal.SweepSpec(variable="g5", values=(0.0, 1.0), seeds=(1, 2), run_budget=3)


# ---------------------------------------------------------------------------
# running sweeps
# ---------------------------------------------------------------------------


def test_singleton_sweep_matches_standalone_run(paper_grid):
    spec = _quick_spec(values=(1.0,), seeds=(3,))
    rows = qal.run_sweep(spec, workers=1)
    assert len(rows) == 1
    row = rows[0]

    pot = qal.make_potential(5.0, 300, 30.0, 3)
    V = qal.sample_on_grid(pot, paper_grid)
    res = qal.ground_state(V, qal.SolverParams(g5=1.0), paper_grid)
    d = qal.diagnostics(res.psi)
    f = qal.fit_tails(res.psi, d)
    assert row.steps == res.steps_taken
    assert row.converged == res.converged
    assert row.diag.delta_x == d.delta_x
    assert row.diag.peak_height == d.peak_height
    assert row.fit.l_left == f.l_left and row.fit.l_right == f.l_right


def test_worker_count_env_var(monkeypatch):
    from qal.sweeps import default_workers

    monkeypatch.setenv("QAL_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("QAL_WORKERS", "zero")
    with pytest.raises(ParameterError):
        default_workers()
    monkeypatch.setenv("QAL_WORKERS", "0")
    with pytest.raises(ParameterError):
        default_workers()
    monkeypatch.delenv("QAL_WORKERS")
    assert default_workers() >= 1


def test_sweep_rows_deterministic_across_worker_counts():
    spec = _quick_spec()
    rows1 = qal.run_sweep(spec, workers=1)
    rows2 = qal.run_sweep(spec, workers=2)
    csv1 = rows_to_csv(rows1)
    csv2 = rows_to_csv(rows2)
    assert csv1 == csv2
    assert len(rows1) == len(spec.values) * len(spec.seeds)
    # ordered by (value, seed)
    keys = [(r.g5, r.seed) for r in rows1]
    assert keys == sorted(keys)


def test_sweep_csv_header_exact():
    assert ROWS_HEADER == (
        "variable,g5,V0,S,seed,converged,steps,mean_x,peak_x,peak_height,delta_x,"
        "l_left,l_right,r2_exp_left,r2_exp_right,sigma_gauss,r2_gauss,localized,regime,status"
    )
    row = _fake_row(100)
    text = rows_to_csv([row])
    lines = text.strip().split("\n")
    assert lines[0] == ROWS_HEADER
    assert len(lines) == 2
    assert len(lines[1].split(",")) == len(ROWS_HEADER.split(","))


def test_rows_csv_missing_fit_fields_empty():
    row = _fake_row(100, fit=None)
    body = rows_to_csv([row]).strip().split("\n")[1]
    fields = body.split(",")
    header = ROWS_HEADER.split(",")
    for name in ("l_left", "l_right", "sigma_gauss", "r2_gauss", "localized"):
        assert fields[header.index(name)] == ""


def test_blowup_row_serializes_without_numbers():
    row = _fake_row(100, diag=False)
    body = rows_to_csv([row]).strip().split("\n")[1]
    fields = body.split(",")
    header = ROWS_HEADER.split(",")
    assert fields[header.index("status")] == "blowup"
    assert fields[header.index("delta_x")] == ""
    assert fields[header.index("peak_height")] == ""


# ---------------------------------------------------------------------------
# transition detection
# ---------------------------------------------------------------------------


def test_critical_g5_constant_series():
    pts = [(g, 1.0) for g in np.arange(0.0, 1.0, 0.1)]
    assert qal.critical_g5(pts) is None


def test_critical_g5_staircase():
    gs = np.arange(0.0, 4.0, 0.1)
    pts = [(g, 1.0 if g < 2.0 else 10.0) for g in gs]
    crit = qal.critical_g5(pts)
    assert crit is not None
    assert 1.95 <= crit <= 2.05


def test_critical_g5_smooth_series_returns_none():
    gs = np.arange(0.0, 3.05, 0.1)
    pts = [(g, 1.0 + 0.2 * g * g) for g in gs]
    assert qal.critical_g5(pts, jump_factor=5.0) is None


def test_critical_g5_needs_four_ordered_points():
    with pytest.raises(ParameterError):
        qal.critical_g5([(0.0, 1.0), (0.1, 1.0), (0.2, 1.0)])
    with pytest.raises(ParameterError):
        qal.critical_g5([(0.0, 1.0), (0.2, 1.0), (0.1, 1.0), (0.3, 1.0)])


# ---------------------------------------------------------------------------
# stabilization and aggregation
# ---------------------------------------------------------------------------


def test_stabilization_constant_peaks():
    rows = [_fake_row(S, seed=s, peak=0.5) for S in (50, 100, 250, 300) for s in (1, 2)]
    lo, hi = qal.stabilization_check(rows, 200)
    assert lo == 0.0 and hi == 0.0


def test_stabilization_synthetic_noise_ratio():
    rng = np.random.default_rng(7)
    rows = []
    for S in (50, 100, 150, 200, 250, 300, 350, 400):
        for s in range(40):
            sigma = 0.2 if S < 200 else 0.02
            rows.append(_fake_row(S, seed=s, peak=1.0 + sigma * rng.standard_normal()))
    lo, hi = qal.stabilization_check(rows, 200)
    assert hi < lo
    assert lo / hi == pytest.approx(10.0, abs=3.0)


def test_stabilization_needs_both_sides():
    rows = [_fake_row(S) for S in (50, 100)]
    with pytest.raises(ParameterError):
        qal.stabilization_check(rows, 200)


def test_aggregate_single_row_is_identity():
    row = _fake_row(100, delta_x=1.7, peak=0.9)
    agg = qal.aggregate([row])
    assert len(agg) == 1
    assert agg[0].delta_x_median == 1.7
    assert agg[0].peak_height_median == 0.9
    assert agg[0].delta_x_iqr == 0.0


def test_aggregate_median_and_iqr_rule():
    rows = [_fake_row(100, seed=s, delta_x=v) for s, v in enumerate((1.0, 2.0, 3.0))]
    agg = qal.aggregate(rows)[0]
    assert agg.delta_x_median == 2.0
    assert agg.delta_x_iqr == pytest.approx(1.0)


def test_aggregate_uniform_sample_median():
    rng = np.random.default_rng(0)
    rows = [_fake_row(100, seed=s, delta_x=float(rng.random())) for s in range(100)]
    agg = qal.aggregate(rows)[0]
    assert abs(agg.delta_x_median - 0.5) < 0.1


def test_aggregate_empty_rejected():
    with pytest.raises(ParameterError):
        qal.aggregate([])


def test_aggregate_counts_fit_failures():
    good_fit = qal.TailFit(
        l_left=1.0, l_right=1.2, amp_left=1.0, amp_right=1.0,
        r2_exp_left=0.99, r2_exp_right=0.99, sigma_gauss=None, r2_gauss=None,
        localized=True, status_left="ok", status_right="ok",
    )
    bad_fit = qal.TailFit(
        l_left=None, l_right=2.0, amp_left=None, amp_right=1.0,
        r2_exp_left=None, r2_exp_right=0.9, sigma_gauss=None, r2_gauss=None,
        localized=False, status_left="insufficient-data", status_right="ok",
    )
    rows = [
        _fake_row(100, seed=1, fit=good_fit),
        _fake_row(100, seed=2, fit=bad_fit),
        _fake_row(100, seed=3, diag=False),
    ]
    agg = qal.aggregate(rows)[0]
    assert agg.n_rows == 3
    assert agg.n_l_left == 1
    assert agg.n_l_right == 2
    assert agg.l_left_median == 1.0
    assert agg.l_right_median == pytest.approx(1.6)
    lines = aggs_to_csv(agg for agg in qal.aggregate(rows)).strip().split("\n")
    assert lines[0] == AGG_HEADER
