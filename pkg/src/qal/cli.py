"""Command-line entry point: ground, evolve, potential, fit, sweep."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import RunConfig, _ALL_KEYS, _FLOAT_KEYS, _INT_KEYS, build_config, config_comment_lines
from .disorder import make_potential, sample_on_grid, write_potential
from .errors import ClassificationUnavailableError, ConfigurationError, QalError
from .grid import Grid, read_wavefunction, write_wavefunction
from .observables import detect_fragmentation, diagnostics
from .propagation import SolverParams, evolve_real, ground_state
from .sweeps import SweepSpec, aggregate, aggs_to_csv, rows_to_csv, run_sweep
from .tailfit import classify_regime, fit_tails

COMMANDS = ("ground", "evolve", "potential", "fit", "sweep")

GROUND_CSV_HEADER = (
    "g5,V0,S,seed,converged,steps,energy,mu,mean_x,peak_x,peak_height,delta_x,"
    "l_left,l_right,r2_exp_left,r2_exp_right,sigma_gauss,r2_gauss,localized,regime,fragmented,status"
)
FIT_CSV_HEADER = "l_left,l_right,r2_exp_left,r2_exp_right,sigma_gauss,r2_gauss,delta_x,localized,regime"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qal",
        description="Ground states and localization diagnostics of the 1D quintic NLSE in a random potential.",
    )
    parser.add_argument("--version", action="version", version="qal %s" % __version__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=None, help="flat key=value configuration file")
    for key in sorted(_ALL_KEYS):
        parser.add_argument("--%s" % key, default=None, help=argparse.SUPPRESS)
    return parser


def _overrides_from_args(args) -> dict:
    out = {}
    for key in _ALL_KEYS:
        raw = getattr(args, key)
        if raw is None:
            continue
        if key in _INT_KEYS:
            try:
                out[key] = int(raw)
            except ValueError:
                raise ConfigurationError("flag --%s holds a malformed integer: %r" % (key, raw))
        elif key in _FLOAT_KEYS:
            try:
                out[key] = float(raw)
            except ValueError:
                raise ConfigurationError("flag --%s holds a malformed number: %r" % (key, raw))
        else:
            out[key] = raw
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _out_path(cfg: RunConfig, command: str, ext: str, suffix: str = "") -> str:
    tag = cfg.tag or command
    return os.path.join(cfg.outdir, "%s%s.%s" % (tag, suffix, ext))


def _sampled_potential(cfg: RunConfig, grid: Grid) -> np.ndarray:
    if cfg.V0 == 0.0:
        return np.zeros(grid.n_points)
    pot = make_potential(cfg.V0, cfg.S, cfg.L, cfg.seed)
    return sample_on_grid(pot, grid)


def _cmd_ground(cfg: RunConfig) -> int:
    grid = Grid(cfg.L, cfg.dx)
    V = _sampled_potential(cfg, grid)
    params = SolverParams(
        dt=cfg.dt, g5=cfg.g5, mode="imaginary", max_steps=cfg.max_steps,
        energy_tol=cfg.energy_tol, initial_sigma=cfg.sigma0,
    )
    result = ground_state(V, params, grid)
    comments = config_comment_lines(cfg, "ground")
    dump_path = _out_path(cfg, "ground", "dump")
    write_wavefunction(result.psi, dump_path, comments)

    diag = diagnostics(result.psi)
    fit = fit_tails(result.psi, diag, window=(cfg.f_hi, cfg.f_lo))
    try:
        regime = classify_regime(fit, diag)
    except ClassificationUnavailableError:
        regime = None
    fragmented = detect_fragmentation(diag, cfg.frag_threshold)
    csv_path = _out_path(cfg, "ground", "csv")
    fields = [
        _fmt(cfg.g5), _fmt(cfg.V0), _fmt(cfg.S), _fmt(cfg.seed),
        _fmt(result.converged), _fmt(result.steps_taken),
        _fmt(result.energy), _fmt(result.chemical_potential),
        _fmt(diag.mean_x), _fmt(diag.peak_x), _fmt(diag.peak_height), _fmt(diag.delta_x),
        _fmt(fit.l_left), _fmt(fit.l_right), _fmt(fit.r2_exp_left), _fmt(fit.r2_exp_right),
        _fmt(fit.sigma_gauss), _fmt(fit.r2_gauss), _fmt(fit.localized),
        regime or "", _fmt(fragmented),
        "ok" if result.converged else "not-converged",
    ]
    with open(csv_path, "w") as fh:
        for line in comments:
            fh.write("# %s\n" % line)
        fh.write(GROUND_CSV_HEADER + "\n")
        fh.write(",".join(fields) + "\n")
    print("wrote %s and %s (E=%g, delta_x=%g, steps=%d)" % (
        dump_path, csv_path, result.energy, diag.delta_x, result.steps_taken))
    return 0


def _cmd_evolve(cfg: RunConfig) -> int:
    if not cfg.input:
        raise ConfigurationError("evolve requires --input pointing at a wavefunction dump")
    psi = read_wavefunction(cfg.input)
    if abs(psi.grid.half_width - cfg.L) > 1e-9 or abs(psi.grid.dx - cfg.dx) > 1e-12:
        raise ConfigurationError(
            "dump grid (L=%g, dx=%g) does not match configuration (L=%g, dx=%g)"
            % (psi.grid.half_width, psi.grid.dx, cfg.L, cfg.dx)
        )
    V = _sampled_potential(cfg, psi.grid)
    params = SolverParams(dt=cfg.dt, g5=cfg.g5, mode="real")
    final = evolve_real(psi, V, params, cfg.t_final)
    out = _out_path(cfg, "evolve", "dump")
    write_wavefunction(final, out, config_comment_lines(cfg, "evolve"))
    print("wrote %s (t_final=%g)" % (out, cfg.t_final))
    return 0


def _cmd_potential(cfg: RunConfig) -> int:
    grid = Grid(cfg.L, cfg.dx)
    pot = make_potential(cfg.V0, cfg.S, cfg.L, cfg.seed)
    out = _out_path(cfg, "potential", "dat")
    write_potential(pot, grid, out, config_comment_lines(cfg, "potential"))
    print("wrote %s" % out)
    return 0


def _cmd_fit(cfg: RunConfig) -> int:
    if not cfg.input:
        raise ConfigurationError("fit requires --input pointing at a wavefunction dump")
    psi = read_wavefunction(cfg.input)
    diag = diagnostics(psi)
    fit = fit_tails(psi, diag, window=(cfg.f_hi, cfg.f_lo))
    try:
        regime = classify_regime(fit, diag)
    except ClassificationUnavailableError:
        regime = None
    out = _out_path(cfg, "fit", "csv")
    fields = [
        _fmt(fit.l_left), _fmt(fit.l_right), _fmt(fit.r2_exp_left), _fmt(fit.r2_exp_right),
        _fmt(fit.sigma_gauss), _fmt(fit.r2_gauss), _fmt(diag.delta_x), _fmt(fit.localized),
        regime or "",
    ]
    with open(out, "w") as fh:
        for line in config_comment_lines(cfg, "fit"):
            fh.write("# %s\n" % line)
        fh.write(FIT_CSV_HEADER + "\n")
        fh.write(",".join(fields) + "\n")
    print("wrote %s" % out)
    return 0


def _cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.sweep_variable:
        raise ConfigurationError("sweep requires sweep_variable (g5, V0, or S)")
    spec = SweepSpec(
        variable=cfg.sweep_variable,
        values=cfg.parsed_sweep_values(),
        seeds=cfg.ensemble_seeds(),
        g5=cfg.g5, V0=cfg.V0, S=cfg.S,
        L=cfg.L, dx=cfg.dx, dt=cfg.dt,
        sigma0=cfg.sigma0, energy_tol=cfg.energy_tol, max_steps=cfg.max_steps,
        f_hi=cfg.f_hi, f_lo=cfg.f_lo, run_budget=cfg.run_budget,
    )
    rows = run_sweep(spec)
    comments = config_comment_lines(cfg, "sweep")
    if cfg.n_seeds == 1:
        comments.append("single-seed sweep: per-value statistics reflect one disorder realization")
    rows_path = _out_path(cfg, "sweep", "csv")
    agg_path = _out_path(cfg, "sweep", "csv", suffix="-agg")
    with open(rows_path, "w") as fh:
        fh.write(rows_to_csv(rows, comments))
    with open(agg_path, "w") as fh:
        fh.write(aggs_to_csv(aggregate(rows), comments))
    print("wrote %s (%d rows) and %s" % (rows_path, len(rows), agg_path))
    return 0


_DISPATCH = {
    "ground": _cmd_ground,
    "evolve": _cmd_evolve,
    "potential": _cmd_potential,
    "fit": _cmd_fit,
    "sweep": _cmd_sweep,
}


def dispatch(command: str, cfg: RunConfig) -> int:
    if command not in _DISPATCH:
        raise ConfigurationError("unknown command %r" % command)
    os.makedirs(cfg.outdir, exist_ok=True)
    return _DISPATCH[command](cfg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args.config, _overrides_from_args(args))
        return dispatch(args.command, cfg)
    except QalError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
