"""Flat key=value run configuration with paper defaults."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigurationError

_INT_KEYS = {"S", "seed", "max_steps", "n_seeds", "run_budget"}
_FLOAT_KEYS = {
    "L", "dx", "dt", "g5", "V0", "sigma0", "energy_tol",
    "f_hi", "f_lo", "frag_threshold", "t_final", "jump_factor",
}
_STR_KEYS = {"sweep_variable", "sweep_values", "outdir", "tag", "input"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


@dataclass(frozen=True)
class RunConfig:
    # mesh and stepping (defaults are the reference values: L=30, dx=0.04, dt=0.001)
    L: float = 30.0
    dx: float = 0.04
    dt: float = 0.001
    # physics
    g5: float = 0.0
    V0: float = 1.0
    S: int = 300
    seed: int = 1
    # relaxation
    sigma0: float = 1.0
    energy_tol: float = 1e-10
    max_steps: int = 2_000_000
    # tail-fit window and fragmentation flag
    f_hi: float = 0.5
    f_lo: float = 1e-4
    frag_threshold: float = 0.4
    # real-time propagation
    t_final: float = 1.0
    # sweeps
    sweep_variable: str = ""
    sweep_values: str = ""
    n_seeds: int = 1
    jump_factor: float = 5.0
    run_budget: int = 10_000
    # io
    outdir: str = "."
    tag: str = ""
    input: str = ""

    def parsed_sweep_values(self) -> tuple[float, ...]:
        raw = [p for p in self.sweep_values.replace(",", " ").split() if p]
        try:
            vals = tuple(float(p) for p in raw)
        except ValueError:
            raise ConfigurationError("sweep_values holds a malformed number: %r" % self.sweep_values)
        return vals

    def ensemble_seeds(self) -> tuple[int, ...]:
        return tuple(self.seed + k for k in range(self.n_seeds))

    def validate(self) -> "RunConfig":
        def bad(key, why):
            raise ConfigurationError("configuration key %s %s" % (key, why))

        if self.L <= 0:
            bad("L", "must be positive")
        if self.dx <= 0:
            bad("dx", "must be positive")
        if self.dt <= 0:
            bad("dt", "must be positive")
        if self.g5 < 0:
            bad("g5", "must be nonnegative (defocusing)")
        if self.V0 < 0:
            bad("V0", "must be nonnegative")
        if self.S < 1:
            bad("S", "must be a positive integer")
        if not 0 <= self.seed < 2**64:
            bad("seed", "must fit in 64 unsigned bits")
        if self.sigma0 <= 0:
            bad("sigma0", "must be positive")
        if self.energy_tol <= 0:
            bad("energy_tol", "must be positive")
        if self.max_steps < 1:
            bad("max_steps", "must be >= 1")
        if not 0 < self.f_lo < self.f_hi <= 1:
            bad("f_lo/f_hi", "must satisfy 0 < f_lo < f_hi <= 1")
        if self.frag_threshold <= 0:
            bad("frag_threshold", "must be positive")
        if self.t_final <= 0:
            bad("t_final", "must be positive")
        if self.n_seeds < 1:
            bad("n_seeds", "must be >= 1")
        if self.jump_factor <= 0:
            bad("jump_factor", "must be positive")
        if self.run_budget < 1:
            bad("run_budget", "must be >= 1")
        if self.sweep_variable not in ("", "g5", "V0", "S"):
            bad("sweep_variable", "must be one of g5, V0, S")
        if self.sweep_variable:
            vals = self.parsed_sweep_values()
            if not vals:
                bad("sweep_values", "must hold at least one value")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                bad("sweep_values", "must be strictly increasing")
        return self


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _STR_KEYS:
        return raw
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigurationError("configuration key %s holds a malformed integer: %r" % (key, raw))
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError("configuration key %s holds a malformed number: %r" % (key, raw))


def read_config_file(path) -> dict:
    """Parse a flat key=value file; blank lines and # comments are skipped."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigurationError("%s:%d expected key=value, got %r" % (path, lineno, stripped))
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in _ALL_KEYS:
                raise ConfigurationError("unknown configuration key %s" % key)
            values[key] = _parse_value(key, raw)
    return values


def build_config(file_path=None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then file values, then flag overrides; validates the result."""
    cfg = RunConfig()
    if file_path:
        cfg = replace(cfg, **read_config_file(file_path))
    if overrides:
        unknown = set(overrides) - _ALL_KEYS
        if unknown:
            raise ConfigurationError("unknown configuration key %s" % sorted(unknown)[0])
        cfg = replace(cfg, **overrides)
    return cfg.validate()


def config_comment_lines(cfg: RunConfig, command: str) -> list[str]:
    """Header block recording the full configuration; enough to re-run bit-identically."""
    lines = ["command=%s" % command]
    for f in fields(cfg):
        lines.append("%s=%s" % (f.name, getattr(cfg, f.name)))
    return lines
