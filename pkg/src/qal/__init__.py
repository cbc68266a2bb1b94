"""Ground states of the 1D defocusing quintic NLSE in piecewise random potentials."""

__version__ = "0.1.0"

from .disorder import RandomPotential, make_potential, sample_on_grid, splitmix64_stream
from .errors import (
    ClassificationUnavailableError,
    ConfigurationError,
    ContractViolationError,
    DegenerateStateError,
    NumericalBlowupError,
    ParameterError,
    QalError,
    SingularSystemError,
)
from .grid import (
    Grid,
    WaveFunction,
    gaussian_seed,
    normalize,
    read_wavefunction,
    trapezoid_integrate,
    write_wavefunction,
)
from .observables import Diagnostics, detect_fragmentation, diagnostics, finite_difference
from .propagation import (
    GroundStateResult,
    SolverParams,
    energies,
    evolve_real,
    ground_state,
    relax_batch,
    step,
    thomas_solve,
)
from .sweeps import (
    AggRow,
    SweepRow,
    SweepSpec,
    aggregate,
    critical_g5,
    median_delta_x_series,
    run_sweep,
    stabilization_check,
)
from .tailfit import TailFit, classify_regime, fit_tails

__all__ = [
    "Grid", "WaveFunction", "gaussian_seed", "normalize", "trapezoid_integrate",
    "read_wavefunction", "write_wavefunction",
    "RandomPotential", "make_potential", "sample_on_grid", "splitmix64_stream",
    "SolverParams", "GroundStateResult", "ground_state", "relax_batch",
    "step", "evolve_real", "thomas_solve", "energies",
    "Diagnostics", "diagnostics", "detect_fragmentation", "finite_difference",
    "TailFit", "fit_tails", "classify_regime",
    "SweepSpec", "SweepRow", "AggRow", "run_sweep", "aggregate",
    "critical_g5", "stabilization_check", "median_delta_x_series",
    "QalError", "ConfigurationError", "ParameterError", "ContractViolationError",
    "DegenerateStateError", "NumericalBlowupError", "SingularSystemError",
    "ClassificationUnavailableError",
]
