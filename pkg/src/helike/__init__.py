"""Variational Hylleraas-basis solver for two-electron atoms and ions.

Ground-state energies, one-electron densities, Shannon entropies, and
nuclear-charge scans for He-like systems and the positronium negative
ion, in extended-precision arithmetic throughout.
"""

from .basis import BasisSpec, HylleraasTerm, basis_size, enumerate_basis
from .density import (
    DensityProfile,
    EntropyResult,
    density_at,
    density_oracle,
    hydrogenic_density,
    hydrogenic_entropy,
    radial_density,
    shannon_entropy,
)
from .integrals import IntegralKey, base_integral, base_integral_oracle
from .operators import (
    MatrixPair,
    OperatorSet,
    SystemSpec,
    Wavefunction,
    assemble_moments,
    assemble_operators,
    assemble_overlap,
    expectation_r1,
    expectation_r12,
    expectation_values,
    norm_residual,
    quadratic_form,
)
from .precision import (
    PrecisionPolicy,
    QuadratureRule,
    factorial,
    lower_incomplete_gamma,
    make_gauss_laguerre,
    upper_incomplete_gamma,
    working_precision,
)
from .archive import (
    ArchiveError,
    load_wavefunction,
    save_wavefunction,
    wavefunction_document,
    wavefunction_from_document,
)
from .solver import (
    ConvergenceError,
    DefinitenessError,
    EigenSolution,
    GroundState,
    OptimizationResult,
    SolverError,
    embed_vector,
    ladder_optimize,
    lowest_state,
    optimize_parameters,
    solve_lowest,
    track_state,
)
from .zscan import (
    ScanConfig,
    ScanRow,
    emit_table,
    load_rows,
    scan_z,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSpec",
    "HylleraasTerm",
    "basis_size",
    "enumerate_basis",
    "DensityProfile",
    "EntropyResult",
    "density_at",
    "density_oracle",
    "hydrogenic_density",
    "hydrogenic_entropy",
    "radial_density",
    "shannon_entropy",
    "IntegralKey",
    "base_integral",
    "base_integral_oracle",
    "MatrixPair",
    "OperatorSet",
    "SystemSpec",
    "assemble_moments",
    "assemble_operators",
    "assemble_overlap",
    "expectation_r1",
    "expectation_r12",
    "expectation_values",
    "norm_residual",
    "quadratic_form",
    "ArchiveError",
    "load_wavefunction",
    "save_wavefunction",
    "wavefunction_document",
    "wavefunction_from_document",
    "ScanConfig",
    "ScanRow",
    "emit_table",
    "load_rows",
    "scan_z",
    "embed_vector",
    "PrecisionPolicy",
    "QuadratureRule",
    "factorial",
    "lower_incomplete_gamma",
    "make_gauss_laguerre",
    "upper_incomplete_gamma",
    "working_precision",
    "ConvergenceError",
    "DefinitenessError",
    "EigenSolution",
    "GroundState",
    "OptimizationResult",
    "SolverError",
    "Wavefunction",
    "ladder_optimize",
    "lowest_state",
    "optimize_parameters",
    "solve_lowest",
    "track_state",
    "__version__",
]
