"""Nuclear-charge scan across the two-electron binding threshold.

Walks a descending grid of charges Z for the (Z; e, e) ground problem.
Above the critical charge the state is genuinely bound: each row gets a
full decay-parameter optimization, warm-started from its neighbor.  Below
the critical charge the variational minimum collapses toward the
detachment threshold and re-optimizing would chase continuum states, so
the scan stops optimizing and instead continues the last bound solution:
the decay pair is either frozen or linearly extrapolated in Z, and the
tracked state is picked among the lowest few eigenvectors by overlap
with the previous row's vector.

Quasi-bound rows are truncation artifacts of a discretized continuum,
not variational upper bounds; the regime flag marks them so downstream
consumers never label them as bounds.  Entropies are still well defined
row by row and are evaluated everywhere.

Failures stay local: a row whose solve or quadrature does not converge
is emitted with its flags lowered and the walk moves on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from gmpy2 import mpfr

from .basis import BasisSpec
from .density import radial_density, shannon_entropy
from .operators import OperatorSet, SystemSpec, assemble_operators
from .precision import (
    PrecisionPolicy,
    RuleGenerationError,
    format_decimal,
    working_precision,
)
from .solver import (
    GroundState,
    SolverError,
    Wavefunction,
    default_decay_start,
    ladder_optimize,
    optimize_parameters,
    solve_lowest,
    track_state,
)

# reference threshold between the bound and quasi-bound regimes; the scan
# only consumes it as a regime classifier and never recomputes it
CRITICAL_Z = "0.911028"

STRATEGIES = ("freeze", "extrapolate")

REGIME_BOUND = "bound"
REGIME_QUASI = "quasi-bound"

_NAN = "nan"


def _fraction(value, name: str) -> Fraction:
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"{name} is not a valid decimal: {value!r}") from exc


def _fraction_to_mpfr(fr: Fraction) -> mpfr:
    return mpfr(fr.numerator) / mpfr(fr.denominator)


@dataclass(frozen=True)
class ScanConfig:
    """Grid, strategy, and budget settings for one charge scan.

    Charge endpoints and the step are decimal strings (or anything whose
    str() parses as one) so the grid is exact and the emitted table is
    reproducible byte for byte.  The step must tile [z_from, z_to]
    an integer number of times.
    """

    omega: int
    z_from: str = "0.88"
    z_to: str = "1.00"
    z_step: str = "0.005"
    z_critical: str = CRITICAL_Z
    below_cr_strategy: str = "freeze"
    budget: int = 60
    first_budget: int = 80
    track_count: int = 4
    entropy_tol: str = "1e-6"
    entropy_max_order: int = 1600
    policy: PrecisionPolicy = field(default_factory=PrecisionPolicy)

    def __post_init__(self) -> None:
        if self.omega < 5:
            raise ValueError(f"omega must be at least 5, got {self.omega}")
        lo = _fraction(self.z_from, "z_from")
        hi = _fraction(self.z_to, "z_to")
        step = _fraction(self.z_step, "z_step")
        _fraction(self.z_critical, "z_critical")
        if not 0 < lo < hi:
            raise ValueError(f"need 0 < z_from < z_to, got {lo} and {hi}")
        if not step > 0:
            raise ValueError(f"z_step must be positive, got {step}")
        if (hi - lo) % step != 0:
            raise ValueError(
                f"z_step {step} does not tile [{lo}, {hi}] evenly"
            )
        if self.below_cr_strategy not in STRATEGIES:
            raise ValueError(
                f"below_cr_strategy must be one of {STRATEGIES}, "
                f"got {self.below_cr_strategy!r}"
            )
        if self.track_count < 1:
            raise ValueError(f"track_count must be positive, got {self.track_count}")
        if self.budget < 3 or self.first_budget < 3:
            raise ValueError("per-row budgets must allow an initial simplex")

    def grid(self) -> list:
        """Charge values in execution order: z_to first, descending."""
        lo = _fraction(self.z_from, "z_from")
        hi = _fraction(self.z_to, "z_to")
        step = _fraction(self.z_step, "z_step")
        count = int((hi - lo) / step)
        return [hi - k * step for k in range(count + 1)]


@dataclass(frozen=True)
class ScanRow:
    """One emitted scan point; nan fields mean that stage did not converge."""

    z: mpfr
    energy: mpfr
    entropy: mpfr
    alpha: mpfr
    beta: mpfr
    regime: str
    norm_residual: mpfr
    solver_converged: bool
    entropy_converged: bool


def _row_entropy(config: ScanConfig, wf: Wavefunction):
    try:
        profile = radial_density(wf)
        result = shannon_entropy(
            profile,
            tol=config.entropy_tol,
            max_order=config.entropy_max_order,
        )
        return result.value, result.norm_residual, result.converged
    except (RuleGenerationError, ValueError, ZeroDivisionError):
        return mpfr(_NAN), mpfr(_NAN), False


def scan_z(
    config: ScanConfig,
    progress: Optional[Callable[[ScanRow], None]] = None,
) -> list[ScanRow]:
    """Run the scan and return one row per grid charge, in walk order."""
    z_cr = _fraction(config.z_critical, "z_critical")
    rows: list[ScanRow] = []

    with working_precision(config.policy.mantissa_bits):
        # trailing state for warm starts and continuation
        bound_points: list[tuple] = []  # (z: mpfr, alpha, beta)
        last_state: Optional[GroundState] = None
        frozen_ops: Optional[OperatorSet] = None
        tracked: Optional[tuple] = None

        for z_fr in config.grid():
            z = _fraction_to_mpfr(z_fr)
            system = SystemSpec.nucleus(z)
            if z_fr < z_cr:
                row, frozen_ops, tracked = _quasi_row(
                    config, system, z, bound_points, last_state, frozen_ops, tracked
                )
            else:
                row, last_state = _bound_row(
                    config, system, z, bound_points, last_state
                )
                if last_state is not None:
                    bound_points.append((z, row.alpha, row.beta))
            rows.append(row)
            if progress is not None:
                progress(row)
    return rows


def _bound_row(
    config: ScanConfig,
    system: SystemSpec,
    z: mpfr,
    bound_points: list,
    last_state: Optional[GroundState],
):
    nanv = mpfr(_NAN)
    try:
        if last_state is None:
            res = ladder_optimize(
                system,
                config.omega,
                budget=config.first_budget,
                policy=config.policy,
            )
        else:
            prev = bound_points[-1]
            res = optimize_parameters(
                system,
                config.omega,
                initial=(prev[1], prev[2]),
                budget=config.budget,
                step=mpfr("0.01"),
                policy=config.policy,
                warm_start=(last_state.energy, last_state.solution.vector),
            )
    except SolverError:
        alpha = bound_points[-1][1] if bound_points else nanv
        beta = bound_points[-1][2] if bound_points else nanv
        row = ScanRow(z, nanv, nanv, alpha, beta, REGIME_BOUND, nanv, False, False)
        return row, last_state

    state = res.state
    entropy, norm_res, ent_ok = _row_entropy(config, state.wavefunction())
    row = ScanRow(
        z=z,
        energy=state.energy,
        entropy=entropy,
        alpha=res.alpha,
        beta=res.beta,
        regime=REGIME_BOUND,
        norm_residual=norm_res,
        solver_converged=res.converged,
        entropy_converged=ent_ok,
    )
    return row, state


def _quasi_params(
    config: ScanConfig,
    system: SystemSpec,
    z: mpfr,
    bound_points: list,
):
    """(alpha, beta) below the critical charge, per strategy.

    With no bound anchor at all (a grid entirely below the threshold)
    both strategies degrade to the optimizer's generic starting pair.
    Extrapolation needs two anchors and otherwise degrades to freezing.
    """
    if not bound_points:
        return default_decay_start(system)
    if config.below_cr_strategy == "extrapolate" and len(bound_points) >= 2:
        (z0, a0, b0) = bound_points[-2]
        (z1, a1, b1) = bound_points[-1]
        slope_a = (a1 - a0) / (z1 - z0)
        slope_b = (b1 - b0) / (z1 - z0)
        return a1 + slope_a * (z - z1), b1 + slope_b * (z - z1)
    last = bound_points[-1]
    return last[1], last[2]


def _quasi_row(
    config: ScanConfig,
    system: SystemSpec,
    z: mpfr,
    bound_points: list,
    last_state: Optional[GroundState],
    frozen_ops: Optional[OperatorSet],
    tracked: Optional[tuple],
):
    nanv = mpfr(_NAN)
    alpha, beta = _quasi_params(config, system, z, bound_points)
    try:
        if config.below_cr_strategy == "freeze" and bound_points:
            # the frozen basis never changes, so the matrices are
            # assembled once and recombined with the new charge
            if frozen_ops is None:
                if last_state is not None:
                    frozen_ops = last_state.operators
                else:
                    frozen_ops = assemble_operators(
                        system, _frozen_basis(config, alpha, beta)
                    )
            ops = frozen_ops
        else:
            ops = assemble_operators(system, _frozen_basis(config, alpha, beta))

        candidates = solve_lowest(
            ops.pair(z), count=config.track_count, policy=config.policy
        )
        if tracked is None and last_state is not None:
            tracked = last_state.solution.vector
        pick = 0 if tracked is None else track_state(tracked, candidates, ops.overlap)
        sol = candidates[pick]
        tracked = sol.vector
    except SolverError:
        row = ScanRow(z, nanv, nanv, alpha, beta, REGIME_QUASI, nanv, False, False)
        return row, frozen_ops, tracked

    wf = Wavefunction(
        system=system,
        basis=ops.basis,
        energy=sol.energy,
        coefficients=sol.vector,
        bits=sol.bits,
    )
    entropy, norm_res, ent_ok = _row_entropy(config, wf)
    row = ScanRow(
        z=z,
        energy=sol.energy,
        entropy=entropy,
        alpha=ops.basis.alpha,
        beta=ops.basis.beta,
        regime=REGIME_QUASI,
        norm_residual=norm_res,
        solver_converged=True,
        entropy_converged=ent_ok,
    )
    return row, frozen_ops, tracked


def _frozen_basis(config: ScanConfig, alpha, beta) -> BasisSpec:
    return BasisSpec(config.omega, alpha, beta)


_COLUMNS = (
    "z",
    "energy",
    "entropy",
    "alpha",
    "beta",
    "regime",
    "norm_residual",
    "solver_converged",
    "entropy_converged",
)


def _row_cells(row: ScanRow) -> list[str]:
    return [
        format_decimal(row.z),
        format_decimal(row.energy),
        format_decimal(row.entropy),
        format_decimal(row.alpha),
        format_decimal(row.beta),
        row.regime,
        format_decimal(row.norm_residual),
        "true" if row.solver_converged else "false",
        "true" if row.entropy_converged else "false",
    ]


def emit_table(rows: Sequence[ScanRow], fmt: str = "csv", run_id: Optional[str] = None) -> str:
    """Render rows as a CSV or JSON document of 10-digit decimal strings."""
    if not rows:
        raise ValueError("nothing to emit: empty row sequence")
    if fmt == "csv":
        lines = []
        if run_id is not None:
            lines.append(f"# run {run_id}")
        lines.append(",".join(_COLUMNS))
        for row in rows:
            lines.append(",".join(_row_cells(row)))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        body = {
            "columns": list(_COLUMNS),
            "rows": [dict(zip(_COLUMNS, _row_cells(row))) for row in rows],
        }
        if run_id is not None:
            body["run_id"] = run_id
        return json.dumps(body, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown table format {fmt!r}")


def load_rows(document: str) -> list[ScanRow]:
    """Rebuild rows from either emitted format; values reparse from the
    decimal strings, so emit(load(emit(rows))) is byte-identical."""
    text = document.strip()
    if text.startswith("{"):
        cells = [
            [obj[c] for c in _COLUMNS] for obj in json.loads(text)["rows"]
        ]
    else:
        lines = [
            ln for ln in text.splitlines() if ln and not ln.startswith("#")
        ]
        header = lines[0].split(",")
        if tuple(header) != _COLUMNS:
            raise ValueError(f"unexpected table header: {header}")
        cells = [ln.split(",") for ln in lines[1:]]
    rows = []
    for parts in cells:
        if len(parts) != len(_COLUMNS):
            raise ValueError(f"malformed row: {parts}")
        rows.append(
            ScanRow(
                z=mpfr(parts[0]),
                energy=mpfr(parts[1]),
                entropy=mpfr(parts[2]),
                alpha=mpfr(parts[3]),
                beta=mpfr(parts[4]),
                regime=parts[5],
                norm_residual=mpfr(parts[6]),
                solver_converged=parts[7] == "true",
                entropy_converged=parts[8] == "true",
            )
        )
    return rows
