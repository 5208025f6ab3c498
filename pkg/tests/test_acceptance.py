"""End-to-end checks against the published reference values.

One test per criterion; each prints a single PASS/FAIL line (visible
with -s or in the captured output) and then asserts.  The expensive
solved states come from tests/artifacts via the store, which rebuilds
them when the numerics sources change.
"""

import random
import time

import pytest
from gmpy2 import mpfr

import artifact_store
from reference_values import (
    ACCEPT_OM9_TARGETS,
    REFERENCE_BASIS_SIZES,
    REFERENCE_ENERGIES,
    REFERENCE_ENTROPIES,
    REFERENCE_R1,
    REFERENCE_R12,
    REFERENCE_SCAN,
    SCAN_BOUND_MARKS,
    TOL_DENSITY_REL,
    TOL_ENERGY_OM9,
    TOL_ENERGY_OM12,
    TOL_ENTROPY,
    TOL_FREE_ENERGY,
    TOL_FREE_ENTROPY,
    TOL_NORM_RESIDUAL,
    TOL_ORACLE_REL,
    TOL_R_EXPECT,
    TOL_SCAN_ENERGY,
    TOL_SCAN_ENTROPY,
    TOL_VIRIAL,
)

from helike.basis import BasisSpec, basis_size, enumerate_basis
from helike.density import (
    density_at,
    density_oracle,
    hydrogenic_entropy,
    radial_density,
    shannon_entropy,
)
from helike.integrals import IntegralKey, base_integral, base_integral_oracle
from helike.operators import (
    SystemSpec,
    Wavefunction,
    assemble_operators,
    expectation_values,
)
from helike.precision import working_precision
from helike.solver import lowest_state, optimize_parameters, virial_quantities
from helike.zscan import CRITICAL_Z, REGIME_BOUND, REGIME_QUASI

pytestmark = pytest.mark.acceptance

SYSTEMS = ("psminus", "hminus", "he", "liplus")


def _report(tag: str, failures: list, detail: str) -> None:
    status = "PASS" if not failures else "FAIL"
    print(f"{tag} {status} {detail}")
    assert not failures, f"{tag}: " + "; ".join(failures)


@pytest.fixture(scope="module")
def om12_entropies():
    out = {}
    for key in SYSTEMS:
        wf = artifact_store.ensure_wavefunction(key, 12)
        with working_precision(wf.bits):
            out[key] = shannon_entropy(radial_density(wf))
    return out


@pytest.fixture(scope="module")
def free_states():
    """Non-interacting Z = 1, 2, 3 ground states with exact references."""
    out = {}
    with working_precision(256):
        for z in (1, 2, 3):
            system = SystemSpec.nucleus(z, interaction_on=False)
            ops = assemble_operators(system, BasisSpec(2, z, z))
            sol = lowest_state(ops, sigma=-z * z - 1)
            wf = Wavefunction(system, ops.basis, sol.energy, sol.vector, ops.bits)
            out[z] = (sol, shannon_entropy(radial_density(wf)))
    return out


@pytest.mark.slow
def test_ac1_ground_energies():
    failures = []
    details = []
    for key in SYSTEMS:
        wf9 = artifact_store.ensure_wavefunction(key, 9)
        err_mark = abs(float(wf9.energy) - ACCEPT_OM9_TARGETS[key])
        err_ref = abs(float(wf9.energy) - REFERENCE_ENERGIES[(key, 9)])
        if err_mark > TOL_ENERGY_OM9:
            failures.append(f"{key} omega=9 off the mark by {err_mark:.2e}")
        if err_ref > TOL_ENERGY_OM9:
            failures.append(f"{key} omega=9 off the table by {err_ref:.2e}")

        wf12 = artifact_store.ensure_wavefunction(key, 12)
        err12 = abs(float(wf12.energy) - REFERENCE_ENERGIES[(key, 12)])
        if err12 > TOL_ENERGY_OM12:
            failures.append(f"{key} omega=12 off by {err12:.2e}")
        details.append(f"{key} {max(err_mark, err_ref):.1e}/{err12:.1e}")
    _report(
        "AC1",
        failures,
        "optimized energies, omega 9 within 1e-7 and omega 12 within 1e-8 "
        f"({', '.join(details)})",
    )


def test_ac2_basis_sizes():
    failures = []
    for omega, want in REFERENCE_BASIS_SIZES.items():
        got = basis_size(omega)
        if got != want:
            failures.append(f"omega={omega}: {got} != {want}")
        if len(enumerate_basis(omega)) != want:
            failures.append(f"omega={omega}: enumeration disagrees")
    _report("AC2", failures, "term counts for omega 9..15 are 125..444")


@pytest.mark.slow
def test_ac3_entropies_at_omega_12(om12_entropies):
    failures = []
    details = []
    for key in SYSTEMS:
        result = om12_entropies[key]
        want = REFERENCE_ENTROPIES[(key, 12)]
        err = abs(float(result.value) - want)
        if not result.converged:
            failures.append(f"{key} quadrature did not converge")
        if err > TOL_ENTROPY[key]:
            failures.append(f"{key} off by {err:.2e} (tol {TOL_ENTROPY[key]:.0e})")
        details.append(f"{key} {err:.1e}")
    _report("AC3", failures, f"omega 12 entropies ({', '.join(details)})")


@pytest.mark.slow
def test_ac4_radial_expectations_at_omega_15():
    failures = []
    details = []
    for key in SYSTEMS:
        wf = artifact_store.ensure_wavefunction(key, 15)
        r1, r12 = expectation_values(wf)
        e1 = abs(float(r1) - REFERENCE_R1[key])
        e12 = abs(float(r12) - REFERENCE_R12[key])
        tol = TOL_R_EXPECT[key]
        if e1 > tol:
            failures.append(f"{key} <r1> off by {e1:.2e}")
        if e12 > tol:
            failures.append(f"{key} <r12> off by {e12:.2e}")
        details.append(f"{key} {max(e1, e12):.1e}")
    _report("AC4", failures, f"omega 15 <r1>, <r12> ({', '.join(details)})")


@pytest.mark.slow
def test_ac5_charge_scan(scan_rows):
    failures = []
    rows = {f"{float(r.z):.3f}": r for r in scan_rows}
    z_cr = float(CRITICAL_Z)

    if len(scan_rows) != 25:
        failures.append(f"expected 25 rows, got {len(scan_rows)}")

    # quantitative marks in the bound region
    for z in SCAN_BOUND_MARKS:
        want_e, want_s = REFERENCE_SCAN[z]
        row = rows.get(f"{float(z):.3f}")
        if row is None:
            failures.append(f"missing row at Z={z}")
            continue
        err_e = abs(float(row.energy) - want_e)
        err_s = abs(float(row.entropy) - want_s)
        if err_e > TOL_SCAN_ENERGY:
            failures.append(f"Z={z} energy off by {err_e:.2e}")
        if err_s > TOL_SCAN_ENTROPY:
            failures.append(f"Z={z} entropy off by {err_s:.2e}")

    # regime labels and convergence flags on the whole grid
    for row in scan_rows:
        want = REGIME_BOUND if float(row.z) >= z_cr else REGIME_QUASI
        if row.regime != want:
            failures.append(f"Z={float(row.z):.3f} labeled {row.regime}")
        if not (row.solver_converged and row.entropy_converged):
            failures.append(f"Z={float(row.z):.3f} unconverged")

    # qualitative properties across the quasi-bound region: the entropy
    # keeps rising toward small Z, accelerates below the threshold, and
    # never jumps discontinuously between neighboring grid points
    entropies = [row.entropy for row in scan_rows]  # descending Z order
    if not all(b > a for a, b in zip(entropies, entropies[1:])):
        failures.append("entropy is not strictly increasing as Z decreases")
    rise_low = float(rows["0.890"].entropy - rows["0.920"].entropy)
    rise_high = float(rows["0.970"].entropy - rows["1.000"].entropy)
    if not rise_low > rise_high:
        failures.append(
            f"threshold rise {rise_low:.3f} does not exceed bound rise {rise_high:.3f}"
        )
    max_jump = max(abs(float(b - a)) for a, b in zip(entropies, entropies[1:]))
    if max_jump > 3.0:
        failures.append(f"adjacent entropy jump {max_jump:.2f} exceeds 3.0")

    _report(
        "AC5",
        failures,
        f"omega 15 scan: {len(SCAN_BOUND_MARKS)} bound marks, monotone rise, "
        f"max adjacent jump {max_jump:.2f}",
    )


@pytest.mark.slow
def test_ac6_norm_residuals(scan_rows, om12_entropies, free_states):
    failures = []
    worst = 0.0
    count = 0
    for row in scan_rows:
        if row.entropy_converged:
            count += 1
            worst = max(worst, float(row.norm_residual))
            if row.norm_residual >= mpfr(TOL_NORM_RESIDUAL):
                failures.append(f"scan Z={float(row.z):.3f}: {float(row.norm_residual):.2e}")
    for key, result in om12_entropies.items():
        if result.converged:
            count += 1
            worst = max(worst, float(result.norm_residual))
            if result.norm_residual >= mpfr(TOL_NORM_RESIDUAL):
                failures.append(f"{key}: {float(result.norm_residual):.2e}")
    for z, (_, result) in free_states.items():
        if result.converged:
            count += 1
            worst = max(worst, float(result.norm_residual))
            if result.norm_residual >= mpfr(TOL_NORM_RESIDUAL):
                failures.append(f"free Z={z}: {float(result.norm_residual):.2e}")
    _report(
        "AC6",
        failures,
        f"norm residual < 1e-8 on {count} converged entropies (worst {worst:.1e})",
    )


def test_ac7_free_system_closed_forms(free_states):
    failures = []
    details = []
    with working_precision(256):
        for z, (sol, entropy) in free_states.items():
            err_e = abs(float(sol.energy + z * z))
            err_s = abs(float(entropy.value - hydrogenic_entropy(z)))
            if err_e > TOL_FREE_ENERGY:
                failures.append(f"Z={z} energy off by {err_e:.2e}")
            if not entropy.converged:
                failures.append(f"Z={z} entropy did not converge")
            if err_s > TOL_FREE_ENTROPY:
                failures.append(f"Z={z} entropy off by {err_s:.2e}")
            details.append(f"Z={z} {err_e:.1e}/{err_s:.1e}")
    _report(
        "AC7",
        failures,
        "repulsion off: E = -Z^2 and S_r = 3 + ln pi - 3 ln Z "
        f"({', '.join(details)})",
    )


def test_ac8_integral_oracle_batch():
    rng = random.Random(8675309)
    failures = []
    t0 = time.perf_counter()
    worst = 0.0
    with working_precision(256):
        for _ in range(50):
            key = IntegralKey(
                rng.randint(0, 6),
                rng.randint(0, 6),
                rng.randint(0, 6),
                mpfr(f"{rng.uniform(0.3, 4):.6f}"),
                mpfr(f"{rng.uniform(0.3, 4):.6f}"),
            )
            exact = float(base_integral(key))
            approx = base_integral_oracle(key)
            rel = abs(approx / exact - 1)
            worst = max(worst, rel)
            if rel > TOL_ORACLE_REL:
                failures.append(f"{tuple(key[:3])} rel {rel:.2e}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 60:
        failures.append(f"batch took {elapsed:.1f}s, budget is 60s")
    _report(
        "AC8",
        failures,
        f"50 random keys vs oracle, worst rel {worst:.1e} in {elapsed:.1f}s",
    )


@pytest.mark.slow
def test_ac9_virial_ratio_on_every_optimized_state():
    failures = []
    worst = 0.0
    for key in SYSTEMS:
        for omega in (9, 12, 15):
            wf = artifact_store.ensure_wavefunction(key, omega)
            with working_precision(wf.bits):
                ops = assemble_operators(wf.system, wf.basis)
                t, v = virial_quantities(ops, list(wf.coefficients))
                energy = t + v
                dev = abs(float(v / energy - 2))
                drift = abs(float((energy - wf.energy) / energy))
            worst = max(worst, dev)
            if dev > TOL_VIRIAL:
                failures.append(f"{key} omega={omega} |V/E - 2| = {dev:.2e}")
            if drift > 1e-18:
                failures.append(
                    f"{key} omega={omega} archived energy drifts by {drift:.2e}"
                )
    _report(
        "AC9",
        failures,
        f"12 optimized states, worst |V/E - 2| = {worst:.1e}",
    )


def test_ac10_density_against_oracle():
    failures = []
    res = optimize_parameters(SystemSpec.nucleus(2), 5, budget=80)
    wf = res.state.wavefunction()
    with working_precision(wf.bits):
        profile = radial_density(wf)
        worst = 0.0
        for r in ("0.1", "1", "5"):
            closed = float(density_at(profile, mpfr(r)))
            direct = density_oracle(wf, float(r))
            rel = abs(direct / closed - 1)
            worst = max(worst, rel)
            if rel > TOL_DENSITY_REL:
                failures.append(f"r={r} rel {rel:.2e}")
    _report(
        "AC10",
        failures,
        f"helium omega 5 density vs 2-D quadrature, worst rel {worst:.1e}",
    )
