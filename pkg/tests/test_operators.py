import gmpy2
import pytest
from gmpy2 import mpfr

from helike.basis import BasisSpec
from helike.linalg import cholesky_lower
from helike.operators import (
    MatrixPair,
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
from helike.precision import working_precision

TIGHT = mpfr("1e-70")


class TestSystemSpec:
    def test_nucleus_requires_positive_charge(self):
        spec = SystemSpec.nucleus(2)
        assert spec.z == 2
        assert spec.charge_coefficient == 2
        assert spec.threshold_energy() == -2
        for bad in (0, -1, "nan"):
            with pytest.raises(ValueError):
                SystemSpec.nucleus(bad)
        with pytest.raises(ValueError):
            SystemSpec("nucleus")

    def test_ps_minus_shape(self):
        spec = SystemSpec.ps_minus()
        assert spec.z is None
        assert spec.mass_polarization
        assert spec.charge_coefficient == 1
        assert spec.threshold_energy() == mpfr("-0.25")
        with pytest.raises(ValueError):
            SystemSpec("ps_minus", mpfr(1))
        with pytest.raises(ValueError):
            SystemSpec("ps_minus", None, False)

    def test_interaction_toggle_describes_itself(self):
        spec = SystemSpec.nucleus(3, interaction_on=False)
        assert not spec.interaction_on
        assert "no e-e" in spec.describe()
        with pytest.raises(ValueError):
            SystemSpec("molecule", mpfr(1))


def test_single_term_overlap_closed_form():
    # omega 0 at alpha = beta = 1: the symmetrized exponential doubles,
    # so <phi|phi> = 4 pi^2 exactly
    with working_precision(256):
        s = assemble_overlap(BasisSpec(0, 1, 1))
        want = 4 * gmpy2.const_pi() ** 2
        assert abs(s[0][0] - want) / want < TIGHT


def symmetry_defect(mat):
    n = len(mat)
    return max(
        abs(mat[i][j] - mat[j][i]) for i in range(n) for j in range(i)
    ) if n > 1 else mpfr(0)


def test_component_matrices_are_symmetric():
    with working_precision(256):
        ops = assemble_operators(SystemSpec.nucleus(2), BasisSpec(3, "1.6", "0.9"))
        for mat in (ops.overlap, ops.kinetic, ops.nuclear, ops.repulsion):
            assert symmetry_defect(mat) == 0
        r1_mat, r12_mat = assemble_moments(BasisSpec(3, "1.6", "0.9"))
        assert symmetry_defect(r1_mat) == 0
        assert symmetry_defect(r12_mat) == 0


def test_overlap_is_positive_definite():
    with working_precision(256):
        ops = assemble_operators(SystemSpec.ps_minus(), BasisSpec(4, "0.4", "0.55"))
        cholesky_lower(ops.overlap)  # raises if not definite


def test_hamiltonian_recombines_components():
    with working_precision(256):
        ops = assemble_operators(SystemSpec.nucleus(2), BasisSpec(2, "1.8", "1.2"))
        n = ops.size
        for z in (None, mpfr("0.93")):
            h = ops.hamiltonian(z)
            zc = ops.system.charge_coefficient if z is None else z
            for i in range(n):
                for j in range(n):
                    want = ops.kinetic[i][j] + zc * ops.nuclear[i][j] + ops.repulsion[i][j]
                    assert abs(h[i][j] - want) <= TIGHT * max(abs(want), mpfr(1))


def test_interaction_off_drops_repulsion():
    with working_precision(256):
        basis = BasisSpec(2, 2, 2)
        free = assemble_operators(SystemSpec.nucleus(2, interaction_on=False), basis)
        h = free.hamiltonian()
        v = free.potential_matrix()
        n = free.size
        for i in range(n):
            for j in range(n):
                want_h = free.kinetic[i][j] + 2 * free.nuclear[i][j]
                assert abs(h[i][j] - want_h) <= TIGHT * max(abs(want_h), mpfr(1))
                want_v = 2 * free.nuclear[i][j]
                assert abs(v[i][j] - want_v) <= TIGHT * max(abs(want_v), mpfr(1))


def test_nuclear_attraction_is_negative_diagonal():
    with working_precision(256):
        ops = assemble_operators(SystemSpec.nucleus(1), BasisSpec(2, 1, 1))
        for i in range(ops.size):
            assert ops.nuclear[i][i] < 0
            assert ops.repulsion[i][i] > 0
            assert ops.kinetic[i][i] > 0
            assert ops.overlap[i][i] > 0


def test_matrix_pair_validates_shape():
    with pytest.raises(ValueError):
        MatrixPair([[mpfr(1)]], [[mpfr(1), mpfr(0)], [mpfr(0), mpfr(1)]])
    with pytest.raises(ValueError):
        MatrixPair([[mpfr(1), mpfr(0)]], [[mpfr(1), mpfr(0)]])


def test_wavefunction_checks_coefficient_count():
    with working_precision(256):
        basis = BasisSpec(1, 1, 1)
        with pytest.raises(ValueError):
            Wavefunction(SystemSpec.nucleus(2), basis, mpfr(-1), (mpfr(1),), 256)


def unit_exponential_state():
    # the omega 0 basis holds exactly one normalized state
    basis = BasisSpec(0, 1, 1)
    c0 = 1 / (2 * gmpy2.const_pi())
    return Wavefunction(SystemSpec.nucleus(2), basis, mpfr(-4), (c0,), 256)


class TestExpectations:
    def test_product_state_closed_forms(self):
        # independent unit-decay orbitals: <r1> = 3/2, <r12> = 35/16
        with working_precision(256):
            wf = unit_exponential_state()
            r1, r12 = expectation_values(wf)
            assert abs(r1 - mpfr(3) / 2) < mpfr("1e-70")
            assert abs(r12 - mpfr(35) / 16) < mpfr("1e-70")
            assert expectation_r1(wf) == r1
            assert expectation_r12(wf) == r12

    def test_rejects_unnormalized_states(self):
        with working_precision(256):
            wf = unit_exponential_state()
            off = Wavefunction(
                wf.system,
                wf.basis,
                wf.energy,
                tuple(c * mpfr("1.001") for c in wf.coefficients),
                wf.bits,
            )
            with pytest.raises(ValueError, match="not normalized"):
                expectation_values(off)

    def test_norm_residual_measures_the_defect(self):
        with working_precision(256):
            wf = unit_exponential_state()
            s = assemble_overlap(wf.basis)
            c = [mpfr(v) for v in wf.coefficients]
            assert norm_residual(s, c) < mpfr("1e-70")
            assert abs(norm_residual(s, [2 * c[0]]) - 3) < mpfr("1e-69")
            assert norm_residual(s, c) == abs(quadratic_form(s, c) - 1)


def test_mass_polarization_changes_the_kinetic_matrix():
    with working_precision(256):
        basis = BasisSpec(2, "0.5", "0.5")
        plain = assemble_operators(SystemSpec.nucleus(1), basis)
        ps = assemble_operators(SystemSpec.ps_minus(), basis)
        defect = max(
            abs(plain.kinetic[i][j] - ps.kinetic[i][j])
            for i in range(plain.size)
            for j in range(plain.size)
        )
        assert defect > mpfr("1e-10")
        # attraction and repulsion integrals are charge-independent
        assert plain.nuclear[0][0] == ps.nuclear[0][0]
        assert plain.repulsion[0][0] == ps.repulsion[0][0]
