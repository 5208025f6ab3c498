import pytest
from gmpy2 import mpfr
from hypothesis import given
from hypothesis import strategies as st

from helike.basis import BasisSpec, HylleraasTerm, basis_size, enumerate_basis

from reference_values import REFERENCE_BASIS_SIZES


def brute_count(omega: int) -> int:
    return sum(
        1
        for k in range(omega + 1)
        for m in range(omega + 1)
        for n in range(omega + 1)
        if k + m + n <= omega and m <= n
    )


def test_enumeration_matches_constraints():
    for omega in range(8):
        terms = enumerate_basis(omega)
        assert len(terms) == len(set(terms))
        for k, m, n in terms:
            assert k >= 0 and m >= 0 and n >= 0
            assert k + m + n <= omega
            assert m <= n


def test_enumeration_is_lexicographic():
    terms = enumerate_basis(6)
    assert terms == sorted(terms)
    assert terms[0] == HylleraasTerm(0, 0, 0)


@given(st.integers(min_value=0, max_value=14))
def test_size_formula_counts_the_enumeration(omega):
    assert basis_size(omega) == len(enumerate_basis(omega)) == brute_count(omega)


def test_documented_sizes():
    for omega, n in REFERENCE_BASIS_SIZES.items():
        assert basis_size(omega) == n


def test_negative_omega_rejected():
    with pytest.raises(ValueError):
        enumerate_basis(-1)
    with pytest.raises(ValueError):
        basis_size(-2)


class TestBasisSpec:
    def test_terms_default_to_enumeration(self):
        spec = BasisSpec(3, "1.5", "2.0")
        assert spec.terms == tuple(enumerate_basis(3))
        assert spec.size == basis_size(3)
        assert spec.alpha == mpfr("1.5")

    def test_rejects_noncanonical_terms(self):
        good = tuple(enumerate_basis(2))
        with pytest.raises(ValueError):
            BasisSpec(2, 1, 1, good[::-1])
        with pytest.raises(ValueError):
            BasisSpec(2, 1, 1, good[:-1])

    def test_rejects_nonpositive_decays(self):
        for alpha, beta in ((0, 1), (1, 0), (-2, 1), ("nan", 1)):
            with pytest.raises(ValueError):
                BasisSpec(2, alpha, beta)

    def test_with_parameters_shares_terms(self):
        spec = BasisSpec(4, 1, 2)
        other = spec.with_parameters("0.7", "0.9")
        assert other.terms is spec.terms
        assert other.omega == 4
        assert other.beta == mpfr("0.9")
