import math
import random

import gmpy2
import numpy as np
import pytest
from gmpy2 import mpfr

from helike.linalg import (
    NotPositiveDefiniteError,
    SingularShiftError,
    apply_reflectors,
    bisect_eigenvalue,
    cholesky_lower,
    dot,
    gershgorin_bounds,
    householder_tridiagonal,
    ldl_inertia,
    ldl_solve,
    lowest_tridiag_eigenpairs,
    mat_vec,
    norm2,
    pencil_residual,
    reduce_to_standard,
    solve_lower,
    solve_lower_transpose,
    sturm_count,
)
from helike.precision import working_precision

TIGHT = mpfr("1e-60")


def rand_vector(rng, n):
    return [mpfr(f"{rng.uniform(-1, 1):.12f}") for _ in range(n)]


def rand_symmetric(rng, n):
    a = [[mpfr(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            v = mpfr(f"{rng.uniform(-1, 1):.12f}")
            a[i][j] = v
            a[j][i] = v
    return a


def rand_spd(rng, n):
    # M^T M + n I is comfortably positive definite
    m = rand_symmetric(rng, n)
    a = [[dot([m[k][i] for k in range(n)], [m[k][j] for k in range(n)]) for j in range(n)] for i in range(n)]
    for i in range(n):
        a[i][i] += n
    return a


def lower_times_transpose(l, n):
    out = [[mpfr(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = sum(
                (l[i][k] * l[j][k] for k in range(min(i, j) + 1)), mpfr(0)
            )
    return out


def max_abs_diff(a, b):
    return max(abs(x - y) for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def as_float_array(a):
    return np.array([[float(v) for v in row] for row in a])


def test_cholesky_recomposes():
    with working_precision(256):
        rng = random.Random(3)
        n = 9
        a = rand_spd(rng, n)
        l = cholesky_lower(a)
        assert max_abs_diff(lower_times_transpose(l, n), a) < TIGHT


def test_cholesky_flags_indefinite_input():
    with working_precision(256):
        a = [[mpfr(1), mpfr(2)], [mpfr(2), mpfr(1)]]  # eigenvalues 3, -1
        with pytest.raises(NotPositiveDefiniteError) as info:
            cholesky_lower(a)
        assert info.value.index == 1
        assert info.value.pivot < 0


def test_triangular_solves_round_trip():
    with working_precision(256):
        rng = random.Random(5)
        n = 8
        l = cholesky_lower(rand_spd(rng, n))
        b = rand_vector(rng, n)
        x = solve_lower(l, b)
        rebuilt = [
            sum((l[i][k] * x[k] for k in range(i + 1)), mpfr(0)) for i in range(n)
        ]
        assert max(abs(u - v) for u, v in zip(rebuilt, b)) < TIGHT

        y = solve_lower_transpose(l, b)
        rebuilt_t = [
            sum((l[k][i] * y[k] for k in range(i, n)), mpfr(0)) for i in range(n)
        ]
        assert max(abs(u - v) for u, v in zip(rebuilt_t, b)) < TIGHT


def test_reduce_to_standard_is_the_congruence():
    with working_precision(256):
        rng = random.Random(11)
        n = 7
        s = rand_spd(rng, n)
        h = rand_symmetric(rng, n)
        l = cholesky_lower(s)
        m = reduce_to_standard(l, h)
        # check L M L^T == H without inverting anything
        full_l = [[l[i][j] if j <= i else mpfr(0) for j in range(n)] for i in range(n)]
        lm = [
            [dot(full_l[i], [m[k][j] for k in range(n)]) for j in range(n)]
            for i in range(n)
        ]
        lml = [[dot(lm[i], full_l[j]) for j in range(n)] for i in range(n)]
        assert max_abs_diff(lml, h) < TIGHT


def test_householder_preserves_the_spectrum():
    with working_precision(256):
        rng = random.Random(17)
        n = 10
        a = rand_symmetric(rng, n)
        d, e, reflectors = householder_tridiagonal(a)
        lam, y = lowest_tridiag_eigenpairs(d, e, 1)[0]
        z = apply_reflectors(reflectors, y)
        az = mat_vec(a, z)
        resid = norm2([az[i] - lam * z[i] for i in range(n)])
        assert resid < mpfr("1e-55")
        want = np.linalg.eigvalsh(as_float_array(a))[0]
        assert abs(float(lam) - want) < 1e-12


def test_bisection_on_the_discrete_laplacian():
    # d_i = 2, e_i = -1 has eigenvalues 2 - 2 cos(k pi / (n+1))
    with working_precision(256):
        n = 12
        d = [mpfr(2)] * n
        e = [mpfr(-1)] * (n - 1)
        e2 = [v * v for v in e]
        lo, hi = gershgorin_bounds(d, e)
        assert sturm_count(d, e2, lo) == 0
        assert sturm_count(d, e2, hi) == n
        for idx in range(n):
            lam = bisect_eigenvalue(d, e2, idx, lo, hi)
            want = 2 - 2 * gmpy2.cos((idx + 1) * gmpy2.const_pi() / (n + 1))
            assert abs(lam - want) < mpfr("1e-70")


def test_sturm_count_matches_numpy():
    with working_precision(256):
        rng = random.Random(23)
        n = 9
        a = rand_symmetric(rng, n)
        d, e, _ = householder_tridiagonal(a)
        e2 = [v * v for v in e]
        spectrum = np.linalg.eigvalsh(as_float_array(a))
        for x in (-1.5, -0.3, 0.0, 0.4, 2.0):
            assert sturm_count(d, e2, mpfr(x)) == int((spectrum < x).sum())


def test_lowest_pairs_are_orthonormal_and_ordered():
    with working_precision(256):
        rng = random.Random(29)
        a = rand_symmetric(rng, 8)
        d, e, _ = householder_tridiagonal(a)
        pairs = lowest_tridiag_eigenpairs(d, e, 3)
        assert pairs[0][0] <= pairs[1][0] <= pairs[2][0]
        for i, (_, yi) in enumerate(pairs):
            for j, (_, yj) in enumerate(pairs):
                want = mpfr(1) if i == j else mpfr(0)
                assert abs(dot(yi, yj) - want) < mpfr("1e-40")
        with pytest.raises(ValueError):
            lowest_tridiag_eigenpairs(d, e, 0)
        with pytest.raises(ValueError):
            lowest_tridiag_eigenpairs(d, e, 9)


def test_ldl_inertia_counts_eigenvalues_below_shift():
    with working_precision(256):
        rng = random.Random(31)
        n = 8
        a = rand_symmetric(rng, n)
        spectrum = np.linalg.eigvalsh(as_float_array(a))
        for shift in (-2.0, -0.25, 0.1, 0.9, 3.0):
            shifted = [
                [a[i][j] - (mpfr(shift) if i == j else 0) for j in range(i + 1)]
                for i in range(n)
            ]
            _, _, neg = ldl_inertia(shifted)
            assert neg == int((spectrum < shift).sum())


def test_ldl_zero_pivot_raises():
    with working_precision(256):
        # diag(1, 2, 3) shifted by exactly 2 hits a vanishing pivot
        a = [[mpfr(0)] * 3 for _ in range(3)]
        a[0][0], a[1][1], a[2][2] = mpfr(-1), mpfr(0), mpfr(1)
        with pytest.raises(SingularShiftError):
            ldl_inertia(a)


def test_ldl_solve_inverts_indefinite_systems():
    with working_precision(256):
        rng = random.Random(37)
        n = 8
        a = rand_symmetric(rng, n)
        for i in range(n):
            a[i][i] += mpfr(i - n // 2)  # keep it indefinite on purpose
        lower = [a[i][: i + 1] for i in range(n)]
        l, dvals, _ = ldl_inertia(lower)
        b = rand_vector(rng, n)
        x = ldl_solve(l, dvals, b)
        assert max(abs(u - v) for u, v in zip(mat_vec(a, x), b)) < mpfr("1e-55")


def test_pencil_residual_vanishes_on_exact_pairs():
    with working_precision(256):
        s = [[mpfr(2), mpfr(0)], [mpfr(0), mpfr(1)]]
        h = [[mpfr(6), mpfr(0)], [mpfr(0), mpfr(5)]]
        rnorm, hnorm = pencil_residual(h, s, mpfr(3), [mpfr(1), mpfr(0)])
        assert rnorm == 0
        assert hnorm == 6
        rnorm, _ = pencil_residual(h, s, mpfr(5), [mpfr(0), mpfr(1)])
        assert rnorm == 0


def test_norms_and_products_agree_with_math():
    with working_precision(256):
        x = [mpfr(3), mpfr(4)]
        assert norm2(x) == 5
        assert dot(x, [mpfr(2), mpfr(-1)]) == 2
        assert math.isclose(float(norm2(x)), 5.0)
