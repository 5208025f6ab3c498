"""Dense symmetric linear algebra on gmpy2 floats.

Plain list-of-list matrices, row major.  Everything here runs at the
active gmpy2 context precision; callers pick the width.  The routines
cover exactly what the eigensolver needs: Cholesky and LDL^T
factorizations, triangular solves, the congruence reduction of a
symmetric-definite pencil, Householder tridiagonalization, Sturm-count
bisection, and tridiagonal inverse iteration.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpfr

fma = gmpy2.fma

Matrix = list  # list[list[mpfr]], full square unless noted
Vector = list  # list[mpfr]


class NotPositiveDefiniteError(RuntimeError):
    """Cholesky hit a nonpositive pivot; carries the failing index."""

    def __init__(self, index: int, pivot) -> None:
        super().__init__(f"nonpositive pivot {pivot} at index {index}")
        self.index = index
        self.pivot = pivot


class SingularShiftError(RuntimeError):
    """LDL^T met a vanishing pivot: the shift sits on an eigenvalue."""


def zeros(n: int) -> Matrix:
    z = mpfr(0)
    return [[z] * n for _ in range(n)]


def dot(x: Vector, y: Vector) -> mpfr:
    acc = mpfr(0)
    for a, b in zip(x, y):
        acc = fma(a, b, acc)
    return acc


def norm2(x: Vector) -> mpfr:
    return gmpy2.sqrt(dot(x, x))


def mat_vec(a: Matrix, x: Vector) -> Vector:
    out = []
    zero = mpfr(0)
    for row in a:
        acc = zero
        for r, v in zip(row, x):
            acc = fma(r, v, acc)
        out.append(acc)
    return out


def cholesky_lower(a: Matrix) -> Matrix:
    """L with A = L L^T, reading only the lower triangle of A.

    Rows of the result have length i+1.  Raises NotPositiveDefiniteError
    on the first nonpositive pivot so the caller can escalate precision.
    """
    n = len(a)
    l: Matrix = [a[i][: i + 1].copy() for i in range(n)]
    for j in range(n):
        lj = l[j]
        acc = lj[j]
        for v in lj[:j]:
            acc = fma(-v, v, acc)
        if not acc > 0:
            raise NotPositiveDefiniteError(j, acc)
        piv = gmpy2.sqrt(acc)
        lj[j] = piv
        inv = 1 / piv
        neg = [-v for v in lj[:j]]
        for i in range(j + 1, n):
            li = l[i]
            s = li[j]
            for p, q in zip(li, neg):
                s = fma(p, q, s)
            li[j] = s * inv
    return l


def solve_lower(l: Matrix, b: Vector) -> Vector:
    """x with L x = b (forward substitution)."""
    x: Vector = []
    for li, bi in zip(l, b):
        acc = bi
        for p, q in zip(li, x):
            acc = fma(-p, q, acc)
        x.append(acc / li[len(x)])
    return x


def solve_lower_transpose(l: Matrix, b: Vector) -> Vector:
    """x with L^T x = b, swept column-wise so rows of L stay contiguous."""
    n = len(b)
    x: Vector = list(b)
    for k in range(n - 1, -1, -1):
        lk = l[k]
        xk = x[k] / lk[k]
        x[k] = xk
        nxk = -xk
        for i in range(k):
            x[i] = fma(lk[i], nxk, x[i])
    return x


def reduce_to_standard(l: Matrix, h: Matrix) -> Matrix:
    """M = L^{-1} H L^{-T}, symmetrized from its lower triangle.

    Two forward-substitution sweeps over negated L rows; the second one
    exploits symmetry of the target and fills the upper half by
    mirroring.
    """
    n = len(h)
    nl = [[-v for v in row[:i]] for i, row in enumerate(l)]
    invs = [1 / l[i][i] for i in range(n)]
    # X = L^{-1} H, one right-hand column at a time; H is symmetric so
    # column c of H is its row c
    x: Matrix = [[] for _ in range(n)]
    for c in range(n):
        hc = h[c]
        xc: Vector = []
        for i in range(n):
            acc = hc[i]
            for p, q in zip(nl[i], xc):
                acc = fma(p, q, acc)
            xc.append(acc * invs[i])
        for i, v in enumerate(xc):
            x[i].append(v)
    # M = L^{-1} X^T, column r of X^T is row r of X
    m: Matrix = [[mpfr(0)] * n for _ in range(n)]
    for r in range(n):
        xr = x[r]
        col: Vector = []
        for i in range(r + 1):
            acc = xr[i]
            for p, q in zip(nl[i], col):
                acc = fma(p, q, acc)
            col.append(acc * invs[i])
        mr = m[r]
        for i in range(r + 1):
            v = col[i]
            mr[i] = v
            m[i][r] = v
    return m


def householder_tridiagonal(a: Matrix):
    """Reduce symmetric A to tridiagonal T = Q^T A Q.

    Returns (d, e, reflectors) where d is the diagonal, e the subdiagonal,
    and reflectors a list of (k, beta, v) with v acting on rows k+1..n-1.
    Only the lower triangle of the work copy is referenced or updated.
    """
    n = len(a)
    w = [row.copy() for row in a]
    for i in range(n):
        wi = w[i]
        for j in range(i + 1, n):
            wi[j] = w[j][i]
    reflectors = []
    for k in range(n - 2):
        x = [w[i][k] for i in range(k + 1, n)]
        tail = mpfr(0)
        for t in x[1:]:
            tail = fma(t, t, tail)
        if tail == 0:
            continue
        x0 = x[0]
        nrm = gmpy2.sqrt(fma(x0, x0, tail))
        alpha = -nrm if x0 >= 0 else nrm
        v = x
        v[0] = x0 - alpha
        vsq = fma(v[0], v[0], tail)
        beta = 2 / vsq
        r = n - k - 1
        # p = beta * A22 * v over the trailing block
        p: Vector = []
        for ii in range(r):
            gi = k + 1 + ii
            rowi = w[gi]
            acc = mpfr(0)
            for jj in range(r):
                gj = k + 1 + jj
                if gj <= gi:
                    acc = fma(rowi[gj], v[jj], acc)
                else:
                    acc = fma(w[gj][gi], v[jj], acc)
            p.append(beta * acc)
        half = beta * dot(p, v) / 2
        ww = [p[ii] - half * v[ii] for ii in range(r)]
        for ii in range(r):
            gi = k + 1 + ii
            rowi = w[gi]
            vi = v[ii]
            wwi = ww[ii]
            for jj in range(ii + 1):
                gj = k + 1 + jj
                rowi[gj] = rowi[gj] - vi * ww[jj] - wwi * v[jj]
        w[k + 1][k] = alpha
        reflectors.append((k, beta, v))
    d = [w[i][i] for i in range(n)]
    e = [w[i + 1][i] for i in range(n - 1)]
    return d, e, reflectors


def apply_reflectors(reflectors, y: Vector) -> Vector:
    """Map a tridiagonal-basis vector back: y <- Q y."""
    out = y.copy()
    n = len(out)
    for k, beta, v in reversed(reflectors):
        seg = out[k + 1 : n]
        t = beta * dot(v, seg)
        for i in range(len(seg)):
            out[k + 1 + i] = seg[i] - t * v[i]
    return out


def sturm_count(d: Vector, e2: Vector, x) -> int:
    """Number of eigenvalues of the tridiagonal matrix strictly below x.

    e2 holds squared subdiagonal entries.  The shifted LDL^T recurrence
    counts negative pivots; exact-zero pivots are nudged by a tiny amount
    so the count stays well defined.
    """
    n = len(d)
    tiny = mpfr(2) ** (-2 * gmpy2.get_context().precision)
    count = 0
    q = d[0] - x
    if q < 0:
        count = 1
    for i in range(1, n):
        if q == 0:
            q = tiny
        q = d[i] - x - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def gershgorin_bounds(d: Vector, e: Vector):
    n = len(d)
    lo = hi = None
    for i in range(n):
        radius = mpfr(0)
        if i > 0:
            radius += abs(e[i - 1])
        if i < n - 1:
            radius += abs(e[i])
        a, b = d[i] - radius, d[i] + radius
        lo = a if lo is None or a < lo else lo
        hi = b if hi is None or b > hi else hi
    return lo, hi


def bisect_eigenvalue(d: Vector, e2: Vector, index: int, lo, hi) -> mpfr:
    """index-th smallest eigenvalue (0-based) by Sturm bisection.

    Bisects until the bracket width reaches a few ulps of its endpoints
    at the active precision.
    """
    bits = gmpy2.get_context().precision
    scale = max(abs(lo), abs(hi), mpfr(1))
    stop = scale * mpfr(2) ** (8 - bits)
    while sturm_count(d, e2, lo) > index:
        lo -= scale
    while sturm_count(d, e2, hi) < index + 1:
        hi += scale
    while hi - lo > stop:
        mid = (lo + hi) / 2
        if mid <= lo or mid >= hi:
            break
        if sturm_count(d, e2, mid) > index:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def _tridiag_factor(d: Vector, e: Vector, lam):
    """Partial-pivot LU of (T - lam I) for a symmetric tridiagonal T."""
    n = len(d)
    bits = gmpy2.get_context().precision
    scale = max(max(abs(v) for v in d), mpfr(1))
    tiny = scale * mpfr(2) ** (-2 * bits)
    u0 = [d[i] - lam for i in range(n)]
    u1 = e.copy() + [mpfr(0)]
    u2 = [mpfr(0)] * n
    lmul = [mpfr(0)] * n
    swap = [False] * n
    for i in range(n - 1):
        sub = e[i]
        if abs(sub) > abs(u0[i]):
            swap[i] = True
            u0[i], sub = sub, u0[i]
            u0[i + 1], u1[i] = u1[i], u0[i + 1]
            u2[i], u1[i + 1] = u1[i + 1], mpfr(0)
        if u0[i] == 0:
            u0[i] = tiny
        mult = sub / u0[i]
        lmul[i] = mult
        u0[i + 1] = u0[i + 1] - mult * u1[i]
        u1[i + 1] = u1[i + 1] - mult * u2[i]
    if u0[n - 1] == 0:
        u0[n - 1] = tiny
    return u0, u1, u2, lmul, swap


def _tridiag_solve(factors, b: Vector) -> Vector:
    u0, u1, u2, lmul, swap = factors
    n = len(u0)
    y = b.copy()
    for i in range(n - 1):
        if swap[i]:
            y[i], y[i + 1] = y[i + 1], y[i]
        y[i + 1] = y[i + 1] - lmul[i] * y[i]
    x = [mpfr(0)] * n
    for i in range(n - 1, -1, -1):
        acc = y[i]
        if i + 1 < n:
            acc -= u1[i] * x[i + 1]
        if i + 2 < n:
            acc -= u2[i] * x[i + 2]
        x[i] = acc / u0[i]
    return x


def tridiag_eigenvector(d: Vector, e: Vector, lam) -> Vector:
    """Unit eigenvector for an isolated eigenvalue, by inverse iteration.

    Deterministic all-ones start, three fixed sweeps; accuracy is
    certified later by the full-pencil residual, not here.
    """
    n = len(d)
    factors = _tridiag_factor(d, e, lam)
    x = [mpfr(1)] * n
    nrm = norm2(x)
    x = [v / nrm for v in x]
    for _ in range(3):
        x = _tridiag_solve(factors, x)
        nrm = norm2(x)
        x = [v / nrm for v in x]
    return x


def lowest_tridiag_eigenpairs(d: Vector, e: Vector, count: int):
    """The `count` smallest eigenpairs of the tridiagonal matrix.

    Near-degenerate vectors are re-orthogonalized against earlier ones.
    Returns a list of (lam, y) with lam nondecreasing and y unit length.
    """
    n = len(d)
    if count < 1 or count > n:
        raise ValueError(f"count must be in 1..{n}, got {count}")
    e2 = [v * v for v in e]
    lo, hi = gershgorin_bounds(d, e)
    pairs = []
    for idx in range(count):
        lam = bisect_eigenvalue(d, e2, idx, lo, hi)
        y = tridiag_eigenvector(d, e, lam)
        for plam, py in pairs:
            proj = dot(py, y)
            y = [y[i] - proj * py[i] for i in range(n)]
        nrm = norm2(y)
        if nrm == 0:
            raise SingularShiftError("inverse iteration collapsed inside a cluster")
        y = [v / nrm for v in y]
        pairs.append((lam, y))
    return pairs


def ldl_inertia(a: Matrix):
    """LDL^T without pivoting on the lower triangle of A.

    Returns (L, D, negatives) where negatives counts D entries below zero.
    A vanishing pivot raises SingularShiftError: the caller should move
    the spectral shift rather than trust the factorization.
    """
    n = len(a)
    l: Matrix = [a[i][: i + 1].copy() for i in range(n)]
    dvals: Vector = []
    negd: Vector = []  # -D, so column updates are a single fma per term
    neg = 0
    mul = gmpy2.mul
    for j in range(n):
        lj = l[j]
        acc = lj[j]
        w = list(map(mul, lj, negd))
        for p, q in zip(lj, w):
            acc = fma(p, q, acc)
        if acc == 0:
            raise SingularShiftError(f"zero pivot at index {j}")
        dvals.append(acc)
        negd.append(-acc)
        if acc < 0:
            neg += 1
        inv = 1 / acc
        lj[j] = mpfr(1)
        for i in range(j + 1, n):
            li = l[i]
            s = li[j]
            for p, q in zip(li, w):
                s = fma(p, q, s)
            li[j] = s * inv
    return l, dvals, neg


def ldl_solve(l: Matrix, dvals: Vector, b: Vector) -> Vector:
    # unit lower triangle: forward pass ignores the stored diagonal ones
    y: Vector = []
    for li, bi in zip(l, b):
        acc = bi
        for p, q in zip(li, y):
            acc = fma(-p, q, acc)
        y.append(acc)
    n = len(b)
    x: Vector = [yi / di for yi, di in zip(y, dvals)]
    for k in range(n - 1, -1, -1):
        lk = l[k]
        nxk = -x[k]
        for i in range(k):
            x[i] = fma(lk[i], nxk, x[i])
    return x


def pencil_residual(h: Matrix, s: Matrix, energy, c: Vector):
    """(||H c - E S c||_2, ||H c||_2) for the certificate."""
    hc = mat_vec(h, c)
    sc = mat_vec(s, c)
    r = [fma(-energy, sc[i], hc[i]) for i in range(len(c))]
    return norm2(r), norm2(hc)
