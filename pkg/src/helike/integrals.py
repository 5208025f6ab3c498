"""Closed-form radial integrals over the two-electron triangle region.

The workhorse is

    base_integral(l, m, n; a, b) =
        integral over r1, r2 in (0, inf), |r1 - r2| <= r12 <= r1 + r2
        of r1^l r2^m r12^n e^{-a r1 - b r2}  dr1 dr2 dr12,

with integer powers >= 0 and positive decays.  Integrating r12 first and
expanding the binomials reduces it to sums of

    T(p, q)       = p! q! / (a^{p+1} b^{q+1})          (full quadrant)
    W(p, q; a, b) = q!/b^{q+1} * sum_{k<=q} (b^k/k!) (p+k)!/(a+b)^{p+k+1}
                                                        (wedge r2 > r1)

where T(p, q) = W(p, q; a, b) + W(q, p; b, a) exactly.  Using that identity
the signed binomial sum collapses case-by-case on parity to

    j odd,  n+1-j odd   ->  2 T(l+j, m+n+1-j)
    j odd,  n+1-j even  ->  2 W(l+j, m+n+1-j; a, b)
    j even, n+1-j odd   ->  2 W(m+n+1-j, l+j; b, a)
    j even, n+1-j even  ->  0

so every surviving term is positive and the result carries no cancellation
at all.  Kernels memoize per decay pair since assembly revisits the same
(a, b) thousands of times.
"""

from __future__ import annotations

import threading
from typing import NamedTuple

import gmpy2
from gmpy2 import mpfr

from .precision import current_bits, working_precision


class OracleConvergenceError(RuntimeError):
    """Raised when the adaptive cross-check quadrature fails to settle."""


class IntegralKey(NamedTuple):
    l: int
    m: int
    n: int
    a: mpfr
    b: mpfr


def validate_key(key: IntegralKey) -> None:
    if key.l < 0 or key.m < 0 or key.n < 0:
        raise ValueError(f"powers must be nonnegative, got {key[:3]}")
    if not key.a > 0 or not key.b > 0:
        raise ValueError(f"decays must be positive, got a={key.a}, b={key.b}")


class RadialKernel:
    """Memoized base integrals for one fixed decay pair (a, b).

    All lookup tables (factorials, inverse powers, scaled power series)
    are grown on demand and shared across every (l, m, n) request, so a
    single integral costs one short fused-multiply-add loop.
    """

    def __init__(self, a, b):
        a = mpfr(a)
        b = mpfr(b)
        if not a > 0 or not b > 0:
            raise ValueError(f"decays must be positive, got {a}, {b}")
        self.a = a
        self.b = b
        self._ia = [mpfr(1), 1 / a]           # a^-i
        self._ib = [mpfr(1), 1 / b]           # b^-i
        self._aof = [mpfr(1)]                 # a^k / k!
        self._bof = [mpfr(1)]                 # b^k / k!
        self._fact = [mpfr(1)]                # i!
        s = a + b
        self._fis = [1 / s]                   # i! / s^(i+1)
        self._memo: dict[tuple[int, int, int], mpfr] = {}

    def _grow(self, pq_max: int, s_max: int) -> None:
        ia, ib, fact = self._ia, self._ib, self._fact
        aof, bof, fis = self._aof, self._bof, self._fis
        inv_a, inv_b = ia[1], ib[1]
        while len(ia) <= pq_max + 1:
            ia.append(ia[-1] * inv_a)
            ib.append(ib[-1] * inv_b)
        while len(fact) <= pq_max:
            fact.append(fact[-1] * len(fact))
        while len(aof) <= pq_max:
            k = len(aof)
            aof.append(aof[-1] * self.a / k)
            bof.append(bof[-1] * self.b / k)
        inv_s = 1 / (self.a + self.b)
        while len(fis) <= s_max:
            i = len(fis)
            fis.append(fis[-1] * i * inv_s)

    def _wedge(self, p: int, q: int, pref, series) -> mpfr:
        # W(p, q) with prefactor table pref = inverse powers of the r2-side
        # decay and series = (decay^k / k!) of that same side
        fis = self._fis
        acc = mpfr(0)
        for k in range(q + 1):
            acc = gmpy2.fma(series[k], fis[p + k], acc)
        return self._fact[q] * pref[q + 1] * acc

    def value(self, l: int, m: int, n: int) -> mpfr:
        key = (l, m, n)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if l < 0 or m < 0 or n < 0:
            raise ValueError(f"powers must be nonnegative, got {key}")
        top = m + n + 1
        self._grow(max(l + n + 1, top), l + top)
        fact, ia, ib = self._fact, self._ia, self._ib
        total = mpfr(0)
        for j in range(n + 2):
            p = l + j
            q = top - j
            if j & 1:
                if (n + 1 - j) & 1:
                    term = fact[p] * fact[q] * ia[p + 1] * ib[q + 1]
                else:
                    term = self._wedge(p, q, ib, self._bof)
            else:
                if (n + 1 - j) & 1:
                    term = self._wedge(q, p, ia, self._aof)
                else:
                    continue
            total = gmpy2.fma(mpfr(gmpy2.bincoef(n + 1, j)), term, total)
        val = 2 * total / (n + 1)
        self._memo[key] = val
        return val

    def __len__(self) -> int:
        return len(self._memo)


_kernel_cache: dict[tuple[bytes, bytes, int], RadialKernel] = {}
_kernel_lock = threading.Lock()


def kernel_for(a, b) -> RadialKernel:
    """Shared kernel for (a, b) at the active precision."""
    a = mpfr(a)
    b = mpfr(b)
    key = (gmpy2.to_binary(a), gmpy2.to_binary(b), current_bits())
    with _kernel_lock:
        kern = _kernel_cache.get(key)
        if kern is None:
            kern = RadialKernel(a, b)
            _kernel_cache[key] = kern
    return kern


def clear_kernel_cache() -> None:
    with _kernel_lock:
        _kernel_cache.clear()


def base_integral(key: IntegralKey) -> mpfr:
    validate_key(key)
    return kernel_for(key.a, key.b).value(key.l, key.m, key.n)


def base_integral_oracle(key: IntegralKey, rel_tol: float = 1e-9) -> float:
    """Independent numerical evaluation of the same integral.

    Pure quadrature, no recursion shared with the closed form: the r12
    integral is a small exact Gauss-Legendre rule, the inner r2 integral
    splits at the |r1 - r2| kink into a Legendre panel plus a shifted
    Laguerre tail, and the outer r1 integral is decay-scaled
    Gauss-Laguerre.  Two rule sizes must agree to rel_tol or the check
    aborts rather than report a shaky reference.  Returns a float.
    """
    import numpy as np

    validate_key(key)
    lo = _oracle_estimate(key, 70)
    hi = _oracle_estimate(key, 100)
    err = abs(hi - lo)
    if not np.isfinite(hi) or (hi != 0 and err / abs(hi) > rel_tol):
        raise OracleConvergenceError(
            f"order-70/100 estimates {lo} and {hi} disagree beyond {rel_tol}"
        )
    return hi


def _oracle_estimate(key: IntegralKey, order: int) -> float:
    import numpy as np
    from numpy.polynomial.laguerre import laggauss
    from numpy.polynomial.legendre import leggauss

    l, m, n = key.l, key.m, key.n
    a, b = float(key.a), float(key.b)

    x12, w12 = leggauss(n // 2 + 2)
    xlag, wlag = laggauss(order)
    xleg, wleg = leggauss(order)

    def r12_block(r1, r2):
        # integral of r12^n over the triangle slice, exact for this degree
        lo = np.abs(r1 - r2)
        hi = r1 + r2
        mid = 0.5 * (hi + lo)
        half = 0.5 * (hi - lo)
        pts = mid[..., None] + half[..., None] * x12
        return half * (pts**n @ w12)

    with np.errstate(under="ignore"):
        r1 = xlag / a
        # lower segment 0 .. r1, Legendre with the exponential kept explicit
        t = 0.5 * (xleg + 1.0)
        r2_lo = r1[:, None] * t
        f_lo = r2_lo**m * np.exp(-b * r2_lo) * r12_block(r1[:, None], r2_lo)
        inner_lo = 0.5 * r1 * (f_lo @ wleg)
        # upper segment r1 .. inf, shifted Laguerre in b (r2 - r1)
        r2_hi = r1[:, None] + xlag / b
        f_hi = r2_hi**m * r12_block(r1[:, None], r2_hi)
        inner_hi = np.exp(-b * r1) / b * (f_hi @ wlag)
        outer = r1**l * (inner_lo + inner_hi)
    return float(outer @ wlag / a)
