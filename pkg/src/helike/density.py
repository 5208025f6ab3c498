"""Radial one-electron density and its Shannon entropy.

For a state Psi(r1, r2, r12) the spherically averaged density is

    rho(r) = (2 pi / r) * integral over r2 of r2 e^{-v r2}
             [ integral of r12 Psi-pair-products over |r - r2| .. r + r2 ]

and every pair product of basis terms reduces, via the binomial split of
(r + r2)^(K+2) - |r - r2|^(K+2) and incomplete-gamma closed forms, to
polynomials times one of four exponentials e^{-w r} with rates

    w in { 2 alpha, alpha + beta, 2 beta, 2 (alpha + beta) }.

We store r * rho(r) (all powers nonnegative) as one polynomial per rate.
Building the profile is a single O(N^2) pass over coefficient pairs; each
evaluation afterwards is four Horner sweeps.  The entropy integral is done
with scaled Gauss-Laguerre rules, doubling the order until stable.

Evaluation stays in extended precision: the grouped polynomials carry
coefficients that cancel by many orders of magnitude at small r, which is
exactly what the wide mantissa is for.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import gmpy2
from gmpy2 import mpfr

from .precision import make_gauss_laguerre, working_precision
from .solver import Wavefunction


@dataclass(frozen=True)
class DensityProfile:
    """r * rho(r) as per-rate polynomials, plus bookkeeping.

    norm_residual is |integral rho 4 pi r^2 dr - 1| evaluated in closed
    form, a direct check on both the solve normalization and this
    reduction.  effective_decay is the slowest rate, which sets the scale
    for tail-sensitive quadrature.
    """

    rates: tuple
    polys: tuple
    bits: int
    norm_residual: mpfr
    effective_decay: mpfr

    def __post_init__(self) -> None:
        if len(self.rates) != len(self.polys):
            raise ValueError("rate/polynomial count mismatch")
        for w in self.rates:
            if not w > 0:
                raise ValueError(f"decay rates must be positive, got {w}")


def radial_density(wf: Wavefunction) -> DensityProfile:
    """Closed-form density profile of a solved wavefunction."""
    with working_precision(wf.bits):
        alpha = mpfr(wf.basis.alpha)
        beta = mpfr(wf.basis.beta)
        terms = wf.basis.terms
        coeff = [mpfr(c) for c in wf.coefficients]
        nb = len(terms)
        four_pi = 4 * gmpy2.const_pi()

        # combo index: 0 = AA, 1 = AB/BA, 2 = BB; series all land on rate 3
        v_of = (2 * beta, alpha + beta, 2 * alpha)
        rates = (2 * alpha, alpha + beta, 2 * beta, 2 * (alpha + beta))

        kmax = 2 * wf.basis.omega + 2
        binom = [[mpfr(gmpy2.bincoef(n, t)) for t in range(n + 1)] for n in range(kmax + 1)]
        # per-combo tables: q! / v^(q+1) indexed by q
        qtop = 4 * wf.basis.omega + 4
        fact = [mpfr(1)]
        for i in range(1, qtop + 2):
            fact.append(fact[-1] * i)
        qfv = []
        vjf = []
        for v in v_of:
            iv = 1 / v
            powv = [iv]
            for _ in range(qtop + 1):
                powv.append(powv[-1] * iv)
            qfv.append([fact[q] * powv[q] for q in range(qtop + 1)])
            pj = [mpfr(1)]
            for j in range(1, qtop + 1):
                pj.append(pj[-1] * v / j)
            vjf.append(pj)

        deg_cap = 4 * wf.basis.omega + 6
        pure = [[mpfr(0)] * (deg_cap + 1) for _ in range(3)]
        buckets: list[dict] = [{}, {}, {}]

        for i in range(nb):
            k1, m1, n1 = terms[i]
            ci = coeff[i]
            for j in range(i, nb):
                k2, m2, n2 = terms[j]
                cij = ci * coeff[j]
                if i != j:
                    cij = 2 * cij
                K = k1 + k2
                kk = K + 2
                row = binom[kk]
                combos = (
                    (0, m1 + m2, n1 + n2),
                    (1, m1 + n2, n1 + m2),
                    (1, n1 + m2, m1 + n2),
                    (2, n1 + n2, m1 + m2),
                )
                for which, L, N2 in combos:
                    table = qfv[which]
                    bucket = buckets[which]
                    poly = pure[which]
                    base_scale = four_pi * cij / kk
                    for t in range(1, kk + 1, 2):
                        q = t + N2 + 1
                        p = kk + N2 + 1 - t
                        pref = base_scale * row[t]
                        upper = pref * table[q]
                        dpow = L + kk - t
                        poly[dpow] += upper
                        key = (q, dpow)
                        cur = bucket.get(key)
                        bucket[key] = -upper if cur is None else cur - upper
                        lower = pref * table[p]
                        key = (p, L + t)
                        cur = bucket.get(key)
                        bucket[key] = lower if cur is None else cur + lower

        series_deg = deg_cap + qtop
        series_poly = [mpfr(0)] * (series_deg + 1)
        for which in range(3):
            ej = vjf[which]
            for (q, base), coef in sorted(buckets[which].items()):
                for jj in range(q + 1):
                    series_poly[base + jj] += coef * ej[jj]

        polys = [_trim(p) for p in pure] + [_trim(series_poly)]
        norm = mpfr(0)
        for w, poly in zip(rates, polys):
            iw = 1 / w
            powi = iw * iw
            for d, c in enumerate(poly):
                # integral of r^(d+1) e^{-w r} = (d+1)! / w^(d+2)
                norm += c * fact[d + 1] * powi
                powi *= iw
        norm *= four_pi
        return DensityProfile(
            rates=rates,
            polys=tuple(tuple(p) for p in polys),
            bits=wf.bits,
            norm_residual=abs(norm - 1),
            effective_decay=min(rates),
        )


def _trim(poly):
    top = len(poly) - 1
    while top > 0 and poly[top] == 0:
        top -= 1
    return poly[: top + 1]


def density_at(profile: DensityProfile, r) -> mpfr:
    """rho(r), in extended precision at the profile's width."""
    with working_precision(profile.bits):
        r = mpfr(r)
        if gmpy2.is_nan(r) or r < 0:
            raise ValueError(f"radius must be nonnegative, got {r}")
        if r == 0:
            # limit of P(r) e^{-w r} / r needs P(0) terms to cancel; the
            # derivative at zero is what survives
            total = mpfr(0)
            for w, poly in zip(profile.rates, profile.polys):
                c0 = poly[0]
                c1 = poly[1] if len(poly) > 1 else mpfr(0)
                total += c1 - w * c0
            return total
        total = mpfr(0)
        for w, poly in zip(profile.rates, profile.polys):
            acc = poly[-1]
            for d in range(len(poly) - 2, -1, -1):
                acc = gmpy2.fma(acc, r, poly[d])
            total += acc * gmpy2.exp(-w * r)
        return total / r


def density_oracle(wf: Wavefunction, r, rel_tol: float = 1e-9) -> float:
    """Independent numerical density: adaptive quadrature over (r2, r12).

    Evaluates the wavefunction pointwise and integrates |Psi|^2 against
    the two-electron measure with scipy, splitting at the |r - r2| kink.
    Meant for cross-checks at modest omega, returns a float.
    """
    import numpy as np
    from scipy.integrate import quad

    if not r > 0:
        raise ValueError(f"oracle radius must be positive, got {r}")
    r = float(r)
    alpha = float(wf.basis.alpha)
    beta = float(wf.basis.beta)
    terms = wf.basis.terms
    coeff = [float(c) for c in wf.coefficients]

    def psi(r1: float, r2: float, r12: float) -> float:
        direct = 0.0
        swapped = 0.0
        for (k, m, n), c in zip(terms, coeff):
            direct += c * r1**m * r2**n * r12**k
            swapped += c * r2**m * r1**n * r12**k
        return np.exp(-alpha * r1 - beta * r2) * direct + np.exp(
            -alpha * r2 - beta * r1
        ) * swapped

    def inner(r2: float) -> float:
        f = lambda r12: r12 * psi(r, r2, r12) ** 2
        val, _ = quad(f, abs(r - r2), r + r2, epsabs=0.0, epsrel=1e-11, limit=200)
        return r2 * val

    lo_val, lo_err = quad(inner, 0.0, r, epsabs=0.0, epsrel=1e-10, limit=200)
    hi_val, hi_err = quad(inner, r, np.inf, epsabs=0.0, epsrel=1e-10, limit=200)
    val = (2 * np.pi / r) * (lo_val + hi_val)
    err = (2 * np.pi / r) * (lo_err + hi_err)
    if not np.isfinite(val) or (val != 0 and err / abs(val) > rel_tol):
        raise RuntimeError(f"density oracle error {err} too large for {val}")
    return val


@dataclass(frozen=True)
class EntropyResult:
    """Shannon entropy S_r = -integral rho ln rho 4 pi r^2 dr."""

    value: mpfr
    order: int
    converged: bool
    norm_residual: mpfr


# nodes with density below this contribute nothing to rho ln rho
DENSITY_FLOOR = "1e-60"


def shannon_entropy(
    profile: DensityProfile,
    tol="1e-6",
    start_order: int = 200,
    max_order: int = 1600,
    norm_tol="1e-8",
    scale=None,
) -> EntropyResult:
    """Entropy by scaled Gauss-Laguerre, order-doubling until stable.

    The substitution x = scale * r (default: the profile's slowest decay
    rate) matches the rule's weight to the density tail.  Convergence
    requires both successive-order agreement within tol and the
    quadrature reproducing unit norm within norm_tol; otherwise the
    result is flagged.
    """
    with working_precision(profile.bits):
        tol = mpfr(tol)
        norm_tol = mpfr(norm_tol)
        floor = mpfr(DENSITY_FLOOR)
        scale = profile.effective_decay if scale is None else mpfr(scale)
        if not scale > 0:
            raise ValueError(f"quadrature scale must be positive, got {scale}")
        four_pi = 4 * gmpy2.const_pi()

        def sweep(order: int):
            rule = make_gauss_laguerre(order)
            total = mpfr(0)
            norm = mpfr(0)
            for x, w in zip(rule.nodes, rule.weights):
                r = x / scale
                rho = density_at(profile, r)
                if rho < floor:
                    continue
                shell = four_pi * r * r * gmpy2.exp(x) * w
                norm += shell * rho
                total -= shell * rho * gmpy2.log(rho)
            return total / scale, norm / scale

        order = start_order
        value, norm = sweep(order)
        while order * 2 <= max_order:
            nxt_value, nxt_norm = sweep(order * 2)
            order *= 2
            drift = abs(nxt_value - value)
            value, norm = nxt_value, nxt_norm
            if drift < tol:
                if abs(norm - 1) <= norm_tol:
                    return EntropyResult(value, order, True, abs(norm - 1))
                break
        return EntropyResult(value, order, False, abs(norm - 1))


def hydrogenic_density(z, r) -> mpfr:
    """Ground-state density of one electron at charge z: z^3/pi e^{-2 z r}."""
    z = mpfr(z)
    r = mpfr(r)
    if not z > 0 or r < 0:
        raise ValueError("need z > 0 and r >= 0")
    return z**3 / gmpy2.const_pi() * gmpy2.exp(-2 * z * r)


def hydrogenic_entropy(z) -> mpfr:
    """Entropy of the hydrogenic density: 3 + ln pi - 3 ln z."""
    z = mpfr(z)
    if not z > 0:
        raise ValueError(f"charge must be positive, got {z}")
    return 3 + gmpy2.log(gmpy2.const_pi()) - 3 * gmpy2.log(z)
