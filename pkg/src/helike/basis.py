"""Hylleraas basis enumeration.

Terms are indexed by exponent triples (k, m, n) acting on (r12, r1, r2).
Each basis function is the explicitly symmetrized pair

    phi = e^{-alpha r1 - beta r2} r12^k r1^m r2^n  +  (r1 <-> r2 swap),

and the canonical restriction m <= n keeps exactly one member of every
swap-equivalent pair, so the enumeration is duplicate-free by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

from gmpy2 import mpfr


class HylleraasTerm(NamedTuple):
    """Monomial powers: r12^k * r1^m * r2^n."""

    k: int
    m: int
    n: int


def enumerate_basis(omega: int) -> list[HylleraasTerm]:
    """All terms with k + m + n <= omega and m <= n, lexicographic in (k, m, n)."""
    if omega < 0:
        raise ValueError(f"omega must be nonnegative, got {omega}")
    out: list[HylleraasTerm] = []
    for k in range(omega + 1):
        for m in range((omega - k) // 2 + 1):
            for n in range(m, omega - k - m + 1):
                out.append(HylleraasTerm(k, m, n))
    return out


def basis_size(omega: int) -> int:
    """Closed-form count of the enumeration: sum over k of floor((t+2)^2/4), t = omega-k."""
    if omega < 0:
        raise ValueError(f"omega must be nonnegative, got {omega}")
    return sum((t + 2) ** 2 // 4 for t in range(omega + 1))


@dataclass(frozen=True)
class BasisSpec:
    """A concrete basis: truncation order plus the two exponential decays.

    alpha scales r1 and beta scales r2 in the unswapped member; both must
    be positive for square-integrability.
    """

    omega: int
    alpha: mpfr
    beta: mpfr
    terms: tuple = field(default=())

    def __post_init__(self) -> None:
        if self.omega < 0:
            raise ValueError(f"omega must be nonnegative, got {self.omega}")
        alpha = mpfr(self.alpha)
        beta = mpfr(self.beta)
        if not alpha > 0 or not beta > 0:
            raise ValueError(f"decay parameters must be positive, got {alpha}, {beta}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        expected = tuple(enumerate_basis(self.omega))
        if self.terms == ():
            object.__setattr__(self, "terms", expected)
        elif tuple(self.terms) != expected:
            raise ValueError("terms do not match the canonical enumeration")

    @property
    def size(self) -> int:
        return len(self.terms)

    def with_parameters(self, alpha, beta) -> "BasisSpec":
        """Same truncation, different decays; the term list is shared."""
        return BasisSpec(self.omega, mpfr(alpha), mpfr(beta), self.terms)
