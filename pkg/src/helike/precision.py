"""Extended-precision arithmetic control and quadrature support.

Everything numerical in this package runs on gmpy2's MPFR floats.  The
active mantissa width is taken from the thread-local gmpy2 context, so
callers wrap work in ``working_precision(bits)`` and all arithmetic
inside rounds to that width.  This module also provides the exact
combinatorial helpers (factorials, incomplete gamma functions) and the
Gauss-Laguerre rules used for the radial entropy integrals.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import gmpy2
from gmpy2 import mpfr

DEFAULT_BITS = 256
PRECISION_ENV_VAR = "HELIKE_BITS"

# Extra mantissa bits used internally while locating quadrature nodes,
# discarded when the rule is rounded to the requested width.
_NODE_GUARD_BITS = 32


class RuleGenerationError(RuntimeError):
    """Raised when a quadrature rule cannot be constructed."""


class PrecisionExhaustedError(RuntimeError):
    """Raised when escalation would exceed the configured maximum width."""


def working_precision(bits: int):
    """Context manager activating a gmpy2 context with the given mantissa width."""
    if bits < 2:
        raise ValueError(f"mantissa width must be at least 2 bits, got {bits}")
    return gmpy2.context(precision=bits)


def current_bits() -> int:
    return gmpy2.get_context().precision


def default_bits_from_env() -> int:
    """Resolve the default mantissa width, honoring the environment override."""
    raw = os.environ.get(PRECISION_ENV_VAR)
    if raw is None:
        return DEFAULT_BITS
    try:
        bits = int(raw)
    except ValueError as exc:
        raise ValueError(f"{PRECISION_ENV_VAR} must be an integer, got {raw!r}") from exc
    if bits < 2:
        raise ValueError(f"{PRECISION_ENV_VAR} must be at least 2, got {bits}")
    return bits


@dataclass(frozen=True)
class PrecisionPolicy:
    """Mantissa-width schedule for the linear algebra.

    Factorizations start at ``mantissa_bits`` and repeatedly multiply the
    width by ``escalation_factor`` when a symmetric factorization hits a
    nonpositive pivot, up to ``max_bits``.
    """

    mantissa_bits: int = DEFAULT_BITS
    escalation_factor: int = 2
    max_bits: int = 4096

    def __post_init__(self) -> None:
        if self.mantissa_bits < 2:
            raise ValueError("mantissa_bits must be at least 2")
        if self.escalation_factor < 2:
            raise ValueError("escalation_factor must be at least 2")
        if self.max_bits < self.mantissa_bits:
            raise ValueError("max_bits must be at least mantissa_bits")

    def escalate(self, bits: int) -> int:
        """Next width after ``bits``; raises once the ceiling is reached."""
        if bits >= self.max_bits:
            raise PrecisionExhaustedError(
                f"already at maximum width {self.max_bits} bits"
            )
        return min(bits * self.escalation_factor, self.max_bits)

    def ladder(self) -> list[int]:
        """All widths the policy can visit, ascending."""
        out = [self.mantissa_bits]
        while out[-1] < self.max_bits:
            out.append(min(out[-1] * self.escalation_factor, self.max_bits))
        return out


def factorial(n: int) -> mpfr:
    """n! as an extended float, exact whenever it fits the active mantissa."""
    if n < 0:
        raise ValueError(f"factorial argument must be nonnegative, got {n}")
    return mpfr(gmpy2.fac(n))


def exact_factorial(n: int):
    """n! as an exact integer."""
    if n < 0:
        raise ValueError(f"factorial argument must be nonnegative, got {n}")
    return gmpy2.fac(n)


def truncated_exp_series(n: int, x: mpfr) -> mpfr:
    """e_n(x) = sum_{j<n} x^j / j!, the degree n-1 Taylor front of exp."""
    total = mpfr(1)
    term = mpfr(1)
    for j in range(1, n):
        term = term * x / j
        total += term
    return total


def upper_incomplete_gamma(n: int, x) -> mpfr:
    """Gamma(n, x) for integer n >= 1 and x >= 0.

    Uses the closed form Gamma(n, x) = (n-1)! e^{-x} e_n(x), which is
    all-positive, so no cancellation regardless of x.
    """
    if n < 1:
        raise ValueError(f"order must be a positive integer, got {n}")
    x = mpfr(x)
    if gmpy2.is_nan(x) or x < 0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    return factorial(n - 1) * gmpy2.exp(-x) * truncated_exp_series(n, x)


def lower_incomplete_gamma(n: int, x) -> mpfr:
    """gamma(n, x) for integer n >= 1 and x >= 0.

    Computed as (n-1)! - Gamma(n, x) so the pair always sums to the
    complete factorial exactly in floating point.
    """
    if n < 1:
        raise ValueError(f"order must be a positive integer, got {n}")
    x = mpfr(x)
    if gmpy2.is_nan(x) or x < 0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    return factorial(n - 1) - upper_incomplete_gamma(n, x)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integrals of f(x) e^{-x} on (0, inf).

    ``scale`` records a substitution x = scale * r applied by the caller;
    the canonical nodes and weights are stored unscaled.
    """

    nodes: tuple
    weights: tuple
    order: int
    scale: mpfr = field(default_factory=lambda: mpfr(1))

    def __post_init__(self) -> None:
        if self.order < 1:
            raise RuleGenerationError(f"order must be positive, got {self.order}")
        if len(self.nodes) != self.order or len(self.weights) != self.order:
            raise RuleGenerationError("node/weight count does not match order")
        prev = mpfr(0)
        for x in self.nodes:
            if not x > prev:
                raise RuleGenerationError("nodes must be positive and ascending")
            prev = x
        for w in self.weights:
            if not w > 0:
                raise RuleGenerationError("weights must be positive")
        total = mpfr(0)
        for w in self.weights:
            total += w
        if abs(total - 1) > mpfr("1e-14"):
            raise RuleGenerationError(f"weights sum to {total}, expected 1")
        if not self.scale > 0:
            raise RuleGenerationError("scale must be positive")

    def with_scale(self, scale) -> "QuadratureRule":
        return QuadratureRule(self.nodes, self.weights, self.order, mpfr(scale))

    def integrate(self, f: Callable[[mpfr], mpfr]) -> mpfr:
        """Apply the canonical rule: approximates integral of f(x) e^{-x} dx."""
        total = mpfr(0)
        for x, w in zip(self.nodes, self.weights):
            total += w * f(x)
        return total


def _laguerre_value_pair(n: int, x: mpfr) -> tuple[mpfr, mpfr]:
    """(L_n(x), L_{n-1}(x)) via the three-term recurrence."""
    lm, l = mpfr(1), 1 - x
    for k in range(1, n):
        lm, l = l, ((2 * k + 1 - x) * l - k * lm) / (k + 1)
    return l, lm


_rule_cache: dict[tuple[int, int], QuadratureRule] = {}
_rule_lock = threading.Lock()


def make_gauss_laguerre(order: int) -> QuadratureRule:
    """Gauss-Laguerre rule of the given order at the active precision.

    Nodes start from the standard sequential estimates and are refined by
    Newton iteration on the Laguerre recurrence at working precision plus
    guard bits.  Rules are cached per (order, precision).
    """
    if order < 1:
        raise RuleGenerationError(f"order must be positive, got {order}")
    bits = current_bits()
    key = (order, bits)
    with _rule_lock:
        hit = _rule_cache.get(key)
    if hit is not None:
        return hit

    with working_precision(bits + _NODE_GUARD_BITS):
        nodes_hi, weights_hi = _generate_laguerre(order)

    nodes = tuple(mpfr(x) for x in nodes_hi)
    weights = tuple(mpfr(w) for w in weights_hi)
    rule = QuadratureRule(nodes, weights, order)
    with _rule_lock:
        _rule_cache[key] = rule
    return rule


def _generate_laguerre(n: int) -> tuple[list[mpfr], list[mpfr]]:
    work_bits = current_bits()
    tol = mpfr(2) ** (8 - work_bits)
    # recurrence rounding noise keeps the Newton step from shrinking all
    # the way to tol for small nodes at large order; a step that has
    # stopped decreasing while already far below delivery precision is
    # treated as converged
    floor_tol = mpfr(2) ** (48 - work_bits)
    nodes: list[mpfr] = []
    weights: list[mpfr] = []
    z = mpfr(0)
    for i in range(1, n + 1):
        if i == 1:
            z = mpfr(3) / (1 + mpfr("2.4") * n)
        elif i == 2:
            z = z + mpfr(15) / (1 + mpfr("2.5") * n)
        else:
            ai = i - 2
            z = z + ((1 + mpfr("2.55") * ai) / (mpfr("1.9") * ai)) * (z - nodes[-2])
        converged = False
        prev_step = None
        for _ in range(200):
            l, lm = _laguerre_value_pair(n, z)
            dl = n * (l - lm) / z
            step = l / dl
            z -= step
            if abs(step) <= tol * abs(z):
                converged = True
                break
            if prev_step is not None and abs(step) >= prev_step:
                if abs(step) <= floor_tol * abs(z):
                    converged = True
                    break
            prev_step = abs(step)
        if not converged:
            raise RuleGenerationError(
                f"node {i} of {n} did not converge in Newton refinement"
            )
        if nodes and not z > nodes[-1]:
            raise RuleGenerationError(f"nodes out of order near index {i}")
        if not z > 0:
            raise RuleGenerationError(f"nonpositive node at index {i}")
        lnp1, _ = _laguerre_value_pair(n + 1, z)
        w = z / ((n + 1) * lnp1) ** 2
        nodes.append(z)
        weights.append(w)

    total = mpfr(0)
    for w in weights:
        total += w
    if abs(total - 1) > mpfr(2) ** (24 - work_bits):
        raise RuleGenerationError(f"weight sum {total} deviates from 1")
    return nodes, weights


def format_decimal(x, digits: int = 10) -> str:
    """Fixed-significant-digit decimal string, deterministic across platforms."""
    if not isinstance(x, mpfr):
        x = mpfr(x)
    if gmpy2.is_nan(x):
        return "nan"
    if not gmpy2.is_finite(x):
        return "-inf" if x < 0 else "inf"
    if x == 0:
        return "0." + "0" * (digits - 1) + "e+00"
    mant, exp10, _ = x.digits(10, digits)
    neg = mant.startswith("-")
    if neg:
        mant = mant[1:]
    # digits() returns 0.mant * 10^exp10; present as d.ddd e(exp10-1)
    e = exp10 - 1
    body = mant[0] + "." + mant[1:]
    return f"{'-' if neg else ''}{body}e{e:+03d}"


def serialize_mpfr(x) -> str:
    """Decimal string carrying enough digits to reproduce the value bit-exactly."""
    if not isinstance(x, mpfr):
        x = mpfr(x)
    if gmpy2.is_nan(x):
        return "nan"
    if not gmpy2.is_finite(x):
        return "-inf" if x < 0 else "inf"
    if x == 0:
        return "0"
    ndig = int(x.precision * 0.30103) + 3
    mant, exp10, _ = x.digits(10, ndig)
    neg = mant.startswith("-")
    if neg:
        mant = mant[1:]
    return f"{'-' if neg else ''}0.{mant}e{exp10}"


def deserialize_mpfr(s: str) -> mpfr:
    """Inverse of serialize_mpfr under the same active precision."""
    return mpfr(s)
