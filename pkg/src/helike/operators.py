"""Matrix assembly in the symmetrized Hylleraas basis.

Basis functions are A + B where A = e^{-alpha r1 - beta r2} r12^k r1^m r2^n
and B is A with the electron labels swapped.  Every operator handled here
commutes with that swap, so a bra-ket over (A_i + B_i, A_j + B_j) folds to
twice the (A_i, A_j) plus (A_i, B_j) products; the direct product keeps the
decay pair (2 alpha, 2 beta) and the cross product sees (alpha + beta) on
both radii.

Kinetic energy uses the symmetric gradient form: only first derivatives of
the basis functions appear, contracted with the direction cosines

    r1.r2 / (r1 r2)        = (r1^2 + r2^2 - r12^2) / (2 r1 r2)
    r1.(r1 - r2) / (r1 r12) = (r1^2 - r2^2 + r12^2) / (2 r1 r12)
    r2.(r1 - r2) / (r2 r12) = (r1^2 - r2^2 - r12^2) / (2 r2 r12)

so every term lands back on base integrals with small power shifts.  The
grad_2 form is the r1 <-> r2 mirror of the grad_1 form, realized by
swapping the first two power arguments of the integral lookup.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import gmpy2
from gmpy2 import mpfr

from .basis import BasisSpec
from .integrals import kernel_for
from .linalg import Matrix, Vector, dot, fma, mat_vec
from .precision import working_precision

_SYSTEM_KINDS = ("nucleus", "ps_minus")


@dataclass(frozen=True)
class SystemSpec:
    """Which two-electron problem to solve.

    kind "nucleus" is two electrons around a fixed charge z (so H-, He,
    Li+, or any fractional z); "ps_minus" is the positronium negative ion,
    where the mass-polarization term enters with the same scale as the
    Laplacians.  interaction_on=False drops electron repulsion and is only
    meaningful with a fixed nucleus.
    """

    kind: str
    z: Optional[mpfr] = None
    interaction_on: bool = True

    def __post_init__(self) -> None:
        if self.kind not in _SYSTEM_KINDS:
            raise ValueError(f"kind must be one of {_SYSTEM_KINDS}, got {self.kind!r}")
        if self.kind == "nucleus":
            if self.z is None:
                raise ValueError("a fixed-nucleus system needs a charge z")
            z = mpfr(self.z)
            if not z > 0:
                raise ValueError(f"nuclear charge must be positive, got {z}")
            object.__setattr__(self, "z", z)
        else:
            if self.z is not None:
                raise ValueError("ps_minus fixes all charges, z must be None")
            if not self.interaction_on:
                raise ValueError("interaction_on=False requires a fixed nucleus")

    @classmethod
    def nucleus(cls, z, interaction_on: bool = True) -> "SystemSpec":
        return cls("nucleus", mpfr(z), interaction_on)

    @classmethod
    def ps_minus(cls) -> "SystemSpec":
        return cls("ps_minus")

    @property
    def mass_polarization(self) -> bool:
        return self.kind == "ps_minus"

    @property
    def charge_coefficient(self) -> mpfr:
        """Multiplier on the unit-charge attraction matrix."""
        return self.z if self.kind == "nucleus" else mpfr(1)

    def threshold_energy(self) -> mpfr:
        """One-electron breakup threshold: -z^2/2, or -1/4 for ps_minus."""
        if self.kind == "nucleus":
            return -self.z * self.z / 2
        return mpfr("-0.25")

    def describe(self) -> str:
        if self.kind == "ps_minus":
            return "ps_minus"
        tag = f"nucleus z={self.z}"
        if not self.interaction_on:
            tag += " (no e-e repulsion)"
        return tag


@dataclass(frozen=True)
class MatrixPair:
    """Overlap and Hamiltonian for one basis, ready for the eigensolver."""

    overlap: Matrix
    hamiltonian: Matrix

    def __post_init__(self) -> None:
        n = len(self.overlap)
        if any(len(row) != n for row in self.overlap):
            raise ValueError("overlap is not square")
        if len(self.hamiltonian) != n or any(len(r) != n for r in self.hamiltonian):
            raise ValueError("hamiltonian size does not match overlap")

    @property
    def size(self) -> int:
        return len(self.overlap)


@dataclass(frozen=True)
class Wavefunction:
    """A solved state: basis, S-normalized coefficients, and its energy."""

    system: SystemSpec
    basis: BasisSpec
    energy: mpfr
    coefficients: tuple
    bits: int

    def __post_init__(self) -> None:
        if len(self.coefficients) != self.basis.size:
            raise ValueError(
                f"coefficient count {len(self.coefficients)} does not match "
                f"basis size {self.basis.size}"
            )


@dataclass(frozen=True)
class OperatorSet:
    """Component matrices for one (system, basis) assembly.

    The Hamiltonian splits as kinetic + z * nuclear + repulsion, with the
    unit-charge attraction kept separate so charge sweeps and virial
    bookkeeping can recombine without touching the integrals again.
    """

    system: SystemSpec
    basis: BasisSpec
    bits: int
    overlap: Matrix
    kinetic: Matrix
    nuclear: Matrix
    repulsion: Matrix

    @property
    def size(self) -> int:
        return len(self.overlap)

    def hamiltonian(self, z=None) -> Matrix:
        """H = kinetic + z * nuclear (+ repulsion); z defaults to the system's."""
        zc = self.system.charge_coefficient if z is None else mpfr(z)
        n = self.size
        include_ee = self.system.interaction_on
        h = []
        for i in range(n):
            ti, ni, ri = self.kinetic[i], self.nuclear[i], self.repulsion[i]
            if include_ee:
                h.append([fma(zc, ni[j], ti[j]) + ri[j] for j in range(n)])
            else:
                h.append([fma(zc, ni[j], ti[j]) for j in range(n)])
        return h

    def pair(self, z=None) -> MatrixPair:
        return MatrixPair(self.overlap, self.hamiltonian(z))

    def potential_matrix(self, z=None) -> Matrix:
        """z * nuclear + repulsion, the full potential for virial checks."""
        zc = self.system.charge_coefficient if z is None else mpfr(z)
        n = self.size
        include_ee = self.system.interaction_on
        v = []
        for i in range(n):
            ni, ri = self.nuclear[i], self.repulsion[i]
            if include_ee:
                v.append([fma(zc, ni[j], ri[j]) for j in range(n)])
            else:
                v.append([zc * ni[j] for j in range(n)])
        return v


def _grad_pair(G: Callable, M: int, N: int, K: int, m1: int, m2: int, a1, b1, k1: int, k2: int):
    """Integral of grad_1(bra) . grad_1(ket) as base-integral combinations.

    m1, a1 are the bra's r1 power and decay; m2, b1 the ket's.  Passing the
    mirrored lookup plus swapped (M, N) and r2 data yields the grad_2 form.
    """
    acc = a1 * b1 * G(M, N, K)
    if m1 and m2:
        acc += m1 * m2 * G(M - 2, N, K)
    if m1 or m2:
        acc -= (m1 * b1 + m2 * a1) * G(M - 1, N, K)
    if k1 and k2:
        acc += k1 * k2 * G(M, N, K - 2)
    mu = m1 * k2 + m2 * k1
    if mu:
        acc += mu * (G(M, N, K - 2) - G(M - 2, N + 2, K - 2) + G(M - 2, N, K)) / 2
    if k1 or k2:
        nu = a1 * k2 + b1 * k1
        acc -= nu * (G(M + 1, N, K - 2) - G(M - 1, N + 2, K - 2) + G(M - 1, N, K)) / 2
    return acc


def _mass_pol(G: Callable, M: int, N: int, K: int, mp: int, p1, kp: int, nq: int, q2, kq: int):
    """Integral of grad_1(P) . grad_2(Q).

    Only P's r1-side data (power mp, decay p1, r12 power kp) and Q's
    r2-side data (nq, q2, kq) enter; M, N, K are the product powers, which
    are the same for both symmetrization orders.
    """
    acc = mpfr(0)
    for c, dm, dn in (
        (mp * nq, -1, -1),
        (-(mp * q2), -1, 0),
        (-(p1 * nq), 0, -1),
        (p1 * q2, 0, 0),
    ):
        if c == 0:
            continue
        acc += c * (
            G(M + dm + 1, N + dn - 1, K)
            + G(M + dm - 1, N + dn + 1, K)
            - G(M + dm - 1, N + dn - 1, K + 2)
        ) / 2
    if kq:
        for c, dm in ((mp, -1), (-p1, 0)):
            if c == 0:
                continue
            acc -= kq * c * (
                G(M + dm + 1, N, K - 2)
                - G(M + dm - 1, N + 2, K - 2)
                + G(M + dm - 1, N, K)
            ) / 2
    if kp:
        for c, dn in ((nq, -1), (-q2, 0)):
            if c == 0:
                continue
            acc += kp * c * (
                G(M + 2, N + dn - 1, K - 2)
                - G(M, N + dn + 1, K - 2)
                - G(M, N + dn - 1, K)
            ) / 2
    if kp and kq:
        acc -= kp * kq * G(M, N, K - 2)
    return acc


def assemble_operators(system: SystemSpec, basis: BasisSpec) -> OperatorSet:
    """Overlap, kinetic, unit-charge attraction, and repulsion matrices.

    Runs at the active precision.  The 8 pi^2 angular volume and the fold
    factor 2 from bra symmetrization are applied once per entry, so the
    matrices are the physical operator integrals over normalized-measure
    coordinates and c^T S c is a true squared norm.
    """
    bits = gmpy2.get_context().precision
    alpha = mpfr(basis.alpha)
    beta = mpfr(basis.beta)
    terms = basis.terms
    nb = len(terms)
    kern_direct = kernel_for(2 * alpha, 2 * beta)
    kern_cross = kernel_for(alpha + beta, alpha + beta)
    mass_pol = system.mass_polarization

    scale = 16 * gmpy2.const_pi() ** 2  # fold factor 2 times 8 pi^2
    s_mat = [[mpfr(0)] * nb for _ in range(nb)]
    t_mat = [[mpfr(0)] * nb for _ in range(nb)]
    vn_mat = [[mpfr(0)] * nb for _ in range(nb)]
    vee_mat = [[mpfr(0)] * nb for _ in range(nb)]

    routes = (
        (kern_direct, False, alpha, beta),
        (kern_cross, True, beta, alpha),
    )
    for i in range(nb):
        k1, m1, n1 = terms[i]
        si, ti, vni, veei = s_mat[i], t_mat[i], vn_mat[i], vee_mat[i]
        for j in range(i, nb):
            k2, m2raw, n2raw = terms[j]
            acc_s = mpfr(0)
            acc_t = mpfr(0)
            acc_vn = mpfr(0)
            acc_vee = mpfr(0)
            for kern, swapped, b1, b2 in routes:
                m2, n2 = (n2raw, m2raw) if swapped else (m2raw, n2raw)
                val = kern.value
                G = lambda p, q, r: val(p + 1, q + 1, r + 1)
                Gm = lambda p, q, r: val(q + 1, p + 1, r + 1)
                M = m1 + m2
                N = n1 + n2
                K = k1 + k2
                acc_s += G(M, N, K)
                acc_vn -= G(M - 1, N, K) + G(M, N - 1, K)
                acc_vee += G(M, N, K - 1)
                d1 = _grad_pair(G, M, N, K, m1, m2, alpha, b1, k1, k2)
                d2 = _grad_pair(Gm, N, M, K, n1, n2, beta, b2, k1, k2)
                if mass_pol:
                    mp1 = _mass_pol(G, M, N, K, m1, alpha, k1, n2, b2, k2)
                    mp2 = _mass_pol(G, M, N, K, m2, b1, k2, n1, beta, k1)
                    acc_t += d1 + d2 + (mp1 + mp2) / 2
                else:
                    acc_t += (d1 + d2) / 2
            si[j] = s_mat[j][i] = scale * acc_s
            ti[j] = t_mat[j][i] = scale * acc_t
            vni[j] = vn_mat[j][i] = scale * acc_vn
            veei[j] = vee_mat[j][i] = scale * acc_vee
    return OperatorSet(system, basis, bits, s_mat, t_mat, vn_mat, vee_mat)


def assemble_overlap(basis: BasisSpec) -> Matrix:
    """Just the overlap matrix, for norm checks without a full assembly."""
    alpha = mpfr(basis.alpha)
    beta = mpfr(basis.beta)
    terms = basis.terms
    nb = len(terms)
    kern_direct = kernel_for(2 * alpha, 2 * beta)
    kern_cross = kernel_for(alpha + beta, alpha + beta)
    scale = 16 * gmpy2.const_pi() ** 2
    s_mat = [[mpfr(0)] * nb for _ in range(nb)]
    for i in range(nb):
        k1, m1, n1 = terms[i]
        for j in range(i, nb):
            k2, m2raw, n2raw = terms[j]
            acc = mpfr(0)
            for kern, swapped in ((kern_direct, False), (kern_cross, True)):
                m2, n2 = (n2raw, m2raw) if swapped else (m2raw, n2raw)
                acc += kern.value(m1 + m2 + 1, n1 + n2 + 1, k1 + k2 + 1)
            s_mat[i][j] = s_mat[j][i] = scale * acc
    return s_mat


def assemble_moments(basis: BasisSpec):
    """Matrices of (r1 + r2)/2 and of r12 in the same folded basis.

    The swap-symmetrized single-particle radius stands in for r1: the two
    agree on symmetrized states, and only the symmetric form keeps the
    two-product fold valid.
    """
    alpha = mpfr(basis.alpha)
    beta = mpfr(basis.beta)
    terms = basis.terms
    nb = len(terms)
    kern_direct = kernel_for(2 * alpha, 2 * beta)
    kern_cross = kernel_for(alpha + beta, alpha + beta)
    scale = 16 * gmpy2.const_pi() ** 2
    r1_mat = [[mpfr(0)] * nb for _ in range(nb)]
    r12_mat = [[mpfr(0)] * nb for _ in range(nb)]
    for i in range(nb):
        k1, m1, n1 = terms[i]
        for j in range(i, nb):
            k2, m2raw, n2raw = terms[j]
            acc_r1 = mpfr(0)
            acc_r12 = mpfr(0)
            for kern, swapped in ((kern_direct, False), (kern_cross, True)):
                m2, n2 = (n2raw, m2raw) if swapped else (m2raw, n2raw)
                val = kern.value
                M = m1 + m2
                N = n1 + n2
                K = k1 + k2
                acc_r1 += (val(M + 2, N + 1, K + 1) + val(M + 1, N + 2, K + 1)) / 2
                acc_r12 += val(M + 1, N + 1, K + 2)
            r1_mat[i][j] = r1_mat[j][i] = scale * acc_r1
            r12_mat[i][j] = r12_mat[j][i] = scale * acc_r12
    return r1_mat, r12_mat


def quadratic_form(mat: Matrix, c: Vector):
    """c^T M c."""
    return dot(c, mat_vec(mat, c))


def norm_residual(overlap: Matrix, c: Vector):
    """|c^T S c - 1|, the wavefunction normalization defect."""
    return abs(quadratic_form(overlap, c) - 1)


NORMALIZATION_TOL = "1e-12"


def expectation_values(wf: Wavefunction) -> tuple:
    """(<r1>, <r12>) for a normalized state, in one assembly pass.

    Rejects states whose overlap norm drifts from 1 by more than
    NORMALIZATION_TOL, since the quadratic forms below assume unit norm.
    """
    with working_precision(wf.bits):
        c = [mpfr(v) for v in wf.coefficients]
        s_mat = assemble_overlap(wf.basis)
        defect = norm_residual(s_mat, c)
        if defect > mpfr(NORMALIZATION_TOL):
            raise ValueError(f"state not normalized: |c^T S c - 1| = {defect}")
        r1_mat, r12_mat = assemble_moments(wf.basis)
        return quadratic_form(r1_mat, c), quadratic_form(r12_mat, c)


def expectation_r1(wf: Wavefunction) -> mpfr:
    """Single-electron radial expectation <r1>."""
    return expectation_values(wf)[0]


def expectation_r12(wf: Wavefunction) -> mpfr:
    """Electron-electron distance expectation <r12>."""
    return expectation_values(wf)[1]
