"""Skew Schur function values at specializations and Toeplitz matrices,
Schur process weights and partition functions.

Closed forms are used for single-parameter specializations; multi-parameter
partition cases go through the branching rule (a finite sum of nonnegative
terms), and the Jacobi-Trudi / Toeplitz-minor determinants are kept as
independent reference implementations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .combinatorics import (
    EMPTY, Partition, PlanePartitionShape, Signature, conjugate, contains, interlaces,
    interlacing_below, part, partition, signature_interlaces, signatures_interlacing_below,
    size, up_steps,
)
from .specializations import (
    AnnulusError, DivergentPairingError, EdreiSpec, Specialization, TRIVIAL,
    analyticity_annulus, h_coeffs, laurent_coeff, laurent_coeffs, pairing_H,
)


def _pow(x: float, k: int) -> float:
    if k == 0:
        return 1.0
    return x ** k


# ---------------------------------------------------------------- partitions


def skew_schur_alpha(lam: Partition, mu: Partition, alpha: float) -> float:
    """s_{lam/mu} at the one-variable specialization x = alpha."""
    if not interlaces(mu, lam):
        return 0.0
    return _pow(alpha, size(lam) - size(mu))


def is_vertical_strip(lam: Sequence[int], mu: Sequence[int]) -> bool:
    return all(0 <= part(lam, j) - part(mu, j) <= 1 for j in range(max(len(lam), len(mu))))


def skew_schur_beta(lam: Partition, mu: Partition, beta: float) -> float:
    """s_{lam/mu} at the dual one-variable specialization (H = 1 + beta u)."""
    if not is_vertical_strip(lam, mu):
        return 0.0
    return _pow(beta, size(lam) - size(mu))


def vertical_strips_below(lam: Partition):
    """All nu with lam/nu a vertical strip."""
    for c in interlacing_below(conjugate(lam)):
        yield conjugate(c)


@lru_cache(maxsize=200_000)
def _skew_pieces(lam: Partition, mu: Partition, pieces: tuple) -> float:
    if not pieces:
        return 1.0 if lam == mu else 0.0
    if not contains(mu, lam):
        return 0.0
    (kind, x), rest = pieces[0], pieces[1:]
    if not rest:
        return skew_schur_alpha(lam, mu, x) if kind == "a" else skew_schur_beta(lam, mu, x)
    below = interlacing_below(lam) if kind == "a" else vertical_strips_below(lam)
    total = 0.0
    for nu in below:
        if contains(mu, nu):
            first = _pow(x, size(lam) - size(nu))
            if first:
                total += first * _skew_pieces(nu, mu, rest)
    return total


def skew_schur(lam: Partition, mu: Partition, spec: Specialization) -> float:
    """s_{lam/mu}(spec) for any specialization.

    Finite parameter lists use the branching rule over single-parameter
    pieces; a nonzero gamma falls back to Jacobi-Trudi.
    """
    lam, mu = partition(lam), partition(mu)
    if spec.gamma:
        return skew_schur_jt(lam, mu, spec)
    pieces = tuple(("a", a) for a in spec.alphas) + tuple(("b", b) for b in spec.betas)
    return _skew_pieces(lam, mu, pieces)


def schur(lam: Partition, spec: Specialization) -> float:
    return skew_schur(lam, EMPTY, spec)


def skew_schur_jt(lam: Partition, mu: Partition, spec: Specialization) -> float:
    """Jacobi-Trudi determinant det[h_{lam_i - i - mu_j + j}]."""
    lam, mu = partition(lam), partition(mu)
    r = max(len(lam), len(mu))
    if r == 0:
        return 1.0
    if not contains(mu, lam):
        return 0.0
    h = h_coeffs(spec, max(size(lam), 1) + r)
    mat = np.zeros((r, r))
    for i in range(r):
        for j in range(r):
            k = part(lam, i) - i - part(mu, j) + j
            mat[i, j] = h[k] if 0 <= k < len(h) else 0.0
    return float(np.linalg.det(mat))


# ---------------------------------------------------------------- signatures


def _check_lengths(lam, mu):
    if len(lam) != len(mu):
        raise ValueError(f"length mismatch: {len(lam)} vs {len(mu)}")


def _chain(upper: Sequence[int], lower: Sequence[int]) -> bool:
    """upper_1 >= lower_1 >= upper_2 >= lower_2 >= ... >= upper_n >= lower_n."""
    n = len(upper)
    return all(upper[j] >= lower[j] and (j + 1 >= n or lower[j] >= upper[j + 1]) for j in range(n))


def skew_schur_sig_alpha(lam: Signature, mu: Signature, alpha: float, sign: int) -> float:
    """s_{lam/mu}(M) for M with the single parameter alpha^+ (sign=+1) or alpha^- (sign=-1).

    The support is the interlacing chain lam_1 >= mu_1 >= lam_2 >= ... for
    alpha^+ and mu_1 >= lam_1 >= mu_2 >= ... for alpha^-.
    """
    _check_lengths(lam, mu)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    ok = _chain(lam, mu) if sign > 0 else _chain(mu, lam)
    if not ok:
        return 0.0
    n = len(lam)
    r = alpha / (1 + alpha)
    return (1 + alpha) ** (-n) * _pow(r, sign * (size(lam) - size(mu)))


def skew_schur_sig_beta(lam: Signature, mu: Signature, beta: float, sign: int) -> float:
    """s_{lam/mu}(M) for M with the single parameter beta^+ or beta^-."""
    _check_lengths(lam, mu)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not 0 <= beta < 1:
        raise ValueError("beta must lie in [0, 1)")
    if not all(sign * (l - m) in (0, 1) for l, m in zip(lam, mu)):
        return 0.0
    n = len(lam)
    return (1 - beta) ** n * _pow(beta / (1 - beta), sign * (size(lam) - size(mu)))


def skew_schur_branch(nu: Signature, lam: Signature, c: float) -> float:
    """s_{nu/lam}(c) for nu of length n+1 and lam of length n (0^0 = 1)."""
    if not signature_interlaces(lam, nu):
        return 0.0
    k = size(nu) - size(lam)
    if c == 0 and k < 0:
        raise ValueError("c = 0 with a negative exponent")
    return _pow(c, k)


def skew_schur_toeplitz(lam: Signature, mu: Signature, espec: EdreiSpec,
                        tail_tol: float = 1e-15) -> float:
    """Toeplitz minor det[M_{lam_i - i - mu_j + j}] from truncated Laurent coefficients."""
    _check_lengths(lam, mu)
    n = len(lam)
    if n == 0:
        return 1.0
    idx = np.array([[lam[i] - i - mu[j] + j for j in range(n)] for i in range(n)])
    lo, hi = int(idx.min()), int(idx.max())
    coeffs = laurent_coeffs(espec, lo, hi, tail_tol)
    return float(np.linalg.det(coeffs[idx - lo]))


def skew_schur_sig(lam: Signature, mu: Signature, espec: EdreiSpec,
                   tail_tol: float = 1e-15) -> float:
    """s_{lam/mu}(M): closed form for zero or one parameter, Toeplitz minor otherwise."""
    _check_lengths(lam, mu)
    if espec.is_trivial:
        return 1.0 if tuple(lam) == tuple(mu) else 0.0
    single = espec.single_param()
    if single is not None:
        kind, x = single
        sign = 1 if kind.endswith("+") else -1
        if kind.startswith("alpha"):
            return skew_schur_sig_alpha(lam, mu, x, sign)
        if x == 1:
            # H = u^{+-1}: a pure shift
            return 1.0 if all(l - m == sign for l, m in zip(lam, mu)) else 0.0
        return skew_schur_sig_beta(lam, mu, x, sign)
    return skew_schur_toeplitz(lam, mu, espec, tail_tol)


@lru_cache(maxsize=200_000)
def schur_poly(lam: Signature, a: tuple[float, ...]) -> float:
    """Rational Schur function s_lam(a_1..a_n) for a signature of length n = len(a),
    by the branching rule over interlacing signatures."""
    if len(lam) != len(a):
        raise ValueError("signature length must equal the number of variables")
    n = len(a)
    if n == 0:
        return 1.0
    if n == 1:
        return a[0] ** lam[0]
    total = 0.0
    an = a[-1]
    for mu in signatures_interlacing_below(lam):
        total += schur_poly(mu, a[:-1]) * an ** (size(lam) - size(mu))
    return total


# ---------------------------------------------------------------- one-sided processes


@dataclass(frozen=True)
class SchurProcessSpec:
    """rho_plus[j] is rho_j^+ (j = 0..N-1); rho_minus[j-1] is rho_j^- (j = 1..N)."""

    rho_plus: tuple[Specialization, ...]
    rho_minus: tuple[Specialization, ...]

    def __post_init__(self):
        object.__setattr__(self, "rho_plus", tuple(self.rho_plus))
        object.__setattr__(self, "rho_minus", tuple(self.rho_minus))
        if len(self.rho_plus) != len(self.rho_minus) or not self.rho_plus:
            raise ValueError("need N >= 1 specializations on each side")

    @property
    def N(self) -> int:
        return len(self.rho_plus)

    def plus(self, j: int) -> Specialization:
        return self.rho_plus[j]

    def minus(self, j: int) -> Specialization:
        return self.rho_minus[j - 1]

    def check_finite(self) -> None:
        for i in range(self.N):
            for j in range(i + 1, self.N + 1):
                pairing_H(self.plus(i), self.minus(j))

    def with_last_minus(self, spec: Specialization) -> "SchurProcessSpec":
        return SchurProcessSpec(self.rho_plus, self.rho_minus[:-1] + (spec,))

    def with_first_plus(self, spec: Specialization) -> "SchurProcessSpec":
        return SchurProcessSpec((spec,) + self.rho_plus[1:], self.rho_minus)


def process_weight(lams: Sequence[Partition], mus: Sequence[Partition],
                   spec: SchurProcessSpec) -> float:
    """Unnormalized weight of (lambda^(1..N), mu^(1..N-1))."""
    N = spec.N
    if len(lams) != N or len(mus) != N - 1:
        raise ValueError("expected N lambdas and N-1 mus")
    w = schur(lams[0], spec.plus(0))
    for j in range(1, N):
        if not w:
            return 0.0
        w *= skew_schur(lams[j - 1], mus[j - 1], spec.minus(j))
        w *= skew_schur(lams[j], mus[j - 1], spec.plus(j))
    return w * schur(lams[-1], spec.minus(N)) if w else 0.0


def partition_function_schur(spec: SchurProcessSpec) -> float:
    """Product of H(rho_i^+; rho_j^-) over 0 <= i < j <= N."""
    z = 1.0
    for i in range(spec.N):
        for j in range(i + 1, spec.N + 1):
            z *= pairing_H(spec.plus(i), spec.minus(j))
    return z


def spp_process_spec(shape: PlanePartitionShape, q: float) -> SchurProcessSpec:
    """The Schur process whose slice sequence is a q^volume plane partition."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    return _slice_spec(shape, [q ** (-j) for j in range(shape.A + shape.B + 1)])


def weighted_spp_process_spec(shape: PlanePartitionShape, q_weights: Sequence[float]) -> SchurProcessSpec:
    """Schur process with weight prod_j q_j^{|lambda^(j)|}.

    ``q_weights`` lists q_2..q_{A+B} (one per nonempty slice) or q_1..q_{A+B+1}
    with the two end values ignored.
    """
    n = shape.A + shape.B
    qs = list(map(float, q_weights))
    if len(qs) == n + 1:
        qs = qs[1:-1]
    if len(qs) != n - 1:
        raise ValueError(f"expected {n - 1} slice weights, got {len(q_weights)}")
    if any(x <= 0 for x in qs):
        raise ValueError("slice weights must be positive")
    # position variables z_j with z_{j-1}/z_j = q_j
    z = [1.0, 1.0]
    for x in qs:
        z.append(z[-1] / x)
    spec = _slice_spec(shape, z)
    try:
        spec.check_finite()
    except DivergentPairingError as exc:
        raise DivergentPairingError(f"slice weights give an infinite partition function: {exc}")
    return spec


def _slice_spec(shape: PlanePartitionShape, z: Sequence[float]) -> SchurProcessSpec:
    ups = up_steps(shape)
    N = shape.A + shape.B + 1
    plus = [TRIVIAL] + [Specialization.alpha(z[j]) if j in ups else TRIVIAL for j in range(1, N)]
    minus = [TRIVIAL if j in ups else Specialization.alpha(1 / z[j]) for j in range(1, N)] + [TRIVIAL]
    return SchurProcessSpec(tuple(plus), tuple(minus))


def slices_to_process_state(slices: Sequence[Partition], shape: PlanePartitionShape):
    """(lams, mus) of the plane-partition Schur process from the A+B+1 slices."""
    ups = up_steps(shape)
    lams = tuple(slices)
    mus = tuple(slices[j - 1] if j in ups else slices[j] for j in range(1, len(slices)))
    return lams, mus


# ---------------------------------------------------------------- two-sided processes


@dataclass(frozen=True)
class PsiTable:
    """A Z x N coefficient table given column by column through generating
    functions: Psi_{n,-j} is the coefficient of u^{n+j} in H(columns[j-1]; u).

    All columns equal gives the Toeplitz case.
    """

    columns: tuple[EdreiSpec, ...]

    def entry(self, n: int, j: int, tail_tol: float = 1e-15) -> float:
        return laurent_coeff(self.columns[j - 1], n + j, tail_tol)

    def gen(self, j: int, u: float) -> float:
        return self.columns[j - 1](u)


@dataclass(frozen=True)
class TwoSidedSpec:
    a: tuple[float, ...]
    M: tuple[tuple[EdreiSpec, ...], ...]
    psi: EdreiSpec | PsiTable

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "M", tuple(tuple(row) for row in self.M))
        if len(self.M) != len(self.a):
            raise ValueError("need one (possibly empty) list of M matrices per level")
        if any(x <= 0 for x in self.a):
            raise ValueError("a_j must be positive")
        if isinstance(self.psi, PsiTable) and len(self.psi.columns) != self.N:
            raise ValueError("Psi table must have N columns")

    @property
    def N(self) -> int:
        return len(self.a)

    @property
    def c(self) -> tuple[int, ...]:
        return tuple(len(row) for row in self.M)

    @property
    def toeplitz(self) -> bool:
        return isinstance(self.psi, EdreiSpec)

    def psi_entry(self, n: int, j: int, tail_tol: float = 1e-15) -> float:
        """Psi_{n,-j}, j = 1..N."""
        if self.toeplitz:
            return laurent_coeff(self.psi, n + j, tail_tol)
        return self.psi.entry(n, j, tail_tol)

    def psi_gen(self, j: int, u: float) -> float:
        return self.psi(u) if self.toeplitz else self.psi.gen(j, u)

    def psi_specs(self) -> tuple[EdreiSpec, ...]:
        return (self.psi,) if self.toeplitz else self.psi.columns

    def with_psi(self, psi) -> "TwoSidedSpec":
        return TwoSidedSpec(self.a, self.M, psi)

    def check_annulus(self) -> None:
        for j, aj in enumerate(self.a, start=1):
            for k in range(j, self.N + 1):
                for m in self.M[k - 1]:
                    if 1 / aj not in analyticity_annulus(m):
                        raise AnnulusError(f"1/a_{j} outside the annulus of M^({k},*)")
            for p in self.psi_specs():
                if aj not in analyticity_annulus(p):
                    raise AnnulusError(f"a_{j} outside the annulus of Psi")

    def zero_state(self):
        """The state with every signature identically zero."""
        return tuple(tuple((0,) * k for _ in range(c + 1)) for k, c in zip(range(1, self.N + 1), self.c))


def _check_two_sided_shape(seqs, spec: TwoSidedSpec):
    if len(seqs) != spec.N:
        raise ValueError(f"expected {spec.N} levels")
    for k, (row, c) in enumerate(zip(seqs, spec.c), start=1):
        if len(row) != c + 1:
            raise ValueError(f"level {k} must hold {c + 1} signatures")
        for lam in row:
            if len(lam) != k:
                raise ValueError(f"level {k} signatures must have length {k}")


def psi_minor(lam: Signature, spec: TwoSidedSpec, tail_tol: float = 1e-15) -> float:
    """det[Psi_{lam_i - i, -j}]_{i,j=1..N}."""
    N = len(lam)
    mat = np.array([[spec.psi_entry(lam[i] - (i + 1), j + 1, tail_tol) for j in range(N)]
                    for i in range(N)])
    return float(np.linalg.det(mat))


def two_sided_weight(seqs, spec: TwoSidedSpec, tail_tol: float = 1e-15) -> float:
    """Unnormalized weight of the sequence (lambda^(k,l))."""
    _check_two_sided_shape(seqs, spec)
    w = 1.0
    prev: Signature = ()
    for k in range(1, spec.N + 1):
        row = seqs[k - 1]
        w *= skew_schur_branch(row[0], prev, spec.a[k - 1])
        for l in range(1, len(row)):
            if not w:
                return 0.0
            w *= skew_schur_sig(row[l], row[l - 1], spec.M[k - 1][l - 1], tail_tol)
        prev = row[-1]
        if not w:
            return 0.0
    return w * psi_minor(prev, spec, tail_tol)


def _m_product(spec: TwoSidedSpec) -> float:
    out = 1.0
    for j in range(1, spec.N + 1):
        for k in range(j, spec.N + 1):
            for m in spec.M[k - 1]:
                out *= m(1 / spec.a[j - 1])
    return out


def _vandermonde_ratio_matrix(spec: TwoSidedSpec):
    a = np.array(spec.a)
    if len(set(spec.a)) != len(spec.a):
        raise ValueError("the determinant form needs distinct a_i")
    N = spec.N
    num = np.array([[a[i] ** (-(j + 1)) * spec.psi_gen(j + 1, a[i]) for j in range(N)] for i in range(N)])
    den = np.array([[a[i] ** (-(j + 1)) for j in range(N)] for i in range(N)])
    return float(np.linalg.det(num)), float(np.linalg.det(den))


def psi_normalizer(spec: TwoSidedSpec) -> float:
    """det[a_i^{-j} Psi_j(a_i)] / det[a_i^{-j}]; equals prod psi(a_i) when Psi is Toeplitz."""
    if spec.toeplitz:
        return math.prod(spec.psi(x) for x in spec.a)
    num, den = _vandermonde_ratio_matrix(spec)
    return num / den


def partition_function_two_sided(spec: TwoSidedSpec) -> float:
    """Closed-form normalizer of the two-sided weights."""
    spec.check_annulus()
    return psi_normalizer(spec) * _m_product(spec)


def m_psi(lam: Signature, spec: TwoSidedSpec, tail_tol: float = 1e-15) -> float:
    """Distribution of the top signature lambda^(N, c(N)).

    Uses s_lam(a) det[Psi] / normalizer, which agrees with the Vandermonde
    ratio form and stays valid for coincident a_i in the Toeplitz case.
    """
    if len(lam) != spec.N:
        raise ValueError("signature length must be N")
    if not spec.toeplitz and len(set(spec.a)) != spec.N:
        raise ValueError("a non-Toeplitz Psi needs distinct a_i")
    return schur_poly(tuple(lam), spec.a) * psi_minor(lam, spec, tail_tol) / psi_normalizer(spec)


def m_psi_vandermonde(lam: Signature, spec: TwoSidedSpec, tail_tol: float = 1e-15) -> float:
    """Literal form det[a_i^{lam_j-j}] det[Psi] / det[a_i^{-j} Psi_j(a_i)] (distinct a only)."""
    num, _ = _vandermonde_ratio_matrix(spec)
    a = spec.a
    N = spec.N
    vm = np.array([[a[i] ** (lam[j] - (j + 1)) for j in range(N)] for i in range(N)])
    return float(np.linalg.det(vm)) * psi_minor(lam, spec, tail_tol) / num
