"""Nonnegative specializations of symmetric functions and two-sided
(Edrei) Toeplitz parameter sets.

A :class:`Specialization` is encoded by its alpha, beta and gamma parameters,
so that the generating function of the complete homogeneous images is

    H(rho; u) = exp(gamma u) prod (1 + beta_i u) / (1 - alpha_i u).

An :class:`EdreiSpec` holds the parameters of a totally nonnegative
doubly-infinite Toeplitz matrix with symbol

    H(M; u) = exp(g+ (u-1) + g- (1/u-1))
              prod (1 + b+ (u-1)) (1 + b- (1/u-1)) / ((1 - a+ (u-1)) (1 - a- (1/u-1))).

Every factor of the latter is the generating function of a probability
distribution on the integers, which is how the Laurent coefficients are
computed below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats


class DivergentPairingError(ValueError):
    """The Cauchy-type sum defining H(rho1; rho2) diverges."""


class AnnulusError(ValueError):
    """An evaluation point lies outside the analyticity annulus."""


class TailToleranceError(ValueError):
    """A requested truncation tolerance cannot be met within the cap."""


def _params(xs) -> tuple[float, ...]:
    out = tuple(float(x) for x in xs)
    if any(x < 0 or math.isnan(x) for x in out):
        raise ValueError(f"parameters must be nonnegative, got {out}")
    return out


@dataclass(frozen=True)
class Specialization:
    alphas: tuple[float, ...] = ()
    betas: tuple[float, ...] = ()
    gamma: float = 0.0

    def __post_init__(self):
        # zero parameters act trivially; dropping them keeps equality/hashing canonical
        object.__setattr__(self, "alphas", tuple(a for a in _params(self.alphas) if a > 0))
        object.__setattr__(self, "betas", tuple(b for b in _params(self.betas) if b > 0))
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        object.__setattr__(self, "gamma", float(self.gamma))

    @classmethod
    def alpha(cls, a: float) -> "Specialization":
        return cls(alphas=(a,))

    @classmethod
    def beta(cls, b: float) -> "Specialization":
        return cls(betas=(b,))

    @property
    def is_trivial(self) -> bool:
        return not self.alphas and not self.betas and self.gamma == 0

    @property
    def is_single(self) -> bool:
        return self.gamma == 0 and len(self.alphas) + len(self.betas) == 1

    @property
    def admissible(self) -> bool:
        return all(a < 1 for a in self.alphas)

    def radius(self) -> float:
        """Supremum radius of the disc where H(rho; u) is holomorphic."""
        return 1 / max(self.alphas) if self.alphas else math.inf

    def pieces(self) -> list["Specialization"]:
        """Single-parameter factors: alphas in list order, then betas.

        A nonzero gamma is kept as one extra (non-single) piece.
        """
        out = [Specialization.alpha(a) for a in self.alphas]
        out += [Specialization.beta(b) for b in self.betas]
        if self.gamma:
            out.append(Specialization(gamma=self.gamma))
        return out

    def __call__(self, u: float) -> float:
        """H(rho; u) for real u inside the disc of convergence."""
        if any(a * abs(u) >= 1 for a in self.alphas):
            raise AnnulusError(f"u={u} outside the disc of H for {self}")
        val = math.exp(self.gamma * u)
        for a in self.alphas:
            val /= 1 - a * u
        for b in self.betas:
            val *= 1 + b * u
        return val


TRIVIAL = Specialization()


def h_coeffs(spec: Specialization, n_max: int) -> np.ndarray:
    """Taylor coefficients h_0..h_{n_max} of H(spec; u)."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    n = np.arange(n_max + 1)
    out = np.zeros(n_max + 1)
    out[0] = 1.0
    for a in spec.alphas:
        out = np.convolve(out, a ** n)[: n_max + 1]
    for b in spec.betas:
        out = np.convolve(out, np.array([1.0, b]))[: n_max + 1]
    if spec.gamma:
        g = np.array([spec.gamma ** k / math.factorial(k) for k in range(n_max + 1)])
        out = np.convolve(out, g)[: n_max + 1]
    return out


def power_sums(spec: Specialization, n: int) -> float:
    """Newton power sum p_n(spec)."""
    if n < 1:
        raise ValueError("n must be positive")
    val = sum(a ** n for a in spec.alphas) + (-1) ** (n - 1) * sum(b ** n for b in spec.betas)
    if n == 1:
        val += spec.gamma
    return val


def pairing_H(s1: Specialization, s2: Specialization) -> float:
    """H(s1; s2) = sum_lambda s_lambda(s1) s_lambda(s2) in closed product form."""
    val = 1.0
    log_exp = s1.gamma * s2.gamma
    log_exp += s1.gamma * (sum(s2.alphas) + sum(s2.betas))
    log_exp += s2.gamma * (sum(s1.alphas) + sum(s1.betas))
    for a in s1.alphas:
        for a2 in s2.alphas:
            if a * a2 >= 1:
                raise DivergentPairingError(f"alpha pair {a} * {a2} >= 1")
            val /= 1 - a * a2
        for b2 in s2.betas:
            val *= 1 + a * b2
    for b in s1.betas:
        for a2 in s2.alphas:
            val *= 1 + b * a2
        for b2 in s2.betas:
            if b * b2 >= 1:
                raise DivergentPairingError(f"beta pair {b} * {b2} >= 1")
            val /= 1 - b * b2
    return val * math.exp(log_exp)


def pairing_H_series(s1: Specialization, s2: Specialization, n_terms: int = 200) -> float:
    """exp(sum_{n<=n_terms} p_n(s1) p_n(s2) / n); slow reference for :func:`pairing_H`."""
    return math.exp(sum(power_sums(s1, n) * power_sums(s2, n) / n for n in range(1, n_terms + 1)))


def pairing_series(s1: Specialization, s2: Specialization, d_max: int) -> np.ndarray:
    """Coefficients c_d of t^d in H(s1; t s2), d = 0..d_max.

    Graded pieces of the Cauchy sum: c_d = sum_{|lambda|=d} s_lambda(s1) s_lambda(s2).
    """
    d = np.arange(d_max + 1)
    out = np.zeros(d_max + 1)
    out[0] = 1.0
    for a in s1.alphas:
        for a2 in s2.alphas:
            out = np.convolve(out, (a * a2) ** d)[: d_max + 1]
        for b2 in s2.betas:
            out = np.convolve(out, [1.0, a * b2])[: d_max + 1]
    for b in s1.betas:
        for a2 in s2.alphas:
            out = np.convolve(out, [1.0, b * a2])[: d_max + 1]
        for b2 in s2.betas:
            out = np.convolve(out, (b * b2) ** d)[: d_max + 1]
    lin = s1.gamma * s2.gamma + s1.gamma * (sum(s2.alphas) + sum(s2.betas)) \
        + s2.gamma * (sum(s1.alphas) + sum(s1.betas))
    if lin:
        out = np.convolve(out, [lin ** k / math.factorial(k) for k in range(d_max + 1)])[: d_max + 1]
    return out


def union(s1: Specialization, s2: Specialization) -> Specialization:
    return Specialization(s1.alphas + s2.alphas, s1.betas + s2.betas, s1.gamma + s2.gamma)


def union_all(specs) -> Specialization:
    out = TRIVIAL
    for s in specs:
        out = union(out, s)
    return out


def remove(spec: Specialization, sigma: Specialization) -> Specialization:
    """The specialization ``flat`` with union(flat, sigma) == spec.

    Raises ``ValueError`` when sigma's parameter multiset is not contained in spec's.
    """
    alphas, betas = list(spec.alphas), list(spec.betas)
    for a in sigma.alphas:
        if a not in alphas:
            raise ValueError(f"{sigma} does not divide {spec}")
        alphas.remove(a)
    for b in sigma.betas:
        if b not in betas:
            raise ValueError(f"{sigma} does not divide {spec}")
        betas.remove(b)
    if sigma.gamma > spec.gamma + 1e-15:
        raise ValueError(f"{sigma} does not divide {spec}")
    return Specialization(tuple(alphas), tuple(betas), max(spec.gamma - sigma.gamma, 0.0))


# ---------------------------------------------------------------- two-sided


@dataclass(frozen=True)
class Annulus:
    r1: float
    r2: float

    def __contains__(self, u: float) -> bool:
        return self.r1 < abs(u) < self.r2


@dataclass(frozen=True)
class EdreiSpec:
    alpha_plus: tuple[float, ...] = ()
    alpha_minus: tuple[float, ...] = ()
    beta_plus: tuple[float, ...] = ()
    beta_minus: tuple[float, ...] = ()
    gamma_plus: float = 0.0
    gamma_minus: float = 0.0

    def __post_init__(self):
        for name in ("alpha_plus", "alpha_minus", "beta_plus", "beta_minus"):
            object.__setattr__(self, name, tuple(x for x in _params(getattr(self, name)) if x > 0))
        if any(b > 1 for b in self.beta_plus + self.beta_minus):
            raise ValueError("beta parameters must be <= 1")
        if self.gamma_plus < 0 or self.gamma_minus < 0:
            raise ValueError("gamma parameters must be nonnegative")
        object.__setattr__(self, "gamma_plus", float(self.gamma_plus))
        object.__setattr__(self, "gamma_minus", float(self.gamma_minus))

    @classmethod
    def single(cls, kind: str, value: float) -> "EdreiSpec":
        """``kind`` is one of 'alpha+', 'alpha-', 'beta+', 'beta-'."""
        key = {"alpha+": "alpha_plus", "alpha-": "alpha_minus",
               "beta+": "beta_plus", "beta-": "beta_minus"}[kind]
        return cls(**{key: (value,)})

    @property
    def is_trivial(self) -> bool:
        return not (self.alpha_plus or self.alpha_minus or self.beta_plus or self.beta_minus
                    or self.gamma_plus or self.gamma_minus)

    @property
    def has_gamma(self) -> bool:
        return bool(self.gamma_plus or self.gamma_minus)

    @property
    def is_canonical(self) -> bool:
        return max(self.beta_plus, default=0) + max(self.beta_minus, default=0) <= 1

    def single_param(self) -> tuple[str, float] | None:
        """(kind, value) when exactly one alpha/beta parameter is nonzero."""
        found = [(k, v) for k, vals in (("alpha+", self.alpha_plus), ("alpha-", self.alpha_minus),
                                         ("beta+", self.beta_plus), ("beta-", self.beta_minus))
                 for v in vals]
        if len(found) == 1 and not self.has_gamma:
            return found[0]
        return None

    def pieces(self) -> list["EdreiSpec"]:
        """Single-parameter factors, alpha+ beta+ alpha- beta- order."""
        out = [EdreiSpec(alpha_plus=(a,)) for a in self.alpha_plus]
        out += [EdreiSpec(beta_plus=(b,)) for b in self.beta_plus]
        out += [EdreiSpec(alpha_minus=(a,)) for a in self.alpha_minus]
        out += [EdreiSpec(beta_minus=(b,)) for b in self.beta_minus]
        return out

    def positive_part(self) -> "EdreiSpec":
        return EdreiSpec(alpha_plus=self.alpha_plus, beta_plus=self.beta_plus,
                         gamma_plus=self.gamma_plus)

    def negative_part(self) -> "EdreiSpec":
        return EdreiSpec(alpha_minus=self.alpha_minus, beta_minus=self.beta_minus,
                         gamma_minus=self.gamma_minus)

    def transpose(self) -> "EdreiSpec":
        """M^t, with H(M^t; u) = H(M; 1/u)."""
        return EdreiSpec(self.alpha_minus, self.alpha_plus, self.beta_minus, self.beta_plus,
                         self.gamma_minus, self.gamma_plus)

    def __call__(self, u: float) -> float:
        """H(M; u) for real u in the analyticity annulus."""
        if u not in analyticity_annulus(self):
            raise AnnulusError(f"u={u} outside the annulus of {self}")
        val = math.exp(self.gamma_plus * (u - 1) + self.gamma_minus * (1 / u - 1))
        for a in self.alpha_plus:
            val /= 1 - a * (u - 1)
        for a in self.alpha_minus:
            val /= 1 - a * (1 / u - 1)
        for b in self.beta_plus:
            val *= 1 + b * (u - 1)
        for b in self.beta_minus:
            val *= 1 + b * (1 / u - 1)
        return val


def edrei_product(m1: EdreiSpec, m2: EdreiSpec) -> EdreiSpec:
    """Parameters of the Toeplitz product M1 M2 (concatenated parameter lists)."""
    return EdreiSpec(m1.alpha_plus + m2.alpha_plus, m1.alpha_minus + m2.alpha_minus,
                     m1.beta_plus + m2.beta_plus, m1.beta_minus + m2.beta_minus,
                     m1.gamma_plus + m2.gamma_plus, m1.gamma_minus + m2.gamma_minus)


def analyticity_annulus(espec: EdreiSpec) -> Annulus:
    r1 = max((a / (1 + a) for a in espec.alpha_minus), default=0.0)
    r2 = min(((1 + a) / a for a in espec.alpha_plus), default=math.inf)
    return Annulus(r1, r2)


MAX_LAURENT_SPAN = 200_000


def _factor_pmfs(espec: EdreiSpec, tol: float) -> list[tuple[int, np.ndarray]]:
    """(offset, pmf) for each elementary factor, each truncated to lose < tol."""
    out = []
    for sign, alphas in ((1, espec.alpha_plus), (-1, espec.alpha_minus)):
        for a in alphas:
            r = a / (1 + a)
            # tail beyond K is r^(K+1)
            K = 0 if r == 0 else max(0, math.ceil(math.log(tol) / math.log(r)))
            if K > MAX_LAURENT_SPAN:
                raise TailToleranceError(f"alpha={a} needs {K} terms for tol={tol}")
            pmf = (1 - r) * r ** np.arange(K + 1)
            out.append((0, pmf) if sign > 0 else (-K, pmf[::-1].copy()))
    for b in espec.beta_plus:
        out.append((0, np.array([1 - b, b])))
    for b in espec.beta_minus:
        out.append((-1, np.array([b, 1 - b])))
    for sign, g in ((1, espec.gamma_plus), (-1, espec.gamma_minus)):
        if g:
            K = int(stats.poisson.isf(tol, g)) + 1
            if K > MAX_LAURENT_SPAN:
                raise TailToleranceError(f"gamma={g} needs {K} terms for tol={tol}")
            pmf = stats.poisson.pmf(np.arange(K + 1), g)
            out.append((0, pmf) if sign > 0 else (-K, pmf[::-1].copy()))
    return out


@lru_cache(maxsize=256)
def laurent_table(espec: EdreiSpec, tail_tol: float = 1e-15) -> tuple[int, np.ndarray]:
    """(offset, coefficients) with coefficients[i] = M_{offset + i}.

    Coefficients outside the table are treated as zero; the total mass
    discarded (hence the error of any single coefficient) is < tail_tol.
    """
    if tail_tol <= 0:
        raise ValueError("tail_tol must be positive")
    factors = _factor_pmfs(espec, tail_tol / max(1, _n_factors(espec)))
    offset, coeffs = 0, np.array([1.0])
    for off, pmf in factors:
        offset += off
        coeffs = np.convolve(coeffs, pmf)
    coeffs.setflags(write=False)
    return offset, coeffs


def _n_factors(espec: EdreiSpec) -> int:
    return (len(espec.alpha_plus) + len(espec.alpha_minus) + len(espec.beta_plus)
            + len(espec.beta_minus) + (espec.gamma_plus > 0) + (espec.gamma_minus > 0))


def laurent_coeffs(espec: EdreiSpec, n_min: int, n_max: int, tail_tol: float = 1e-15) -> np.ndarray:
    """M_{n_min}..M_{n_max}, each within tail_tol of its exact value."""
    if n_min > n_max:
        raise ValueError("n_min must not exceed n_max")
    offset, table = laurent_table(espec, tail_tol)
    out = np.zeros(n_max - n_min + 1)
    lo, hi = max(n_min, offset), min(n_max, offset + len(table) - 1)
    if lo <= hi:
        out[lo - n_min: hi - n_min + 1] = table[lo - offset: hi - offset + 1]
    return out


def laurent_coeff(espec: EdreiSpec, n: int, tail_tol: float = 1e-15) -> float:
    offset, table = laurent_table(espec, tail_tol)
    i = n - offset
    return float(table[i]) if 0 <= i < len(table) else 0.0
