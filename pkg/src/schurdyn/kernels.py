"""One-dimensional truncated geometric / Bernoulli laws and the conditional
update kernels built from them.

A partition kernel draws nu given two inputs (lam, mu) with probability
proportional to a product of two skew Schur factors, one relating nu to lam
and one relating nu to mu.  Each factor is "up" (s_{nu/x}) or "down"
(s_{x/nu}).  For single-parameter specializations every factor confines
nu_j to a window and contributes xi^{nu_j}, so the kernel is a product of
one-dimensional laws whenever one factor forces interlacing; two dual
(beta) factors are handled by conjugating everything.  Signature kernels
work the same way, except that two beta-type factors are sampled exactly
by a small transfer recursion enforcing nu_1 >= nu_2 >= ....
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .combinatorics import (
    Partition, Signature, conjugate, contains, part, partition, partitions_containing, size,
    sub_partitions,
)
from .schur_eval import skew_schur
from .specializations import (
    DivergentPairingError, EdreiSpec, Specialization, pairing_H,
)

INF = math.inf


class KernelError(ValueError):
    """A kernel was asked for a draw whose support is empty."""


@dataclass
class DrawCounter:
    """Number of one-dimensional draws made from a non-singleton support."""

    nontrivial_draws: int = 0


class KernelMode(enum.Enum):
    UP_UP = "↑↑"
    DOWN_UP = "↓↑"
    UP_DOWN = "↑↓"
    DOWN_DOWN = "↓↓"

    @property
    def first_up(self) -> bool:
        return self in (KernelMode.UP_UP, KernelMode.UP_DOWN)

    @property
    def second_up(self) -> bool:
        return self in (KernelMode.UP_UP, KernelMode.DOWN_UP)


# ---------------------------------------------------------------- 1-d laws


@dataclass(frozen=True)
class TruncGeom:
    """G^xi_{m,n}: P(k) proportional to xi^k on m..n (n may be +inf, m may be -inf)."""

    xi: float
    m: float
    n: float

    def __post_init__(self):
        if self.m > self.n:
            raise ValueError("need m <= n")
        if self.n == INF and not 0 <= self.xi < 1:
            raise ValueError("an unbounded support needs xi < 1")
        if self.m == -INF and not self.xi > 1:
            raise ValueError("a support unbounded below needs xi > 1")


@dataclass(frozen=True)
class TruncBern:
    """B^p_{m,n} with n in {m, m+1} and odds P(m+1)/P(m) = p."""

    p: float
    m: int
    n: int

    def __post_init__(self):
        if self.n - self.m not in (0, 1):
            raise ValueError("n - m must be 0 or 1")
        if self.p < 0:
            raise ValueError("odds must be nonnegative")


def _is_point(xi: float, lo: float, hi: float) -> bool:
    return lo == hi or xi == 0 or xi == INF


def _point(xi: float, lo: float, hi: float) -> int:
    if lo == hi:
        return int(lo)
    if xi == 0:
        if lo == -INF:
            raise KernelError("xi = 0 on a support unbounded below")
        return int(lo)
    if hi == INF:
        raise KernelError("xi = inf on a support unbounded above")
    return int(hi)


def _finite_offset(r: float, L: int, u: float) -> int:
    """Inverse CDF of P(i) proportional to r^i on 0..L, 0 < r < 1."""
    lr = math.log(r)
    total = -math.expm1((L + 1) * lr)
    return min(int(math.log1p(-u * total) / lr), L)


def draw(xi: float, lo: float, hi: float, rng, counter: DrawCounter | None = None) -> int:
    """One draw of G^xi_{lo,hi}; consumes a uniform only for non-singleton supports."""
    if _is_point(xi, lo, hi):
        return _point(xi, lo, hi)
    if counter is not None:
        counter.nontrivial_draws += 1
    u = rng.random()
    if hi == INF:
        if xi >= 1 - 1e-12:
            raise DivergentPairingError(f"unbounded geometric with xi={xi}")
        return int(lo) + int(math.log(1.0 - u) / math.log(xi))
    if lo == -INF:
        if xi <= 1 + 1e-12:
            raise DivergentPairingError(f"geometric unbounded below with xi={xi}")
        return int(hi) - int(math.log(1.0 - u) / -math.log(xi))
    lo, hi = int(lo), int(hi)
    L = hi - lo
    if xi == 1.0:
        return lo + min(int(u * (L + 1)), L)
    if xi < 1.0:
        return lo + _finite_offset(xi, L, u)
    return hi - _finite_offset(1.0 / xi, L, u)


def window_pmf(xi: float, lo: float, hi: float, tail_tol: float = 1e-15) -> tuple[list[int], np.ndarray, float]:
    """(values, probabilities, dropped mass) of G^xi_{lo,hi}, truncating infinite ends."""
    if _is_point(xi, lo, hi):
        return [_point(xi, lo, hi)], np.array([1.0]), 0.0
    if hi == INF or lo == -INF:
        r = xi if hi == INF else 1.0 / xi
        if not 0 < r < 1:
            raise DivergentPairingError(f"unbounded geometric with ratio {r}")
        K = max(0, math.ceil(math.log(tail_tol) / math.log(r)))
        probs = (1 - r) * r ** np.arange(K + 1)
        tail = r ** (K + 1)
        if hi == INF:
            return list(range(int(lo), int(lo) + K + 1)), probs, tail
        return list(range(int(hi), int(hi) - K - 1, -1)), probs, tail
    lo, hi = int(lo), int(hi)
    k = np.arange(hi - lo + 1, dtype=float)
    if xi <= 1:
        w = xi ** k
    else:
        w = (1 / xi) ** (hi - lo - k)
    return list(range(lo, hi + 1)), w / w.sum(), 0.0


def geom_pmf(g: TruncGeom, k: int) -> float:
    if not g.m <= k <= g.n:
        return 0.0
    vals, probs, _ = window_pmf(g.xi, g.m, g.n, 1e-300) if math.isinf(g.n) or math.isinf(g.m) \
        else window_pmf(g.xi, g.m, g.n)
    if g.n == INF:
        return (1 - g.xi) * g.xi ** (k - g.m)
    if g.m == -INF:
        r = 1 / g.xi
        return (1 - r) * r ** (g.n - k)
    return float(probs[vals.index(k)])


def geom_sample(g: TruncGeom, rng, counter: DrawCounter | None = None) -> int:
    return draw(g.xi, g.m, g.n, rng, counter)


def bern_pmf(b: TruncBern, k: int) -> float:
    if b.n == b.m:
        return 1.0 if k == b.m else 0.0
    if k == b.m:
        return 1 / (1 + b.p)
    if k == b.n:
        return b.p / (1 + b.p)
    return 0.0


def bern_sample(b: TruncBern, rng, counter: DrawCounter | None = None) -> int:
    return draw(b.p, b.m, b.n, rng, counter)


def sample_discrete(values: Sequence, probs: Sequence[float], rng, counter: DrawCounter | None = None):
    """Inverse-CDF draw from an explicit finite law; no uniform used for point masses."""
    nz = [i for i, p in enumerate(probs) if p > 0]
    if not nz:
        raise KernelError("empty discrete law")
    if len(nz) == 1:
        return values[nz[0]]
    if counter is not None:
        counter.nontrivial_draws += 1
    u = rng.random() * math.fsum(probs)
    acc = 0.0
    for i in nz:
        acc += probs[i]
        if u < acc:
            return values[i]
    return values[nz[-1]]


# ---------------------------------------------------------------- factor windows


def _factor(spec: Specialization) -> tuple[str, float]:
    """('a', alpha), ('b', beta) or ('0', 1.0) for a single or trivial specialization."""
    if spec.is_trivial:
        return "0", 1.0
    if not spec.is_single:
        raise ValueError(f"closed-form kernels need a single-parameter specialization, got {spec}")
    return ("a", spec.alphas[0]) if spec.alphas else ("b", spec.betas[0])


def _part_window(up: bool, kind: str, lam: Partition, i: int) -> tuple[float, float]:
    li = part(lam, i)
    if kind == "0":
        return li, li
    if kind == "a":
        if up:
            return li, (INF if i == 0 else part(lam, i - 1))
        return part(lam, i + 1), li
    if up:
        return li, li + 1
    return max(li - 1, 0), li


def _ratio(up: bool, kind: str, x: float) -> float:
    if kind == "0":
        return 1.0
    return x if up else 1.0 / x


def _partition_windows(lam, mu, up1, f1, up2, f2):
    (k1, x1), (k2, x2) = f1, f2
    xi = _ratio(up1, k1, x1) * _ratio(up2, k2, x2)
    L = max(len(lam), len(mu)) + (1 if (up1 and k1 != "0") or (up2 and k2 != "0") else 0)
    wins = []
    for i in range(L):
        lo1, hi1 = _part_window(up1, k1, lam, i)
        lo2, hi2 = _part_window(up2, k2, mu, i)
        lo, hi = max(lo1, lo2, 0), min(hi1, hi2)
        if lo > hi:
            raise KernelError(f"empty window at coordinate {i + 1}: lam={lam}, mu={mu}, "
                              f"factors={(up1, f1)}, {(up2, f2)}")
        wins.append((lo, hi))
    return xi, wins


def _both_dual(f1, f2) -> bool:
    return f1[0] == "b" and f2[0] == "b"


def partition_kernel(lam: Partition, mu: Partition, rho1: Specialization, rho2: Specialization,
                     mode: KernelMode, rng, counter: DrawCounter | None = None) -> Partition:
    """Draw nu from P_{rho1,rho2}(lam, mu; mode) for single or trivial rho's."""
    f1, f2 = _factor(rho1), _factor(rho2)
    if _both_dual(f1, f2):
        f1, f2 = ("a", f1[1]), ("a", f2[1])
        nu = _draw_partition(conjugate(lam), conjugate(mu), mode, f1, f2, rng, counter)
        return conjugate(nu)
    return _draw_partition(lam, mu, mode, f1, f2, rng, counter)


def _draw_partition(lam, mu, mode, f1, f2, rng, counter):
    xi, wins = _partition_windows(lam, mu, mode.first_up, f1, mode.second_up, f2)
    return partition([draw(xi, lo, hi, rng, counter) for lo, hi in wins])


def partition_kernel_pmf(lam: Partition, mu: Partition, rho1: Specialization, rho2: Specialization,
                         mode: KernelMode, tail_tol: float = 1e-15) -> tuple[dict, float]:
    """Exact law of :func:`partition_kernel` as ({nu: prob}, dropped mass)."""
    f1, f2 = _factor(rho1), _factor(rho2)
    conj = _both_dual(f1, f2)
    if conj:
        f1, f2 = ("a", f1[1]), ("a", f2[1])
        lam, mu = conjugate(lam), conjugate(mu)
    xi, wins = _partition_windows(lam, mu, mode.first_up, f1, mode.second_up, f2)
    out, tail = _product_pmf(xi, wins, tail_tol)
    if conj:
        out = {conjugate(k): v for k, v in out.items()}
    return {partition(k): v for k, v in out.items()}, tail


def _product_pmf(xi, wins, tail_tol):
    coords, tail = [], 0.0
    for lo, hi in wins:
        vals, probs, t = window_pmf(xi, lo, hi, tail_tol)
        coords.append(list(zip(vals, probs)))
        tail += t
    out = {}
    for combo in itertools.product(*coords):
        key = tuple(v for v, _ in combo)
        out[key] = out.get(key, 0.0) + math.prod(p for _, p in combo)
    return out, min(tail, 1.0)


# named closed-form instances; a zero alpha parameter is read as the xi -> 0
# limit (nu sits at the lower end of every window) rather than as a trivial
# specialization


def up_up_alpha(lam, mu, a, b, rng, counter=None) -> Partition:
    """nu ~ const * s_{nu/lam}(a) s_{nu/mu}(b); needs ab < 1."""
    if a * b >= 1:
        raise DivergentPairingError("up-up kernel needs ab < 1")
    return _draw_partition(lam, mu, KernelMode.UP_UP, ("a", a), ("a", b), rng, counter)


def down_up_alpha(lam, mu, a, b, rng, counter=None) -> Partition:
    """nu ~ const * s_{lam/nu}(a) s_{nu/mu}(b)."""
    if a <= 0:
        raise ValueError("a must be positive")
    return _draw_partition(lam, mu, KernelMode.DOWN_UP, ("a", a), ("a", b), rng, counter)


def up_up_beta_alpha(lam, mu, c, b, rng, counter=None) -> Partition:
    """nu ~ const * s_{nu/lam}(beta=c) s_{nu/mu}(alpha=b)."""
    return _draw_partition(lam, mu, KernelMode.UP_UP, ("b", c), ("a", b), rng, counter)


def down_up_beta_alpha(lam, mu, c, b, rng, counter=None) -> Partition:
    """nu ~ const * s_{lam/nu}(beta=c) s_{nu/mu}(alpha=b); needs c > 0."""
    if c <= 0:
        raise ValueError("c must be positive")
    return _draw_partition(lam, mu, KernelMode.DOWN_UP, ("b", c), ("a", b), rng, counter)


# ---------------------------------------------------------------- generic enumeration


def _growth_bounds(spec: Specialization) -> tuple[float, float]:
    """(extra rows, extra columns) by which s_{nu/lam}(spec) > 0 lets nu exceed lam."""
    if spec.gamma:
        return INF, INF
    rows = len(spec.alphas) if not spec.betas else INF
    cols = len(spec.betas) if not spec.alphas else INF
    return rows, cols


def generic_kernel(lam: Partition, mu: Partition, rho1: Specialization, rho2: Specialization,
                   mode: KernelMode, tail_tol: float = 1e-13, max_degree: int = 400) -> tuple[dict, float]:
    """P_{rho1,rho2}(lam, mu; mode) by direct enumeration of skew Schur weights.

    Finite modes are exact.  For the up-up mode the normalizer is computed in
    closed form, H(rho1;rho2) * sum_tau s_{lam/tau}(rho2) s_{mu/tau}(rho1), and
    nu is enumerated by increasing size until the captured mass is within
    tail_tol of it.
    """
    lam, mu = partition(lam), partition(mu)
    if mode is KernelMode.UP_UP:
        z = pairing_H(rho1, rho2) * sum(skew_schur(lam, t, rho2) * skew_schur(mu, t, rho1)
                                       for t in sub_partitions(lam) if contains(t, mu))
        if z <= 0:
            raise KernelError(f"empty up-up support for lam={lam}, mu={mu}")
        outer = partition([max(part(lam, i), part(mu, i)) for i in range(max(len(lam), len(mu)))])
        out, acc = {}, 0.0
        r1, c1 = _growth_bounds(rho1)
        r2, c2 = _growth_bounds(rho2)
        max_len = min(len(lam) + r1, len(mu) + r2)
        max_first = min(part(lam, 0) + c1, part(mu, 0) + c2)
        top = size(outer) + max_degree
        if max_len < INF and max_first < INF:
            top = min(top, int(max_len * max_first))
        for d in range(size(outer), top + 1):
            for nu in partitions_containing(outer, d, max_len, max_first):
                w = skew_schur(nu, lam, rho1) * skew_schur(nu, mu, rho2)
                if w:
                    out[nu] = w / z
                    acc += w / z
            if 1 - acc <= tail_tol:
                break
        else:
            if not (max_len < INF and max_first < INF) or 1 - acc > 1e-12:
                raise KernelError("up-up enumeration did not reach the requested tail")
        return out, max(1 - acc, 0.0)
    if mode is KernelMode.DOWN_UP:
        cands, wf = sub_partitions(lam), lambda nu: skew_schur(lam, nu, rho1) * skew_schur(nu, mu, rho2)
    elif mode is KernelMode.UP_DOWN:
        cands, wf = sub_partitions(mu), lambda nu: skew_schur(nu, lam, rho1) * skew_schur(mu, nu, rho2)
    else:
        inner = partition([min(part(lam, i), part(mu, i)) for i in range(min(len(lam), len(mu)))])
        cands, wf = sub_partitions(inner), lambda nu: skew_schur(lam, nu, rho1) * skew_schur(mu, nu, rho2)
    weights = {nu: wf(nu) for nu in cands}
    weights = {k: v for k, v in weights.items() if v > 0}
    if not weights:
        raise KernelError(f"empty {mode.value} support for lam={lam}, mu={mu}")
    z = math.fsum(weights.values())
    return {k: v / z for k, v in weights.items()}, 0.0


def kernel(lam, mu, rho1: Specialization, rho2: Specialization, mode: KernelMode, rng,
           counter: DrawCounter | None = None, tail_tol: float = 1e-15) -> Partition:
    """Closed form for single/trivial specializations, enumeration otherwise."""
    if (rho1.is_single or rho1.is_trivial) and (rho2.is_single or rho2.is_trivial):
        return partition_kernel(lam, mu, rho1, rho2, mode, rng, counter)
    pmf, _ = generic_kernel(lam, mu, rho1, rho2, mode, tail_tol)
    keys = sorted(pmf)
    return sample_discrete(keys, [pmf[k] for k in keys], rng, counter)


def kernel_pmf(lam, mu, rho1: Specialization, rho2: Specialization, mode: KernelMode,
               tail_tol: float = 1e-15) -> tuple[dict, float]:
    if (rho1.is_single or rho1.is_trivial) and (rho2.is_single or rho2.is_trivial):
        return partition_kernel_pmf(lam, mu, rho1, rho2, mode, tail_tol)
    return generic_kernel(lam, mu, rho1, rho2, mode, max(tail_tol, 1e-13))


# ---------------------------------------------------------------- signature kernels


def _edrei_factor(m: EdreiSpec) -> tuple[str, float]:
    if m.has_gamma:
        raise ValueError("gamma parameters are not supported by the samplers")
    if m.is_trivial:
        return "0", 1.0
    single = m.single_param()
    if single is None:
        raise ValueError(f"signature kernels need a single-parameter matrix, got {m}")
    return single


def _sig_window(kind: str, x: float, lam: Signature, i: int, n: int):
    """(lo, hi, ratio) confining nu_i for the factor s_{nu/lam}(.)."""
    if kind == "branch":  # lam has length n-1
        lo = lam[i] if i < n - 1 else -INF
        hi = lam[i - 1] if i >= 1 else INF
        return lo, hi, x
    li = lam[i]
    if kind == "0":
        return li, li, 1.0
    if kind == "alpha+":
        return li, (lam[i - 1] if i >= 1 else INF), x / (1 + x)
    if kind == "alpha-":
        return (lam[i + 1] if i + 1 < n else -INF), li, (1 + x) / x
    if kind == "beta+":
        if x == 1:
            return li + 1, li + 1, 1.0
        return li, li + 1, x / (1 - x)
    if kind == "beta-":
        if x == 1:
            return li - 1, li - 1, 1.0
        return li - 1, li, (1 - x) / x
    raise ValueError(kind)


def _is_dual(kind: str) -> bool:
    return kind.startswith("beta") or kind == "0"


def _sig_setup(lam, mu, f1, f2, n):
    (k1, x1), (k2, x2) = f1, f2
    wins, xi = [], None
    for i in range(n):
        lo1, hi1, r1 = _sig_window(k1, x1, lam, i, n)
        lo2, hi2, r2 = _sig_window(k2, x2, mu, i, n)
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if lo > hi:
            raise KernelError(f"empty window at coordinate {i + 1}: lam={lam}, mu={mu}, factors={f1}, {f2}")
        wins.append((lo, hi))
        xi = r1 * r2
    return xi, wins


def _sig_draw(lam, mu, f1, f2, n, rng, counter):
    xi, wins = _sig_setup(lam, mu, f1, f2, n)
    if _is_dual(f1[0]) and _is_dual(f2[0]):
        vals, weights = _dp_tables(xi, wins)
        out, cap = [], INF
        for i in range(n):
            cand = [(v, w) for v, w in zip(vals[i], weights[i]) if v <= cap]
            v = sample_discrete([c[0] for c in cand], [c[1] for c in cand], rng, counter)
            out.append(v)
            cap = v
        return tuple(out)
    return tuple(draw(xi, lo, hi, rng, counter) for lo, hi in wins)


def _dp_tables(xi, wins):
    """Backward transfer weights F_i(v) for finite windows under nu_i >= nu_{i+1}."""
    n = len(wins)
    vals = [list(range(int(lo), int(hi) + 1)) for lo, hi in wins]
    F: list[list[float]] = [None] * n
    for i in reversed(range(n)):
        lo = wins[i][0]
        row = []
        for v in vals[i]:
            w = xi ** (v - lo)
            if i + 1 < n:
                w *= sum(f for v2, f in zip(vals[i + 1], F[i + 1]) if v2 <= v)
            row.append(w)
        F[i] = row
    return vals, F


def _sig_pmf(lam, mu, f1, f2, n, tail_tol):
    xi, wins = _sig_setup(lam, mu, f1, f2, n)
    if _is_dual(f1[0]) and _is_dual(f2[0]):
        vals = [range(int(lo), int(hi) + 1) for lo, hi in wins]
        weights = {}
        for combo in itertools.product(*vals):
            if all(combo[i] >= combo[i + 1] for i in range(n - 1)):
                weights[combo] = xi ** sum(c - w[0] for c, w in zip(combo, wins))
        if not weights:
            raise KernelError(f"empty support: lam={lam}, mu={mu}")
        z = math.fsum(weights.values())
        return {k: v / z for k, v in weights.items()}, 0.0
    return _product_pmf(xi, wins, tail_tol)


def sig_kernel_aQ(lam: Signature, mu: Signature, Q: EdreiSpec, a: float, rng,
                  counter: DrawCounter | None = None) -> Signature:
    """nu in GT_n with probability const * s_{nu/lam}(a) s_{nu/mu}(Q); lam in GT_{n-1}."""
    n = len(mu)
    if len(lam) != n - 1:
        raise ValueError("lam must be one shorter than mu")
    if a <= 0:
        raise ValueError("a must be positive")
    return _sig_draw(lam, mu, ("branch", a), _edrei_factor(Q), n, rng, counter)


def sig_kernel_aQ_pmf(lam, mu, Q: EdreiSpec, a: float, tail_tol: float = 1e-15) -> tuple[dict, float]:
    n = len(mu)
    if len(lam) != n - 1:
        raise ValueError("lam must be one shorter than mu")
    return _sig_pmf(lam, mu, ("branch", a), _edrei_factor(Q), n, tail_tol)


def sig_kernel_MQ(lam: Signature, mu: Signature, M: EdreiSpec, Q: EdreiSpec, rng,
                  counter: DrawCounter | None = None) -> Signature:
    """nu in GT_n with probability const * s_{nu/lam}(M) s_{nu/mu}(Q)."""
    n = len(mu)
    if len(lam) != n:
        raise ValueError("lam and mu must have equal length")
    return _sig_draw(lam, mu, _edrei_factor(M), _edrei_factor(Q), n, rng, counter)


def sig_kernel_MQ_pmf(lam, mu, M: EdreiSpec, Q: EdreiSpec, tail_tol: float = 1e-15) -> tuple[dict, float]:
    n = len(mu)
    if len(lam) != n:
        raise ValueError("lam and mu must have equal length")
    return _sig_pmf(lam, mu, _edrei_factor(M), _edrei_factor(Q), n, tail_tol)
