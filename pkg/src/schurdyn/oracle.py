"""Brute-force reference measures and verification helpers.

Nothing here imports the samplers or the kernels: reference laws come from
direct summation of skew Schur weights, so comparisons against the samplers
are between independent computations.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .combinatorics import (
    Partition, PlanePartition, PlanePartitionShape, Signature, contains, part, partition,
    partitions_containing, partitions_in_box, signatures_in_range, signatures_interlacing_below,
    size, sub_partitions, up_steps, volume,
)
from .schur_eval import (
    SchurProcessSpec, TwoSidedSpec, partition_function_schur, partition_function_two_sided,
    process_weight, schur, schur_poly, skew_schur, skew_schur_branch, skew_schur_sig,
    spp_process_spec, two_sided_weight,
)
from .specializations import (
    EdreiSpec, Specialization, analyticity_annulus, pairing_H, pairing_series, remove,
)

DEFAULT_STATE_CAP = 2_000_000


class EnumerationTooLarge(RuntimeError):
    """An enumeration would exceed its configured state-count cap."""


@dataclass
class TruncatedMeasure:
    """Explicit probabilities on a finite support plus a bound on the missing mass."""

    support: list
    probs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs differ in length")
        if (self.probs < 0).any():
            raise ValueError("negative probability")

    @classmethod
    def from_dict(cls, pmf: Mapping, tail_bound: float = 0.0) -> "TruncatedMeasure":
        keys = sorted(pmf)
        return cls(keys, np.array([pmf[k] for k in keys]), tail_bound)

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs))

    @property
    def mass(self) -> float:
        return float(math.fsum(self.probs))


@dataclass
class TestReport:
    """Outcome of one statistical or numerical check."""

    __test__ = False  # not a pytest class

    name: str
    passed: bool
    statistic: float = float("nan")
    p_value: float | None = None
    max_residual: float | None = None
    tolerance: float | None = None
    tail_bound: float = 0.0
    sample_size: int = 0
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"name": self.name, "passed": bool(self.passed), "statistic": _num(self.statistic)}
        for key in ("p_value", "max_residual", "tolerance", "seed"):
            val = getattr(self, key)
            if val is not None:
                out[key] = _num(val)
        out["tail_bound"] = _num(self.tail_bound)
        out["sample_size"] = self.sample_size
        if self.details:
            out["details"] = self.details
        return out

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        bits = []
        if self.p_value is not None:
            bits.append(f"p={self.p_value:.3g}")
        if self.max_residual is not None:
            bits.append(f"residual={self.max_residual:.3g}")
        if self.tolerance is not None:
            bits.append(f"tol={self.tolerance:.3g}")
        if self.tail_bound:
            bits.append(f"tail<={self.tail_bound:.3g}")
        return f"[{status}] {self.name}" + (": " + ", ".join(bits) if bits else "")


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else str(x)


def residual_report(name: str, residual: float, tol: float, tail: float = 0.0, **details) -> TestReport:
    """Pass iff residual <= tol + tail, and the tail is small enough to matter."""
    meaningful = tail < max(tol, 1e-300) or tail == 0
    return TestReport(name, bool(residual <= tol + tail and meaningful), max_residual=float(residual),
                      tolerance=tol, tail_bound=tail, details=details)


# ---------------------------------------------------------------- statistics


def histogram(samples: Iterable[Hashable]) -> dict:
    out: dict = {}
    for s in samples:
        out[s] = out.get(s, 0) + 1
    return out


def chi_square(counts: Mapping, reference: TruncatedMeasure, alpha: float = 1e-3,
               min_expected: float = 5.0, name: str = "chi-square", seed: int | None = None) -> TestReport:
    """Pearson test of observed counts against a reference law.

    Support points with expected count below ``min_expected`` are pooled
    together with the reference tail and any unseen states into one bin.
    """
    total = int(sum(counts.values()))
    if total == 0:
        raise ValueError("chi-square needs at least one sample")
    ref = reference.as_dict()
    kept = [k for k in reference.support if ref[k] * total >= min_expected]
    if len(kept) < 1:
        raise ValueError("insufficient samples for any bin to reach the expected-count threshold")
    obs = [counts.get(k, 0) for k in kept]
    exp = [ref[k] * total for k in kept]
    rest_obs = total - sum(obs)
    rest_exp = total - sum(exp)
    if rest_exp >= min_expected or rest_obs > 0:
        obs.append(rest_obs)
        exp.append(max(rest_exp, 1e-300))
    if len(obs) < 2:
        return TestReport(name, True, 0.0, 1.0, sample_size=total, seed=seed)
    exp = np.array(exp) * (total / sum(exp))
    stat, p = stats.chisquare(np.array(obs, dtype=float), exp)
    return TestReport(name, bool(p > alpha), float(stat), float(p), tolerance=alpha,
                      tail_bound=reference.tail_bound, sample_size=total, seed=seed,
                      details={"bins": len(obs)})


def tv_distance(empirical: Mapping, reference: TruncatedMeasure) -> float:
    """Upper bound on the total variation distance; ``empirical`` may hold counts or probabilities."""
    total = float(sum(empirical.values()))
    emp = {k: v / total for k, v in empirical.items()}
    ref = reference.as_dict()
    diff = sum(abs(emp.get(k, 0.0) - p) for k, p in ref.items())
    outside = sum(v for k, v in emp.items() if k not in ref)
    return 0.5 * (diff + outside + reference.tail_bound)


def pmf_tv(p: Mapping, q: Mapping) -> float:
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in set(p) | set(q))


# ---------------------------------------------------------------- plane partitions


def _row_states(length: int, cap: int) -> list[tuple[int, ...]]:
    """Weakly decreasing rows of the given length with entries in [0, cap]."""
    return [tuple(reversed(c)) for c in itertools.combinations_with_replacement(range(cap + 1), length)]


def enumerate_spp(shape: PlanePartitionShape, entry_cap: int,
                  state_cap: int = DEFAULT_STATE_CAP) -> list[PlanePartition]:
    """Every monotone filling of the support with entries at most entry_cap."""
    if entry_cap < 0:
        raise ValueError("entry_cap must be nonnegative")
    lengths = [shape.B - shape.row_start(i) for i in range(shape.A)]
    fillings = [()]
    for i in reversed(range(shape.A)):
        rows = _row_states(lengths[i], entry_cap)
        nxt = []
        for below in fillings:
            for r in rows:
                if below and not all(r[j] >= below[0][j + lengths[i + 1] - lengths[i]]
                                     for j in range(lengths[i])):
                    continue
                nxt.append((r,) + below)
                if len(nxt) > state_cap:
                    raise EnumerationTooLarge(f"more than {state_cap} fillings")
        fillings = nxt
    return [PlanePartition(shape, f) for f in fillings]


def count_spp_transfer(shape: PlanePartitionShape, entry_cap: int, q: float = 1.0) -> float:
    """sum of q^vol over fillings with entries <= entry_cap, by a row transfer recursion."""
    lengths = [shape.B - shape.row_start(i) for i in range(shape.A)]
    vec = None
    prev_states = None
    for i in reversed(range(shape.A)):
        rows = _row_states(lengths[i], entry_cap)
        states = np.array(rows, dtype=np.int64).reshape(len(rows), lengths[i])
        weights = float(q) ** states.sum(axis=1) if lengths[i] else np.ones(len(states))
        if vec is None:
            vec = weights
        else:
            off = lengths[i + 1] - lengths[i]
            if lengths[i] == 0:
                compat = np.ones((len(states), len(prev_states)), dtype=bool)
            else:
                compat = (states[:, None, :] >= prev_states[None, :, off:]).all(axis=2)
            vec = weights * (compat.astype(float) @ vec)
        prev_states = states
    return float(vec.sum())


def spp_tail_bound(shape: PlanePartitionShape, q: float, entry_cap: int) -> float:
    """Bound on the relative q^vol mass of fillings with some entry > entry_cap.

    Dropping monotonicity, the unnormalized mass with a given box above the cap
    is at most q^{cap+1}/(1-q)^m, so a union bound over the m boxes applies.
    """
    m = len(shape.boxes())
    if m == 0:
        return 0.0
    return m * q ** (entry_cap + 1) / (1 - q) ** m


def partition_function_sum(shape: PlanePartitionShape, q: float, entry_cap: int) -> tuple[float, float]:
    """(truncated sum of q^vol, bound on the relative truncation error)."""
    return count_spp_transfer(shape, entry_cap, q), spp_tail_bound(shape, q, entry_cap)


def exact_spp_measure(shape: PlanePartitionShape, q: float, entry_cap: int,
                      max_tail: float | None = None) -> TruncatedMeasure:
    """q^vol / Z on fillings with entries <= entry_cap; the tail is 1 - captured mass."""
    z = partition_function_schur(spp_process_spec(shape, q))
    fills = enumerate_spp(shape, entry_cap)
    probs = np.array([q ** volume(pp) for pp in fills]) / z
    tail = max(0.0, 1.0 - math.fsum(probs))
    if max_tail is not None and tail > max_tail:
        raise ValueError(f"entry cap {entry_cap} leaves tail {tail:.3g} > {max_tail:.3g}")
    return TruncatedMeasure([pp.entries for pp in fills], probs, tail)


def mean_volume_closed_form(shape: PlanePartitionShape, q: float) -> float:
    """q d/dq log Z for the q^vol measure."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    ups = up_steps(shape)
    n = shape.A + shape.B
    total = 0.0
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if i in ups and j not in ups:
                x = q ** (j - i)
                total += (j - i) * x / (1 - x)
    return total


def mean_volume_sum(shape: PlanePartitionShape, q: float, entry_cap: int) -> float:
    fills = enumerate_spp(shape, entry_cap)
    w = np.array([q ** volume(pp) for pp in fills])
    v = np.array([volume(pp) for pp in fills])
    return float((w * v).sum() / w.sum())


# ---------------------------------------------------------------- kernels by enumeration


def partition_kernel_enum(lam: Partition, mu: Partition, rho1: Specialization, rho2: Specialization,
                          first_up: bool, second_up: bool, rows: int, cols: int) -> dict:
    """Normalized skew Schur weight products over all nu in a rows x cols box."""
    w = {}
    for nu in partitions_in_box(rows, cols):
        a = skew_schur(nu, lam, rho1) if first_up else skew_schur(lam, nu, rho1)
        if not a:
            continue
        b = skew_schur(nu, mu, rho2) if second_up else skew_schur(mu, nu, rho2)
        if b:
            w[nu] = a * b
    z = math.fsum(w.values())
    return {k: v / z for k, v in w.items()} if z else {}


def signature_kernel_enum(lam: Signature, mu: Signature, first: EdreiSpec | float, second: EdreiSpec,
                          lo: int, hi: int) -> dict:
    """Normalized s_{nu/lam}(first) s_{nu/mu}(second) over nu with entries in [lo, hi].

    A float ``first`` is the one-variable branching specialization, in which
    case lam is one shorter than mu.
    """
    n = len(mu)
    w = {}
    for nu in signatures_in_range(n, lo, hi):
        if isinstance(first, EdreiSpec):
            a = skew_schur_sig(nu, lam, first)
        else:
            a = skew_schur_branch(nu, lam, first)
        if a:
            b = skew_schur_sig(nu, mu, second)
            if b:
                w[nu] = a * b
    z = math.fsum(w.values())
    return {k: v / z for k, v in w.items()} if z else {}


def schur_process_enum(spec: SchurProcessSpec, rows: int, cols: int) -> dict:
    """Unnormalized process weights over all (lams, mus) with partitions in a box."""
    box = list(partitions_in_box(rows, cols))
    N = spec.N
    out = {}
    for lams in itertools.product(box, repeat=N):
        for mus in itertools.product(box, repeat=N - 1):
            w = process_weight(lams, mus, spec)
            if w:
                out[(lams, mus)] = w
    return out


# ---------------------------------------------------------------- p-up / p-down rows


def _support_bounds(spec: Specialization) -> tuple[float, float]:
    """(max rows, max first part) of partitions kappa with s_kappa(spec) > 0."""
    if spec.gamma:
        return math.inf, math.inf
    rows = len(spec.alphas) if not spec.betas else math.inf
    cols = len(spec.betas) if not spec.alphas else math.inf
    return rows, cols


def _growth(spec: Specialization) -> tuple[float, float]:
    """Extra rows and columns by which s_{mu/lam}(spec) > 0 lets mu exceed lam."""
    return _support_bounds(spec)


def schur_measure(x: Specialization, y: Specialization, lam: Partition) -> float:
    """S(x; y)(lam) = s_lam(x) s_lam(y) / H(x; y)."""
    return schur(lam, x) * schur(lam, y) / pairing_H(x, y)


def _degree_cutoff(s1: Specialization, s2: Specialization, tail_tol: float, d_max: int = 4000):
    """Smallest D with 1 - sum_{d<=D} [t^d] H(s1; t s2) / H(s1; s2) <= tail_tol, and that tail."""
    h = pairing_H(s1, s2)
    d = 16
    while True:
        series = pairing_series(s1, s2, d)
        cum = np.cumsum(series) / h
        hit = np.nonzero(1 - cum <= tail_tol)[0]
        if hit.size:
            D = int(hit[0])
            return D, max(0.0, 1 - float(cum[D]))
        if d >= d_max:
            return d, max(0.0, 1 - float(cum[-1]))
        d *= 2


def p_up_row(lam: Partition, y: Specialization, z: Specialization,
             tail_tol: float = 1e-14) -> tuple[dict, float]:
    """Row lam of p^up(y; z) over mu containing lam, with the certified dropped mass.

    The mass at degree |mu| = |lam| + d equals [t^d] H(z; t y) / H(y; z)
    whatever lam is, so truncating by degree gives an exact tail.
    """
    lam = partition(lam)
    sl = schur(lam, y)
    if sl <= 0:
        raise ValueError(f"{lam} is outside the support of {y}")
    h = pairing_H(y, z)
    rows_y, cols_y = _support_bounds(y)
    rows_z, cols_z = _growth(z)
    max_len = min(rows_y, len(lam) + rows_z)
    max_first = min(cols_y, part(lam, 0) + cols_z)
    D, tail = _degree_cutoff(z, y, tail_tol)
    if max_len < math.inf and max_first < math.inf:
        D = min(D, int(max_len * max_first) - size(lam))
        tail = 0.0
    row = {}
    for d in range(D + 1):
        for mu in partitions_containing(lam, size(lam) + d, max_len, max_first):
            w = skew_schur(mu, lam, z)
            if w:
                w *= schur(mu, y) / sl / h
                if w:
                    row[mu] = w
    return row, tail


def p_down_row(lam: Partition, y: Specialization, t: Specialization) -> dict:
    """Row lam of p^down(y; t) over nu contained in lam (finite)."""
    lam = partition(lam)
    yt = Specialization(y.alphas + t.alphas, y.betas + t.betas, y.gamma + t.gamma)
    sl = schur(lam, yt)
    if sl <= 0:
        raise ValueError(f"{lam} is outside the support of {yt}")
    row = {}
    for nu in sub_partitions(lam):
        w = skew_schur(lam, nu, t)
        if w:
            w *= schur(nu, y) / sl
            if w:
                row[nu] = w
    return row


def _cached(f: Callable) -> Callable:
    return functools.lru_cache(maxsize=None)(f)


def _union(*specs: Specialization) -> Specialization:
    return Specialization(sum((s.alphas for s in specs), ()), sum((s.betas for s in specs), ()),
                          sum(s.gamma for s in specs))


def _scaled(spec: Specialization, f: float) -> Specialization:
    return Specialization(tuple(a * f for a in spec.alphas), tuple(b * f for b in spec.betas), spec.gamma * f)


def _compose(rows1: Callable, rows2: Callable, x) -> tuple[dict, float]:
    """(row x of the product of two truncated row maps, bound on the entrywise error)."""
    r1, t1 = rows1(x)
    out: dict = {}
    t2max = 0.0
    for y, p in r1.items():
        r2, t2 = rows2(y)
        t2max = max(t2max, t2)
        for z, q in r2.items():
            out[z] = out.get(z, 0.0) + p * q
    return out, t1 + t2max


def _row_diff(r1: Mapping, r2: Mapping) -> float:
    return max((abs(r1.get(k, 0.0) - r2.get(k, 0.0)) for k in set(r1) | set(r2)), default=0.0)


def _schur_measure_dict(x: Specialization, y: Specialization, max_degree: int) -> dict:
    rx, cx = _support_bounds(x)
    ry, cy = _support_bounds(y)
    out = {}
    for d in range(max_degree + 1):
        for lam in partitions_containing((), d, min(rx, ry), min(cx, cy)):
            w = schur_measure(x, y, lam)
            if w:
                out[lam] = w
    return out


def verify_p_updown(y: Specialization, z: Specialization, t: Specialization,
                    states: Sequence[Partition], x: Specialization | None = None,
                    z2: Specialization | None = None, tol: float = 1e-12,
                    tail_tol: float = 1e-14) -> list[TestReport]:
    """Residuals of the Schur-measure actions and the three commutation relations.

    ``states`` are the rows tested; rows outside a matrix's state space are
    skipped.  ``x`` defaults to a one-variable specialization.  The second
    parameter of each commutation is ``z2`` (default z scaled by 1/2) or t
    scaled by 1/2.
    """
    x = x if x is not None else Specialization.alpha(0.25)
    z2 = z2 if z2 is not None else _scaled(z, 0.5)
    yt = _union(y, t)
    up = _cached(lambda spec, zz: _cached(lambda lam: p_up_row(lam, spec, zz, tail_tol)))
    down = _cached(lambda spec, tt: _cached(lambda lam: (p_down_row(lam, spec, tt), 0.0)))
    reports = []

    # S(x; y) p^up(y; z) = S(x, z; y): column sums over lam contained in mu are finite
    res = 0.0
    for mu in states:
        if not schur(mu, y):
            continue
        lhs = sum(schur_measure(x, y, lam) * p_up_row(lam, y, z, tail_tol)[0].get(mu, 0.0)
                  for lam in sub_partitions(mu) if schur(lam, y))
        res = max(res, abs(lhs - schur_measure(_union(x, z), y, mu)))
    reports.append(residual_report("schur measure under p_up", res, tol))

    # S(x; y, t) p^down(y; t) = S(x; y): sum over lam containing nu, truncated by degree
    D, tail = _degree_cutoff(x, yt, tail_tol)
    meas = _schur_measure_dict(x, yt, D + max((size(s) for s in states), default=0))
    res = 0.0
    for nu in states:
        if not schur(nu, y):
            continue
        lhs = sum(w * p_down_row(lam, y, t).get(nu, 0.0) for lam, w in meas.items() if contains(nu, lam))
        res = max(res, abs(lhs - schur_measure(x, y, nu)))
    reports.append(residual_report("schur measure under p_down", res, tol, tail))

    # p^up(y; z1) p^up(y; z2) = p^up(y; z2) p^up(y; z1)
    res, bound = 0.0, 0.0
    for lam in states:
        if not schur(lam, y):
            continue
        left, e1 = _compose(up(y, z), up(y, z2), lam)
        right, e2 = _compose(up(y, z2), up(y, z), lam)
        res, bound = max(res, _row_diff(left, right)), max(bound, e1 + e2)
    reports.append(residual_report("p_up commute", res, tol, bound))

    # p^down(y, t2; t1) p^down(y; t2) = p^down(y, t1; t2) p^down(y; t1)
    t1, t2 = t, _scaled(t, 0.5)
    res = 0.0
    for lam in states:
        if not schur(lam, _union(y, t1, t2)):
            continue
        left, _ = _compose(down(_union(y, t2), t1), down(y, t2), lam)
        right, _ = _compose(down(_union(y, t1), t2), down(y, t1), lam)
        res = max(res, _row_diff(left, right))
    reports.append(residual_report("p_down commute", res, tol))

    # p^up(y, t; z) p^down(y; t) = p^down(y; t) p^up(y; z)
    res, bound = 0.0, 0.0
    for lam in states:
        if not schur(lam, yt):
            continue
        left, e1 = _compose(up(yt, z), down(y, t), lam)
        right, e2 = _compose(down(y, t), up(y, z), lam)
        res, bound = max(res, _row_diff(left, right)), max(bound, e1 + e2)
    reports.append(residual_report("p_up p_down exchange", res, tol, bound))
    return reports


# ---------------------------------------------------------------- one-sided link systems


def schur_link_rows(proc: SchurProcessSpec, step: Specialization, kind: str = "up",
                    tail_tol: float = 1e-14):
    """(P, Lam, LamT) row maps for the up (pi = step) or down (sigma = step) dynamics.

    Levels alternate lambda^(1), mu^(1), lambda^(2), ..., lambda^(N).  Every
    row map returns (row dict, dropped mass).
    """
    N = proc.N
    plus = [proc.plus(j) for j in range(N)]

    def prefix(j, first=None):
        specs = ([first] if first is not None else [plus[0]]) + plus[1:j]
        return _union(*specs)

    @_cached
    def up(y, z):
        return _cached(lambda lam: p_up_row(lam, y, z, tail_tol))

    @_cached
    def down(y, t):
        return _cached(lambda lam: (p_down_row(lam, y, t), 0.0))

    def links(first=None):
        out = []
        for j in range(1, N):
            out.append(up(prefix(j, first), proc.minus(j)))      # level 2j -> 2j-1
            out.append(down(prefix(j, first), plus[j]))          # level 2j+1 -> 2j
        return out

    if kind == "up":
        P = []
        for j in range(1, N + 1):
            P.append(up(prefix(j), step))
            if j < N:
                P.append(up(prefix(j), step))
        lam_links = links()
        return P, lam_links, lam_links
    if kind == "down":
        flat = remove(plus[0], step)
        P = []
        for j in range(1, N + 1):
            P.append(down(prefix(j, flat), step))
            if j < N:
                P.append(down(prefix(j, flat), step))
        return P, links(), links(flat)
    raise ValueError("kind must be 'up' or 'down'")


def process_marginal_top(proc: SchurProcessSpec, max_degree: int) -> dict:
    """The Schur measure S(rho^+_[0,N-1]; rho_N^-) of lambda^(N) up to a degree."""
    return _schur_measure_dict(_union(*[proc.plus(j) for j in range(proc.N)]), proc.minus(proc.N), max_degree)


def intertwined_measure(m_top: Mapping, links: Sequence[Callable]) -> dict:
    """m^(n)(x_1..x_n) = m_n(x_n) Lam(x_n, x_{n-1}) ... Lam(x_2, x_1); tuples listed bottom level first."""
    dist = {(x,): p for x, p in m_top.items() if p}
    for link in reversed(links):
        nxt = {}
        for path, p in dist.items():
            row, _ = link(path[0])
            for y, q in row.items():
                nxt[(y,) + path] = nxt.get((y,) + path, 0.0) + p * q
        dist = nxt
    return dist


def multilevel_step(P: Sequence[Callable], LamT: Sequence[Callable], X: Sequence) -> dict:
    """Transition law from X of the multilevel chain assembled from P_k and LamT."""
    r, _ = P[0](X[0])
    dist = {(y,): p for y, p in r.items() if p}
    for k in range(1, len(P)):
        nxt = {}
        row, _ = P[k](X[k])
        for path, p in dist.items():
            w = {}
            for y, q in row.items():
                lt = LamT[k - 1](y)[0].get(path[-1], 0.0)
                if q and lt:
                    w[y] = q * lt
            delta = math.fsum(w.values())
            if delta <= 0:
                raise ValueError(f"vanishing normalization at level {k + 1}")
            for y, v in w.items():
                nxt[path + (y,)] = nxt.get(path + (y,), 0.0) + p * v / delta
        dist = nxt
    return dist


def verify_intertwining(P: Sequence[Callable], Lam: Sequence[Callable], LamT: Sequence[Callable],
                        m_top: Mapping, tol: float = 1e-12, prune: float = 1e-13) -> TestReport:
    """Residual of m^(n) P^(n) = m~^(n), with m~_n = m_n P_n pushed down the LamT links.

    Both sides are linear in m_top, so a point mass is a valid test input.
    Paths of m^(n) lighter than ``prune`` are dropped and their mass, plus
    the mass the truncated rows lose, is reported as the tail.
    """
    m = intertwined_measure(m_top, Lam)
    tail = math.fsum(m_top.values()) - math.fsum(m.values())
    pushed: dict = {}
    for X, p in m.items():
        if p < prune:
            tail += p
            continue
        for Y, q in multilevel_step(P, LamT, X).items():
            pushed[Y] = pushed.get(Y, 0.0) + p * q
    top: dict = {}
    for x, p in m_top.items():
        row, _ = P[-1](x)
        for y, q in row.items():
            top[y] = top.get(y, 0.0) + p * q
    target = intertwined_measure(top, LamT)
    tail = max(tail, 0.0) + max(0.0, math.fsum(top.values()) - math.fsum(target.values()))
    res = _row_diff(pushed, target)
    return residual_report("intertwining", res, tol, tail, states=len(target))


# ---------------------------------------------------------------- T matrices


def _sig_windows(lam: Signature, M: EdreiSpec, K: int):
    """Ranges covering every mu with s_{lam/mu}(M) > 0 (unbounded ends cut at K)."""
    n = len(lam)
    if M.is_trivial:
        return [range(x, x + 1) for x in lam]
    kind, _ = M.single_param()
    if kind == "alpha-":
        return [range(lam[0], lam[0] + K + 1)] + [range(lam[i], lam[i - 1] + 1) for i in range(1, n)]
    if kind == "alpha+":
        return [range(lam[i + 1], lam[i] + 1) for i in range(n - 1)] + [range(lam[-1] - K, lam[-1] + 1)]
    if kind == "beta+":
        return [range(x - 1, x + 1) for x in lam]
    return [range(x, x + 2) for x in lam]


def T_aM_row(lam: Signature, a: Sequence[float], M: EdreiSpec,
             tail_tol: float = 1e-13, k_max: int = 400) -> tuple[dict, float]:
    """Row lam of T(a_1..a_n; M) for a single-parameter (or trivial) M, with a tail bound.

    For alpha^- the tail past mu_1 = lam_1 + K is at most the mass on
    mu_1 = lam_1 + K times rho / (1 - rho), rho = r (a_1 + ... + a_n), since
    s_{mu + e_1}(a) <= p_1(a) s_mu(a); alpha^+ is the mirror image with 1/a.
    """
    lam = tuple(lam)
    a = tuple(a)
    if len(lam) != len(a):
        raise ValueError("signature length must match the number of a's")
    if not M.is_trivial and M.single_param() is None:
        raise ValueError("T rows are implemented for single-parameter M")
    ann = analyticity_annulus(M)
    for x in a:
        if 1 / x not in ann:
            raise ValueError(f"a={x} outside the annulus of H(M; 1/u)")
    norm = math.prod(M(1 / x) for x in a) * schur_poly(lam, a)
    kind = M.single_param()[0] if not M.is_trivial else None
    rho = None
    if kind in ("alpha-", "alpha+"):
        r = M.single_param()[1] / (1 + M.single_param()[1])
        rho = r * (sum(a) if kind == "alpha-" else sum(1 / x for x in a))
        if rho >= 1:
            raise ValueError("tail bound needs r * p_1 < 1; use a narrower family")
    K = 8
    while True:
        row = {}
        edge = 0.0
        for mu in itertools.product(*_sig_windows(lam, M, K)):
            if any(mu[i] < mu[i + 1] for i in range(len(mu) - 1)):
                continue
            w = skew_schur_sig(lam, mu, M)
            if w:
                w *= schur_poly(mu, a) / norm
                row[mu] = w
                if rho is not None and (mu[0] == lam[0] + K if kind == "alpha-" else mu[-1] == lam[-1] - K):
                    edge += w
        tail = 0.0 if rho is None else edge * rho / (1 - rho)
        if tail <= tail_tol or K >= k_max:
            return row, tail
        K *= 2


def T_a_row(lam: Signature, a: Sequence[float]) -> dict:
    """Row lam (length n) of T(a_1..a_n) over mu of length n-1 (finite)."""
    lam, a = tuple(lam), tuple(a)
    n = len(lam)
    sl = schur_poly(lam, a)
    row = {}
    for mu in signatures_interlacing_below(lam):
        w = schur_poly(tuple(mu), a[:-1]) * skew_schur_branch(lam, tuple(mu), a[-1]) / sl
        if w:
            row[tuple(mu)] = w
    return row


def verify_T_relations(a: Sequence[float], M: EdreiSpec, states: Sequence[Signature],
                       M2: EdreiSpec | None = None, tol: float = 1e-12,
                       tail_tol: float = 1e-13) -> list[TestReport]:
    """Stochasticity of T(a; M) and T(a), and the two commutation relations."""
    a = tuple(a)
    aM = _cached(lambda aa, MM: _cached(lambda lam: T_aM_row(lam, aa, MM, tail_tol)))
    ta = _cached(lambda lam: (T_a_row(lam, a), 0.0))
    reports = []
    res, bound = 0.0, 0.0
    for lam in states:
        row, tail = T_aM_row(lam, a, M, tail_tol)
        res, bound = max(res, abs(math.fsum(row.values()) - 1)), max(bound, tail)
        if len(a) > 1:
            res = max(res, abs(math.fsum(T_a_row(lam, a).values()) - 1))
    reports.append(residual_report("T stochastic", res, tol, bound))
    if len(a) > 1:
        res, bound = 0.0, 0.0
        for lam in states:
            left, e1 = _compose(aM(a, M), ta, lam)
            right, e2 = _compose(ta, aM(a[:-1], M), lam)
            res, bound = max(res, _row_diff(left, right)), max(bound, e1 + e2)
        reports.append(residual_report("T(a;M) T(a) = T(a) T(a';M)", res, tol, bound))
    if M2 is not None:
        res, bound = 0.0, 0.0
        for lam in states:
            left, e1 = _compose(aM(a, M), aM(a, M2), lam)
            right, e2 = _compose(aM(a, M2), aM(a, M), lam)
            res, bound = max(res, _row_diff(left, right)), max(bound, e1 + e2)
        reports.append(residual_report("T(a;M1) T(a;M2) = T(a;M2) T(a;M1)", res, tol, bound))
    return reports


# ---------------------------------------------------------------- two-sided measures


def two_sided_states(spec: TwoSidedSpec, lo: int, hi: int):
    """Every level-by-level signature sequence with entries in [lo, hi]."""
    per_level = [list(signatures_in_range(k, lo, hi)) for k in range(1, spec.N + 1)]
    rows = [list(itertools.product(per_level[k - 1], repeat=c + 1)) for k, c in zip(range(1, spec.N + 1), spec.c)]
    return itertools.product(*rows)


def two_sided_measure(spec: TwoSidedSpec, lo: int, hi: int) -> TruncatedMeasure:
    """Normalized two-sided weights on a box, tail = 1 - captured mass."""
    z = partition_function_two_sided(spec)
    out = {}
    for seqs in two_sided_states(spec, lo, hi):
        w = two_sided_weight(seqs, spec)
        if w > 0:
            out[seqs] = w / z
    return TruncatedMeasure(list(out), np.array(list(out.values())), max(0.0, 1 - math.fsum(out.values())))


def verify_link_commutation(P: Sequence[Callable], Lam: Sequence[Callable], LamT: Sequence[Callable],
                            states: Sequence[Sequence], tol: float = 1e-12) -> TestReport:
    """max |Lam P_{k-1} - P_k LamT| over the listed level-k states, k = 2..n.

    ``states[k-1]`` lists candidate level-k states; those outside the
    level-k state space (a row raises ValueError) are skipped.
    """
    res, bound, tested = 0.0, 0.0, 0
    for k in range(2, len(P) + 1):
        for x in states[k - 1]:
            try:
                left, e1 = _compose(Lam[k - 2], P[k - 2], x)
                right, e2 = _compose(P[k - 1], LamT[k - 2], x)
            except ValueError:
                continue
            tested += 1
            res, bound = max(res, _row_diff(left, right)), max(bound, e1 + e2)
    return residual_report("link commutation", res, tol, bound, states=tested)
