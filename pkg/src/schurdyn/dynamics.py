"""Multivariate Markov dynamics built from intertwined single-level chains.

A state of a one-sided process is the pair (lams, mus) with lams[j-1] holding
lambda^(j) (j = 1..N) and mus[j-1] holding mu^(j) (j = 1..N-1).  A state of a
two-sided process is a tuple of levels, level k holding the c(k)+1
signatures lambda^(k,0..c(k)) of length k.

Every update draws the new coordinates one after another, each from a kernel
conditioned on the previous new coordinate and on the matching old one.  The
``*_distribution`` variants push exact kernel laws through the same order and
return the full one-step law together with the mass lost to truncation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence

from .combinatorics import Partition, Signature
from .kernels import (
    DrawCounter, KernelError, KernelMode, kernel, kernel_pmf, sample_discrete, sig_kernel_MQ,
    sig_kernel_MQ_pmf, sig_kernel_aQ, sig_kernel_aQ_pmf,
)
from .schur_eval import PsiTable, SchurProcessSpec, TwoSidedSpec
from .specializations import (
    AnnulusError, EdreiSpec, Specialization, analyticity_annulus,
    edrei_product, pairing_H, remove, union,
)

Row = Mapping[Hashable, float]


# ---------------------------------------------------------------- generic chain


@dataclass(frozen=True)
class LinkSystem:
    """Chains P_1..P_n with links Lam[k] and LamT[k] from level k to level k-1.

    Each member is a callable mapping a state to a dict row {state: prob}.
    ``P[k-1]`` is P_k; ``Lam[k-2]`` and ``LamT[k-2]`` are the links out of level k.
    """

    P: tuple[Callable[[Hashable], Row], ...]
    Lam: tuple[Callable[[Hashable], Row], ...]
    LamT: tuple[Callable[[Hashable], Row], ...]

    def __post_init__(self):
        if len(self.Lam) != self.n - 1 or len(self.LamT) != self.n - 1:
            raise ValueError("need n-1 links of each kind")

    @property
    def n(self) -> int:
        return len(self.P)


def _conditional_row(sys: LinkSystem, k: int, x_k, y_prev) -> dict:
    """Row of P_k(x_k, y) LamT(y, y_prev) / Delta(x_k, y_prev) over y."""
    w = {}
    for y, p in sys.P[k - 1](x_k).items():
        lt = sys.LamT[k - 2](y).get(y_prev, 0.0)
        if p and lt:
            w[y] = p * lt
    delta = math.fsum(w.values())
    if delta <= 0:
        raise KernelError(f"Delta vanishes at level {k}: x_k={x_k}, y_prev={y_prev}")
    return {y: v / delta for y, v in w.items()}


def sequential_update(sys: LinkSystem, X: Sequence, rng, counter: DrawCounter | None = None) -> tuple:
    """One step of the multivariate chain: y_1 ~ P_1(x_1, .), then the conditional middle points."""
    if len(X) != sys.n:
        raise ValueError("state has the wrong number of levels")
    row = sys.P[0](X[0])
    keys = sorted(row)
    out = [sample_discrete(keys, [row[k] for k in keys], rng, counter)]
    for k in range(2, sys.n + 1):
        row = _conditional_row(sys, k, X[k - 1], out[-1])
        keys = sorted(row)
        out.append(sample_discrete(keys, [row[y] for y in keys], rng, counter))
    return tuple(out)


def sequential_update_distribution(sys: LinkSystem, X: Sequence) -> dict:
    """Exact law of :func:`sequential_update` from X."""
    dist = {(y,): p for y, p in sys.P[0](X[0]).items() if p}
    for k in range(2, sys.n + 1):
        nxt: dict = {}
        for path, p in dist.items():
            for y, q in _conditional_row(sys, k, X[k - 1], path[-1]).items():
                nxt[path + (y,)] = nxt.get(path + (y,), 0.0) + p * q
        dist = nxt
    return dist


def compose_rows(first: Callable[[Hashable], Row], second: Callable[[Hashable], Row], x) -> dict:
    out: dict = {}
    for y, p in first(x).items():
        for z, q in second(y).items():
            out[z] = out.get(z, 0.0) + p * q
    return out


def row_residual(r1: Row, r2: Row, keys=None) -> float:
    keys = set(r1) | set(r2) if keys is None else keys
    return max((abs(r1.get(k, 0.0) - r2.get(k, 0.0)) for k in keys), default=0.0)


def check_commutation(sys: LinkSystem, truncation: Sequence[Sequence[Hashable]]) -> float:
    """max |Lam P_{k-1} - P_k LamT| over the listed level-k states, k = 2..n.

    ``truncation[k-1]`` lists the level-k states to test.  Rows are evaluated
    exactly, so on infinite state spaces the residual includes whatever mass
    the row callables drop.
    """
    worst = 0.0
    for k in range(2, sys.n + 1):
        for x in truncation[k - 1]:
            left = compose_rows(sys.Lam[k - 2], sys.P[k - 2], x)
            right = compose_rows(sys.P[k - 1], sys.LamT[k - 2], x)
            worst = max(worst, row_residual(left, right))
    return worst


# ---------------------------------------------------------------- sequence helper


def _run_steps(steps, rng, counter):
    out: list = []
    for sample, _ in steps:
        out.append(sample(out, rng, counter))
    return out


def _steps_distribution(steps, tail_tol: float, prune: float = 0.0) -> tuple[dict, float]:
    """Push exact step laws through a sequence of dependent steps."""
    dist = {(): 1.0}
    tail = 0.0
    for _, law in steps:
        nxt: dict = {}
        for partial, p in dist.items():
            pmf, t = law(list(partial), tail_tol)
            tail += p * t
            for v, q in pmf.items():
                w = p * q
                if w > prune:
                    key = partial + (v,)
                    nxt[key] = nxt.get(key, 0.0) + w
                else:
                    tail += w
        dist = nxt
    return dist, min(tail, 1.0)


# ---------------------------------------------------------------- one-sided dynamics


def _validate_state(state, proc: SchurProcessSpec):
    lams, mus = state
    if len(lams) != proc.N or len(mus) != proc.N - 1:
        raise ValueError(f"state must hold {proc.N} lambdas and {proc.N - 1} mus")


def _up_steps(state, proc: SchurProcessSpec, pi: Specialization):
    """Kernel sequence of one up step with a single-parameter pi."""
    lams, mus = state
    N = proc.N
    steps = []

    def add(rho, mode, prev_index, old):
        def sample(out, rng, counter):
            prev = out[prev_index] if prev_index is not None else ()
            return kernel(prev, old, rho, pi, mode, rng, counter)

        def law(out, tol):
            prev = out[prev_index] if prev_index is not None else ()
            return kernel_pmf(prev, old, rho, pi, mode, tol)

        steps.append((sample, law))

    add(proc.plus(0), KernelMode.UP_UP, None, lams[0])
    for j in range(1, N):
        add(proc.minus(j), KernelMode.DOWN_UP, len(steps) - 1, mus[j - 1])
        add(proc.plus(j), KernelMode.UP_UP, len(steps) - 1, lams[j])
    return steps


def _down_steps(state, proc: SchurProcessSpec, sigma: Specialization):
    lams, mus = state
    N = proc.N
    flat = remove(proc.plus(0), sigma)
    steps = []

    def add(rho, mode, prev_index, old):
        def sample(out, rng, counter):
            prev = out[prev_index] if prev_index is not None else ()
            return kernel(prev, old, rho, sigma, mode, rng, counter)

        def law(out, tol):
            prev = out[prev_index] if prev_index is not None else ()
            return kernel_pmf(prev, old, rho, sigma, mode, tol)

        steps.append((sample, law))

    add(flat, KernelMode.UP_DOWN, None, lams[0])
    for j in range(1, N):
        add(proc.minus(j), KernelMode.DOWN_DOWN, len(steps) - 1, mus[j - 1])
        add(proc.plus(j), KernelMode.UP_DOWN, len(steps) - 1, lams[j])
    return steps


def _to_state(outputs):
    lams = tuple(outputs[0::2])
    mus = tuple(outputs[1::2])
    return lams, mus


def _check_up(proc: SchurProcessSpec, pi: Specialization):
    for j in range(proc.N):
        pairing_H(pi, proc.plus(j))


def up_target(proc: SchurProcessSpec, pi: Specialization) -> SchurProcessSpec:
    """The process reached by an up step: pi joins rho_N^-."""
    return proc.with_last_minus(union(proc.minus(proc.N), pi))


def down_target(proc: SchurProcessSpec, sigma: Specialization) -> SchurProcessSpec:
    """The process reached by a down step: sigma leaves rho_0^+."""
    return proc.with_first_plus(remove(proc.plus(0), sigma))


def apply_up(state, proc: SchurProcessSpec, pi: Specialization, rng,
             counter: DrawCounter | None = None):
    """One up step adding pi; a multi-parameter pi is applied one piece at a time."""
    _validate_state(state, proc)
    _check_up(proc, pi)
    for piece in pi.pieces():
        state = _to_state(_run_steps(_up_steps(state, proc, piece), rng, counter))
    return state


def apply_down(state, proc: SchurProcessSpec, sigma: Specialization, rng,
               counter: DrawCounter | None = None):
    """One down step removing sigma from rho_0^+, one piece at a time."""
    _validate_state(state, proc)
    remove(proc.plus(0), sigma)
    for piece in sigma.pieces():
        state = _to_state(_run_steps(_down_steps(state, proc, piece), rng, counter))
        proc = down_target(proc, piece)
    return state


def _piecewise_distribution(state, proc, spec, make_steps, advance, tail_tol, prune):
    dist = {state: 1.0}
    tail = 0.0
    for piece in spec.pieces():
        nxt: dict = {}
        for s, p in dist.items():
            d, t = _steps_distribution(make_steps(s, proc, piece), tail_tol, prune)
            tail += p * t
            for out, q in d.items():
                key = _to_state(out)
                nxt[key] = nxt.get(key, 0.0) + p * q
        dist = nxt
        proc = advance(proc, piece)
    return dist, min(tail, 1.0)


def apply_up_distribution(state, proc: SchurProcessSpec, pi: Specialization,
                          tail_tol: float = 1e-15, prune: float = 0.0) -> tuple[dict, float]:
    """Exact one-step law of :func:`apply_up` from ``state`` and the dropped mass."""
    _validate_state(state, proc)
    _check_up(proc, pi)
    return _piecewise_distribution(state, proc, pi, _up_steps, lambda p, _: p, tail_tol, prune)


def apply_down_distribution(state, proc: SchurProcessSpec, sigma: Specialization,
                            tail_tol: float = 1e-15, prune: float = 0.0) -> tuple[dict, float]:
    _validate_state(state, proc)
    remove(proc.plus(0), sigma)
    return _piecewise_distribution(state, proc, sigma, _down_steps, down_target, tail_tol, prune)


# ---------------------------------------------------------------- two-sided dynamics


def _validate_two_sided(state, spec: TwoSidedSpec):
    if len(state) != spec.N:
        raise ValueError(f"state must have {spec.N} levels")
    for k, (row, c) in enumerate(zip(state, spec.c), start=1):
        if len(row) != c + 1 or any(len(lam) != k for lam in row):
            raise ValueError(f"level {k} must hold {c + 1} signatures of length {k}")


def _check_Q(spec: TwoSidedSpec, Q: EdreiSpec):
    if Q.has_gamma:
        raise ValueError("gamma parameters in Q are not supported")
    ann = analyticity_annulus(Q)
    for j, aj in enumerate(spec.a, start=1):
        if aj not in ann:
            raise AnnulusError(f"a_{j}={aj} lies outside the annulus of Q")


def _Q_steps(state, spec: TwoSidedSpec, Q: EdreiSpec):
    """Kernel sequence in lexicographic (k, l) order for a single-parameter Q."""
    steps = []
    for k in range(1, spec.N + 1):
        row = state[k - 1]
        a = spec.a[k - 1]
        below = len(steps) - 1 if k > 1 else None

        def sample(out, rng, counter, a=a, old=row[0], below=below):
            prev = out[below] if below is not None else ()
            return sig_kernel_aQ(prev, old, Q, a, rng, counter)

        def law(out, tol, a=a, old=row[0], below=below):
            prev = out[below] if below is not None else ()
            return sig_kernel_aQ_pmf(prev, old, Q, a, tol)

        steps.append((sample, law))
        for l in range(1, len(row)):
            M = spec.M[k - 1][l - 1]
            idx = len(steps) - 1

            def sample(out, rng, counter, M=M, old=row[l], idx=idx):
                return sig_kernel_MQ(out[idx], old, M, Q, rng, counter)

            def law(out, tol, M=M, old=row[l], idx=idx):
                return sig_kernel_MQ_pmf(out[idx], old, M, Q, tol)

            steps.append((sample, law))
    return steps


def _regroup(outputs, spec: TwoSidedSpec):
    levels, i = [], 0
    for c in spec.c:
        levels.append(tuple(outputs[i:i + c + 1]))
        i += c + 1
    return tuple(levels)


def Q_target(spec: TwoSidedSpec, Q: EdreiSpec) -> TwoSidedSpec:
    """The two-sided process reached by a Q step: Psi becomes Q Psi."""
    if spec.toeplitz:
        return spec.with_psi(edrei_product(Q, spec.psi))
    return spec.with_psi(PsiTable(tuple(edrei_product(Q, col) for col in spec.psi.columns)))


def apply_Q(state, spec: TwoSidedSpec, Q: EdreiSpec, rng, counter: DrawCounter | None = None):
    """One step multiplying Psi by Q, one single-parameter piece of Q at a time."""
    _validate_two_sided(state, spec)
    _check_Q(spec, Q)
    for piece in Q.pieces():
        state = _regroup(_run_steps(_Q_steps(state, spec, piece), rng, counter), spec)
    return state


def apply_Q_distribution(state, spec: TwoSidedSpec, Q: EdreiSpec, tail_tol: float = 1e-15,
                         prune: float = 0.0) -> tuple[dict, float]:
    """Exact one-step law of :func:`apply_Q` and the dropped mass."""
    _validate_two_sided(state, spec)
    _check_Q(spec, Q)
    dist = {state: 1.0}
    tail = 0.0
    for piece in Q.pieces():
        nxt: dict = {}
        for s, p in dist.items():
            d, t = _steps_distribution(_Q_steps(s, spec, piece), tail_tol, prune)
            tail += p * t
            for out, q in d.items():
                key = _regroup(out, spec)
                nxt[key] = nxt.get(key, 0.0) + p * q
        dist = nxt
    return dist, min(tail, 1.0)
