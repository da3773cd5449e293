"""Exact samplers built on the update kernels.

``sample_spp`` runs the slice-by-slice plane-partition algorithm directly on
lists of parts, which is what makes large batches affordable.  It consumes
exactly the uniforms that the general inductive sampler
:func:`sample_schur_process` consumes on the same process, so the two agree
sample by sample under a common seed.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .combinatorics import (
    GTPattern, Partition, PlanePartition, PlanePartitionShape, from_slices, pad, partition,
    signature_interlaces, up_steps,
)
from .dynamics import apply_Q, apply_up
from .kernels import INF, DrawCounter, draw
from .schur_eval import SchurProcessSpec, TwoSidedSpec, spp_process_spec, weighted_spp_process_spec
from .specializations import EdreiSpec, Specialization

CHUNK = 1024  # samples per derived RNG stream in batches


# ---------------------------------------------------------------- plane partitions


def _spp_ratios(proc: SchurProcessSpec, ups: frozenset[int]) -> dict[tuple[int, int], float]:
    """xi for updating slice l+1 while adding rho_n^-, computed as the kernels do."""
    out = {}
    N = proc.N
    for n in range(2, N):
        if n in ups:
            continue
        b = proc.minus(n).alphas[0]
        for l in range(1, n):
            if l in ups:
                out[l, n] = proc.plus(l).alphas[0] * b
            else:
                out[l, n] = (1.0 / proc.minus(l).alphas[0]) * b
    return out


def _up_up(lam: list, mu: list, xi: float, rng, counter) -> list:
    """nu with lam, mu < nu; windows [max(lam_i, mu_i), min(lam_{i-1}, mu_{i-1})]."""
    L = max(len(lam), len(mu)) + 1
    out = []
    hi = INF
    for i in range(L):
        li = lam[i] if i < len(lam) else 0
        mi = mu[i] if i < len(mu) else 0
        lo = li if li > mi else mi
        v = draw(xi, lo, hi, rng, counter)
        if v == 0:
            break
        out.append(v)
        hi = li if li < mi else mi
    return out


def _down_up(lam: list, mu: list, xi: float, rng, counter) -> list:
    """nu with nu < lam and mu < nu; windows [max(lam_{i+1}, mu_i), min(lam_i, mu_{i-1})]."""
    out = []
    hi_mu = INF
    for i in range(len(lam)):
        nxt = lam[i + 1] if i + 1 < len(lam) else 0
        mi = mu[i] if i < len(mu) else 0
        lo = nxt if nxt > mi else mi
        hi = lam[i] if lam[i] < hi_mu else hi_mu
        if lo > hi:
            raise RuntimeError(f"empty window: lam={lam}, mu={mu}, i={i}")
        v = draw(xi, lo, hi, rng, counter)
        if v == 0:
            break
        out.append(v)
        hi_mu = mi
    return out


@dataclass(frozen=True)
class _SppPlan:
    shape: PlanePartitionShape
    N: int
    ups: frozenset[int]
    xi: dict

    @classmethod
    def build(cls, shape: PlanePartitionShape, proc: SchurProcessSpec) -> "_SppPlan":
        ups = up_steps(shape)
        return cls(shape, proc.N, ups, _spp_ratios(proc, ups))


def _spp_run(plan: _SppPlan, rng, counter: DrawCounter | None,
             on_step: Callable[[int, list], None] | None = None) -> list:
    """Slices 1..N as lists after adding every rho_n^- in turn."""
    slices: list[list] = [[] for _ in range(plan.N)]
    for n in range(2, plan.N):
        if n in plan.ups:
            continue
        new = [[]]
        for l in range(1, n):
            old = slices[l]  # slice l+1, also the old mu^(l)
            xi = plan.xi[l, n]
            if l in plan.ups:
                new.append(_up_up(new[-1], old, xi, rng, counter))
            else:
                new.append(_down_up(new[-1], old, xi, rng, counter))
        slices[:n] = new
        if on_step is not None:
            on_step(n, [list(s) for s in slices])
    return slices


def _grid_from_slices(shape: PlanePartitionShape, slices: Sequence[Sequence[int]]) -> np.ndarray:
    grid = np.zeros((shape.A, shape.B), dtype=np.int64)
    for k in range(1, len(slices) + 1):
        lam = slices[k - 1]
        if lam:
            for (i, j), v in zip(shape.diagonal(k), lam):
                grid[i, j] = v
    return grid


def sample_spp(shape: PlanePartitionShape, q: float, rng,
               counter: DrawCounter | None = None) -> tuple[PlanePartition, DrawCounter]:
    """Exact q^volume sample on the skew support of ``shape``, and its draw counter."""
    counter = counter if counter is not None else DrawCounter()
    plan = _SppPlan.build(shape, spp_process_spec(shape, q))
    slices = _spp_run(plan, rng, counter)
    return from_slices([tuple(s) for s in slices], shape), counter


def spp_intermediates(shape: PlanePartitionShape, q: float, rng) -> Iterator[tuple[int, PlanePartition]]:
    """Yield (n, plane partition) after each slice-adding step of one run."""
    plan = _SppPlan.build(shape, spp_process_spec(shape, q))
    steps: list = []
    _spp_run(plan, rng, None, lambda n, s: steps.append((n, s)))
    for n, s in steps:
        yield n, from_slices([tuple(x) for x in s], shape)


def sample_spp_weighted(shape: PlanePartitionShape, q_weights: Sequence[float], rng,
                        counter: DrawCounter | None = None) -> PlanePartition:
    """Sample with weight prod_j q_j^{|lambda^(j)|} over the interior slices."""
    plan = _SppPlan.build(shape, weighted_spp_process_spec(shape, q_weights))
    slices = _spp_run(plan, rng, counter)
    return from_slices([tuple(s) for s in slices], shape)


def _spp_chunk(args) -> tuple[np.ndarray, np.ndarray]:
    shape, proc, seed, chunk, count = args
    plan = _SppPlan.build(shape, proc)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))
    grids = np.zeros((count, shape.A, shape.B), dtype=np.int64)
    draws = np.zeros(count, dtype=np.int64)
    for s in range(count):
        counter = DrawCounter()
        grids[s] = _grid_from_slices(shape, _spp_run(plan, rng, counter))
        draws[s] = counter.nontrivial_draws
    return grids, draws


def _chunks(samples: int) -> list[tuple[int, int]]:
    return [(c, min(CHUNK, samples - c * CHUNK)) for c in range(math.ceil(samples / CHUNK))]


def _fan_out(fn, jobs: list, threads: int) -> list:
    if threads <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def sample_spp_batch(shape: PlanePartitionShape, q: float | None, samples: int, seed: int,
                     threads: int = 1, q_weights: Sequence[float] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(grids of shape (S, A, B), draw counts) for S independent samples.

    Sample i draws from the stream seeded by (seed, i // CHUNK), so the
    output depends only on (seed, S) and never on ``threads``.  Back-wall
    cells hold 0.
    """
    if samples < 0:
        raise ValueError("samples must be nonnegative")
    proc = weighted_spp_process_spec(shape, q_weights) if q_weights is not None else spp_process_spec(shape, q)
    if samples == 0:
        return np.zeros((0, shape.A, shape.B), dtype=np.int64), np.zeros(0, dtype=np.int64)
    jobs = [(shape, proc, seed, c, n) for c, n in _chunks(samples)]
    parts = _fan_out(_spp_chunk, jobs, threads)
    return np.concatenate([g for g, _ in parts]), np.concatenate([d for _, d in parts])


def grid_to_plane_partition(shape: PlanePartitionShape, grid) -> PlanePartition:
    return PlanePartition.from_grid(shape, [[int(x) for x in row] for row in grid])


# ---------------------------------------------------------------- Schur processes


def _check_samplable(spec: Specialization):
    if spec.gamma:
        raise ValueError("samplers accept finitely many alpha and beta parameters only (gamma = 0)")


def sample_schur_process(proc: SchurProcessSpec, rng, counter: DrawCounter | None = None):
    """Exact sample (lams, mus) of the process, built up one rho_n^- at a time.

    Each rho_n^- is added through up steps, one single-parameter piece at a
    time, alphas before betas.
    """
    for j in range(proc.N):
        _check_samplable(proc.plus(j))
        _check_samplable(proc.minus(j + 1))
    proc.check_finite()
    triv = Specialization()
    lams: tuple = ()
    mus: tuple = ()
    for n in range(1, proc.N + 1):
        sub = SchurProcessSpec(proc.rho_plus[:n], proc.rho_minus[:n - 1] + (triv,))
        state = (lams + ((),), mus + ((),) if n > 1 else ())
        lams, mus = apply_up(state, sub, proc.minus(n), rng, counter)
    return lams, mus


# ---------------------------------------------------------------- Gelfand-Tsetlin paths


def _phase_one_process(char: EdreiSpec, N: int) -> SchurProcessSpec:
    """One-sided process whose levels are the positive part of the path measure."""
    alphas = tuple(a / (1 + a) for a in char.alpha_plus)
    betas = tuple(b / (1 - b) for b in char.beta_plus if b < 1)
    one = Specialization.alpha(1.0)
    triv = Specialization()
    return SchurProcessSpec((one,) * N, (triv,) * (N - 1) + (Specialization(alphas, betas),))


def sample_gt_path(char: EdreiSpec, N: int, rng, counter: DrawCounter | None = None) -> GTPattern:
    """Exact sample of the levels 1..N of the path measure of the character ``char``."""
    if char.has_gamma:
        raise ValueError("gamma parameters are not supported by the path sampler")
    if N < 1:
        raise ValueError("N must be positive")
    shift = sum(1 for b in char.beta_plus if b == 1)
    lams, _ = sample_schur_process(_phase_one_process(char, N), rng, counter)
    levels = tuple(tuple(x + shift for x in pad(lams[k - 1], k)) for k in range(1, N + 1))
    negative = char.negative_part()
    if not negative.is_trivial:
        spec = TwoSidedSpec((1.0,) * N, ((),) * N, char.positive_part())
        state = apply_Q(tuple((lev,) for lev in levels), spec, negative, rng, counter)
        levels = tuple(row[0] for row in state)
    for k in range(N - 1):
        if not signature_interlaces(levels[k], levels[k + 1]):
            raise RuntimeError(f"levels {k + 1} and {k + 2} do not interlace: {levels}")
    return levels


def _gt_chunk(args) -> list:
    char, N, seed, chunk, count = args
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))
    return [sample_gt_path(char, N, rng) for _ in range(count)]


def sample_gt_batch(char: EdreiSpec, N: int, samples: int, seed: int, threads: int = 1) -> list[GTPattern]:
    """S independent paths; reproducible from (seed, S) whatever ``threads`` is."""
    if samples < 0:
        raise ValueError("samples must be nonnegative")
    jobs = [(char, N, seed, c, n) for c, n in _chunks(samples)]
    out: list = []
    for part in _fan_out(_gt_chunk, jobs, threads):
        out.extend(part)
    return out
