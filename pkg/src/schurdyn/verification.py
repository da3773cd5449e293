"""The acceptance checks, shared by ``schurdyn verify`` and the test suite.

Each check returns a list of :class:`~schurdyn.oracle.TestReport`; a check
passes when every report in it passes.  Sample sizes and seeds default to
the acceptance settings and can be lowered for smoke runs.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .combinatorics import (
    PlanePartitionShape, count_gt_patterns, gt_patterns, is_gt_pattern, pad, partition,
    partitions_in_box, signatures_in_range,
)
from .dynamics import (
    Q_target, apply_Q_distribution, apply_up_distribution, apply_down_distribution, down_target,
    up_target,
)
from .oracle import (
    TestReport, TruncatedMeasure, chi_square, exact_spp_measure, histogram, mean_volume_closed_form,
    mean_volume_sum, partition_function_sum, pmf_tv, residual_report, schur_link_rows,
    schur_process_enum, spp_tail_bound, tv_distance, two_sided_measure, verify_link_commutation,
    verify_p_updown, verify_T_relations,
)
from .samplers import sample_gt_batch, sample_spp_batch
from .schur_eval import (
    SchurProcessSpec, TwoSidedSpec, partition_function_schur, partition_function_two_sided,
    spp_process_spec, two_sided_weight,
)
from .specializations import EdreiSpec, Specialization, laurent_coeffs

SEEDS = (7, 11, 13)
A, B = Specialization.alpha, Specialization.beta
E = EdreiSpec.single

SHAPES = (
    PlanePartitionShape(1, 1),
    PlanePartitionShape(1, 2),
    PlanePartitionShape(2, 2, (1,)),
    PlanePartitionShape(4, 3, (2, 1, 1, 0)),
)


@dataclass
class CheckConfig:
    samples_1x1: int = 200_000
    samples_2x2: int = 200_000
    samples_mean: int = 100_000
    draw_runs: int = 10_000
    samples_gt: int = 100_000
    seeds: tuple[int, ...] = SEEDS
    threads: int = 1
    extra: dict = field(default_factory=dict)


def _shape_name(sh: PlanePartitionShape) -> str:
    return f"{sh.A}x{sh.B} pi={list(sh.pi)}"


# ---------------------------------------------------------------- 1, 2: sampler exactness


def check_exactness_1x1(cfg: CheckConfig) -> list[TestReport]:
    shape, q = PlanePartitionShape(1, 1), 0.5
    ref = TruncatedMeasure(list(range(11)), [2.0 ** (-n - 1) for n in range(11)], 2.0 ** -11)
    reports = []
    for seed in cfg.seeds:
        t0 = time.perf_counter()
        grids, _ = sample_spp_batch(shape, q, cfg.samples_1x1, seed, cfg.threads)
        elapsed = time.perf_counter() - t0
        vals, counts = np.unique(grids[:, 0, 0], return_counts=True)
        rep = chi_square(dict(zip(vals.tolist(), counts.tolist())), ref, name=f"1x1 chi-square seed {seed}",
                         seed=seed)
        rep.details["seconds"] = round(elapsed, 3)
        rep.passed = rep.passed and elapsed < 10
        reports.append(rep)
    ok = sum(r.passed for r in reports) >= min(2, len(reports))
    reports.append(TestReport("1x1 passes on >= 2 seeds", ok, statistic=sum(r.passed for r in reports)))
    return reports


def check_exactness_2x2(cfg: CheckConfig) -> list[TestReport]:
    shape, q, cap = PlanePartitionShape(2, 2), 0.3, 12
    ref = exact_spp_measure(shape, q, cap)
    seed = cfg.seeds[0]
    t0 = time.perf_counter()
    grids, _ = sample_spp_batch(shape, q, cfg.samples_2x2, seed, cfg.threads)
    elapsed = time.perf_counter() - t0
    keys, counts = np.unique(grids.reshape(len(grids), -1), axis=0, return_counts=True)
    emp = {((int(k[0]), int(k[1])), (int(k[2]), int(k[3]))): int(c) for k, c in zip(keys, counts)}
    tv = tv_distance(emp, ref)
    ok = tv <= 0.01 and ref.tail_bound < 1e-6 and elapsed < 60
    return [TestReport("2x2 total variation", ok, statistic=tv, tolerance=0.01, tail_bound=ref.tail_bound,
                       sample_size=cfg.samples_2x2, seed=seed, details={"seconds": round(elapsed, 3)})]


# ---------------------------------------------------------------- 3, 4: partition function and mean volume


def _cap_for(shape: PlanePartitionShape, q: float, rel: float) -> int:
    cap = 1
    while spp_tail_bound(shape, q, cap) > rel:
        cap += 1
    return cap


def check_partition_function(cfg: CheckConfig, q: float = 0.3) -> list[TestReport]:
    reports = []
    for shape in SHAPES:
        z = partition_function_schur(spp_process_spec(shape, q))
        cap = _cap_for(shape, q, 1e-10)
        total, tail = partition_function_sum(shape, q, cap)
        rel = abs(z - total) / z
        reports.append(TestReport(f"partition function {_shape_name(shape)}", rel <= tail + 1e-12 and tail <= 1e-8,
                                  statistic=rel, max_residual=rel, tolerance=1e-8, tail_bound=tail,
                                  details={"entry_cap": cap}))
    return reports


def check_mean_volume(cfg: CheckConfig, q: float = 0.3) -> list[TestReport]:
    reports = []
    exact = mean_volume_closed_form(PlanePartitionShape(1, 1), 0.5)
    reports.append(residual_report("mean volume 1x1 q=1/2 equals 1", abs(exact - 1.0), 1e-12))
    for shape in SHAPES:
        grids, _ = sample_spp_batch(shape, q, cfg.samples_mean, cfg.seeds[0], cfg.threads)
        vols = grids.sum(axis=(1, 2)).astype(float)
        mean, se = vols.mean(), vols.std(ddof=1) / math.sqrt(len(vols))
        target = mean_volume_closed_form(shape, q)
        z = abs(mean - target) / se if se > 0 else 0.0
        reports.append(TestReport(f"mean volume {_shape_name(shape)}", z <= 3, statistic=z, tolerance=3,
                                  sample_size=len(vols), seed=cfg.seeds[0],
                                  details={"empirical": mean, "closed_form": target}))
    small = PlanePartitionShape(1, 2)
    diff = abs(mean_volume_sum(small, 0.5, 60) - mean_volume_closed_form(small, 0.5))
    reports.append(residual_report("mean volume 1x2 closed form against enumeration", diff, 1e-9))
    return reports


# ---------------------------------------------------------------- 5: draw count


def check_draw_count(cfg: CheckConfig, q: float = 0.7) -> list[TestReport]:
    shape = PlanePartitionShape(4, 3)
    bound = shape.A * shape.B * (shape.B + 1) // 2
    _, draws = sample_spp_batch(shape, q, cfg.draw_runs, cfg.seeds[0], cfg.threads)
    top = int(draws.max()) if len(draws) else 0
    return [TestReport("draw count at most AB(B+1)/2", top <= bound, statistic=top, tolerance=bound,
                       sample_size=len(draws), seed=cfg.seeds[0]),
            TestReport("draw count bound attained", top == bound, statistic=int((draws == bound).sum()),
                       sample_size=len(draws), seed=cfg.seeds[0])]


# ---------------------------------------------------------------- 6: commutation


def _level_states(proc: SchurProcessSpec, rows: int, cols: int) -> list[list]:
    box = list(partitions_in_box(rows, cols))
    return [box] * (2 * proc.N - 1)


def check_commutation(cfg: CheckConfig) -> list[TestReport]:
    reports = []
    # finite systems: y and t of beta type, z of alpha type
    beta_states = list(partitions_in_box(3, 2))
    for r in verify_p_updown(Specialization(betas=(0.5, 0.4)), A(0.4), B(0.3), beta_states,
                             x=A(0.25), tol=1e-12):
        r.name = "beta-system " + r.name
        reports.append(r)
    # tail-bounded systems, states with first part at most 12
    alpha_states = [partition(p) for p in partitions_in_box(2, 12)]
    for r in verify_p_updown(A(0.3), A(0.3), A(0.2), alpha_states, x=A(0.25), tol=1e-8):
        r.name = "alpha-system " + r.name
        reports.append(r)
    proc = SchurProcessSpec((B(0.5), B(0.4)), (A(0.6), A(0.3)))
    P, Lam, LamT = schur_link_rows(proc, A(0.5), "up")
    r = verify_link_commutation(P, Lam, LamT, _level_states(proc, 3, 2), tol=1e-12)
    r.name = "beta-system up links"
    reports.append(r)
    proc_d = SchurProcessSpec((Specialization(betas=(0.5, 0.3)), B(0.4)), (A(0.6), A(0.3)))
    P, Lam, LamT = schur_link_rows(proc_d, B(0.3), "down")
    r = verify_link_commutation(P, Lam, LamT, _level_states(proc_d, 2, 3), tol=1e-12)
    r.name = "beta-system down links"
    reports.append(r)
    proc_a = SchurProcessSpec((A(0.3), A(0.3)), (A(0.3), A(0.3)))
    P, Lam, LamT = schur_link_rows(proc_a, A(0.3), "up")
    r = verify_link_commutation(P, Lam, LamT, [alpha_states] * 3, tol=1e-8)
    r.name = "alpha-system up links"
    reports.append(r)
    return reports


# ---------------------------------------------------------------- 7: one-sided one-step identities


def _normalized(d: dict) -> dict:
    z = math.fsum(d.values())
    return {k: v / z for k, v in d.items()}


def _push(measure: dict, step: Callable) -> tuple[dict, float]:
    out: dict = {}
    tail = 0.0
    for state, p in measure.items():
        d, t = step(state)
        tail += p * t
        for k, v in d.items():
            out[k] = out.get(k, 0.0) + p * v
    return out, tail


def one_sided_step_tv(proc: SchurProcessSpec, spec: Specialization, kind: str,
                      rows: int, cols: int, rows_after: int, cols_after: int) -> tuple[float, float]:
    """(TV between the pushed process and the target, total dropped mass) on finite supports."""
    start = _normalized(schur_process_enum(proc, rows, cols))
    if kind == "up":
        pushed, tail = _push(start, lambda s: apply_up_distribution(s, proc, spec, 1e-16))
        target_proc = up_target(proc, spec)
    else:
        pushed, tail = _push(start, lambda s: apply_down_distribution(s, proc, spec, 1e-16))
        target_proc = down_target(proc, spec)
    target = _normalized(schur_process_enum(target_proc, rows_after, cols_after))
    return pmf_tv(pushed, target), tail


def check_one_sided_step(cfg: CheckConfig) -> list[TestReport]:
    proc = SchurProcessSpec((B(0.5), B(0.4)), (A(0.6), A(0.3)))
    tv_up, tail_up = one_sided_step_tv(proc, A(0.5), "up", 2, 2, 3, 2)
    proc_d = SchurProcessSpec((Specialization(betas=(0.5, 0.3)), B(0.4)), (A(0.6), A(0.3)))
    tv_down, tail_down = one_sided_step_tv(proc_d, B(0.3), "down", 2, 3, 2, 2)
    return [TestReport("up step reaches the target process", tv_up <= 1e-12 and tail_up == 0,
                       statistic=tv_up, tolerance=1e-12, tail_bound=tail_up),
            TestReport("down step reaches the target process", tv_down <= 1e-12 and tail_down == 0,
                       statistic=tv_down, tolerance=1e-12, tail_bound=tail_down)]


# ---------------------------------------------------------------- 8: two-sided one-step identity


TWO_SIDED = TwoSidedSpec((0.9, 1.1), ((), (E("beta-", 0.4),)), E("alpha-", 0.5))
TWO_SIDED_Q = E("beta-", 0.3)


def two_sided_step_residual(spec: TwoSidedSpec, Q: EdreiSpec, lo: int, hi: int) -> tuple[float, float, int]:
    """(max |(T P_Q)(Y) - T'(Y)|, certified bound on what the box misses, states compared).

    A beta^- step lowers entries by at most one, so every preimage of a Y with
    entries in [lo, hi-1] lies in the box [lo, hi] and its mass is complete.
    The bound covers the Laurent truncation of Psi entries.
    """
    start = two_sided_measure(spec, lo, hi)
    pushed, tail = _push(start.as_dict(), lambda s: apply_Q_distribution(s, spec, Q, 1e-16))
    after = Q_target(spec, Q)
    z = partition_function_two_sided(after)
    res, count = 0.0, 0
    for Y, p in pushed.items():
        if all(lo <= x <= hi - 1 for row in Y for lam in row for x in lam):
            res = max(res, abs(p - two_sided_weight(Y, after) / z))
            count += 1
    return res, tail + 1e-14, count


def check_two_sided_step(cfg: CheckConfig) -> list[TestReport]:
    res, tail, count = two_sided_step_residual(TWO_SIDED, TWO_SIDED_Q, -6, 6)
    reports = [residual_report("Q step reaches the target two-sided process", res, 1e-9, tail, states=count)]
    states = list(signatures_in_range(2, -6, 6))
    for r in verify_T_relations((0.9, 1.1), E("alpha-", 0.5), states, M2=E("beta-", 0.4), tol=1e-9):
        reports.append(r)
    return reports


# ---------------------------------------------------------------- 9: path measure


GT_CHAR = EdreiSpec(alpha_plus=(0.1,), alpha_minus=(0.1,))


def check_gt_path(cfg: CheckConfig, N: int = 4) -> list[TestReport]:
    seed = cfg.seeds[0]
    paths = sample_gt_batch(GT_CHAR, N, cfg.samples_gt, seed, cfg.threads)
    reports = []
    valid = sum(is_gt_pattern(p) for p in paths)
    reports.append(TestReport("paths interlace", valid == len(paths), statistic=valid, sample_size=len(paths)))

    lo, hi = -40, 40
    coeffs = laurent_coeffs(GT_CHAR, lo, hi)
    ref = TruncatedMeasure([(k,) for k in range(lo, hi + 1)], coeffs, max(0.0, 1 - float(coeffs.sum())))
    reports.append(chi_square(histogram(p[0] for p in paths), ref, name="level-1 marginal", seed=seed))

    # conditioned on the top row, paths are uniform; test on the most frequent
    # top row that admits more than one path
    tops = histogram(p[-1] for p in paths)
    rich = [t for t in tops if count_gt_patterns(t) > 1]
    top = max(rich, key=lambda t: (tops[t], t))
    patterns = list(gt_patterns(top))
    given = [p for p in paths if p[-1] == top]
    uniform = TruncatedMeasure(patterns, np.full(len(patterns), 1 / len(patterns)))
    rep = chi_square(histogram(given), uniform, name="uniform paths given the top row", seed=seed)
    rep.details["top"] = list(top)
    reports.append(rep)

    through: dict = {}
    for pat in patterns:
        through[pat[0]] = through.get(pat[0], 0) + 1
    total = sum(through.values())
    rep = chi_square(histogram(p[0] for p in given),
                     TruncatedMeasure.from_dict({k: v / total for k, v in through.items()}),
                     name="level-1 counts given the top row", seed=seed)
    rep.passed = rep.passed and total == count_gt_patterns(top)
    rep.details["patterns"] = total
    reports.append(rep)
    return reports


# ---------------------------------------------------------------- 10: up step against Q step


def up_vs_Q_tv(a=(0.8, 1.2), m: float = 0.3, c: float = 0.4, b: float = 0.5,
               tail_tol: float = 1e-13) -> float:
    """Max TV between an up step with pi = alpha b and the matching Q step.

    The one-sided process has rho_j^+ = alpha a_{j+1}, rho_1^- = alpha m and
    rho_2^- = alpha c; the two-sided one has c(1) = 1, c(2) = 0, M = alpha^- m/(1-m),
    Psi = alpha^+ c/(1-c) and Q = alpha^+ b/(1-b), so H(pi; u) and H(Q; u) agree
    up to a constant factor.  Both laws are truncated; half the dropped
    mass is subtracted, so the result bounds the TV of the exact laws.
    """
    proc = SchurProcessSpec((A(a[0]), A(a[1])), (A(m), A(c)))
    spec = TwoSidedSpec(a, ((E("alpha-", m / (1 - m)),), ()), E("alpha+", c / (1 - c)))
    Q = E("alpha+", b / (1 - b))

    def to_two_sided(state):
        lams, mus = state
        return ((pad(lams[0], 1), pad(mus[0], 1)), (pad(lams[1], 2),))

    states = [((partition((lam1,)), partition((l2, l22))), (partition((mu1,)),))
              for lam1, mu1, l2, l22 in ((0, 0, 0, 0), (2, 1, 3, 1), (1, 0, 2, 0), (3, 2, 2, 2))]
    worst = 0.0
    for state in states:
        up, t1 = apply_up_distribution(state, proc, A(b), tail_tol)
        q, t2 = apply_Q_distribution(to_two_sided(state), spec, Q, tail_tol)
        worst = max(worst, pmf_tv({to_two_sided(k): v for k, v in up.items()}, q) - 0.5 * (t1 + t2))
    return max(worst, 0.0)


def check_up_vs_Q(cfg: CheckConfig) -> list[TestReport]:
    tv = up_vs_Q_tv()
    return [TestReport("up step equals Q step", tv <= 1e-10, statistic=tv, tolerance=1e-10)]


# ---------------------------------------------------------------- registry


CHECKS: dict[str, Callable[[CheckConfig], list[TestReport]]] = {
    "exactness-1x1": check_exactness_1x1,
    "exactness-2x2": check_exactness_2x2,
    "partition-function": check_partition_function,
    "mean-volume": check_mean_volume,
    "draw-count": check_draw_count,
    "commutation": check_commutation,
    "one-sided-step": check_one_sided_step,
    "two-sided-step": check_two_sided_step,
    "gt-path": check_gt_path,
    "up-vs-q": check_up_vs_Q,
}


def run_checks(names=None, cfg: CheckConfig | None = None) -> dict[str, list[TestReport]]:
    cfg = cfg or CheckConfig()
    names = list(CHECKS) if not names else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; choose from {list(CHECKS)}")
    return {n: CHECKS[n](cfg) for n in names}


def passed(reports: list[TestReport]) -> bool:
    return all(r.passed for r in reports)
