import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from schurdyn.combinatorics import (
    conjugate, contains, interlaces, interlacing_below, partition, partitions_in_box, signature_interlaces,
    signatures_in_range,
)
from schurdyn.kernels import (
    DrawCounter, KernelError, KernelMode, TruncBern, TruncGeom, bern_pmf, bern_sample, draw,
    down_up_alpha, down_up_beta_alpha, generic_kernel, geom_pmf, geom_sample, kernel,
    partition_kernel, partition_kernel_pmf, partitions_containing, sig_kernel_MQ,
    sig_kernel_MQ_pmf, sig_kernel_aQ, sig_kernel_aQ_pmf, up_up_alpha, up_up_beta_alpha,
    window_pmf,
)
from schurdyn.oracle import (
    TruncatedMeasure, chi_square, histogram, partition_kernel_enum, pmf_tv,
    signature_kernel_enum,
)
from schurdyn.specializations import DivergentPairingError, EdreiSpec, Specialization

from conftest import SEEDS, passes_on_two

A = Specialization.alpha
B = Specialization.beta
T = Specialization()
UP, DU, UD, DD = KernelMode.UP_UP, KernelMode.DOWN_UP, KernelMode.UP_DOWN, KernelMode.DOWN_DOWN


# ------------------------------------------------------------ one-dimensional laws


def test_geom_examples():
    g = TruncGeom(0.5, 0, 2)
    assert [geom_pmf(g, k) for k in range(3)] == pytest.approx([4 / 7, 2 / 7, 1 / 7])
    assert geom_pmf(TruncGeom(0.3, 5, 5), 5) == 1.0
    assert geom_pmf(TruncGeom(0.5, 3, math.inf), 3) == pytest.approx(0.5)
    assert geom_pmf(TruncGeom(0.5, 3, math.inf), 5) == pytest.approx(0.125)


def test_geom_rejects_bad_parameters():
    with pytest.raises(ValueError):
        TruncGeom(1.0, 0, math.inf)
    with pytest.raises(ValueError):
        TruncGeom(0.5, 3, 2)


def test_bern_examples(rng):
    assert bern_pmf(TruncBern(2.0, 4, 4), 4) == 1.0
    assert bern_pmf(TruncBern(1.0, 0, 1), 1) == 0.5
    assert bern_pmf(TruncBern(3.0, 0, 1), 1) == pytest.approx(0.75)
    assert all(bern_sample(TruncBern(5.0, 2, 2), rng) == 2 for _ in range(20))


@given(st.floats(0.05, 20.0), st.integers(-5, 5), st.integers(0, 30))
def test_finite_window_pmf_normalized(xi, lo, width):
    vals, probs, tail = window_pmf(xi, lo, lo + width)
    assert tail == 0.0
    assert vals == list(range(lo, lo + width + 1))
    assert abs(probs.sum() - 1) < 1e-13
    if width:
        assert probs[1] / probs[0] == pytest.approx(xi)


def test_unbounded_pmf_tail_is_reported():
    vals, probs, tail = window_pmf(0.5, 2, math.inf, 1e-9)
    assert vals[0] == 2
    assert probs.sum() + tail == pytest.approx(1.0, abs=1e-15)
    assert tail <= 1e-9
    vals, probs, tail = window_pmf(3.0, -math.inf, 4, 1e-9)
    assert vals[0] == 4 and vals[1] == 3
    assert probs[1] / probs[0] == pytest.approx(1 / 3)


def test_point_supports_consume_no_randomness():
    rng = np.random.default_rng(0)
    before = rng.bit_generator.state
    counter = DrawCounter()
    assert draw(0.4, 3, 3, rng, counter) == 3
    assert draw(0.0, 1, math.inf, rng, counter) == 1
    assert draw(math.inf, 1, 4, rng, counter) == 4
    assert rng.bit_generator.state == before
    assert counter.nontrivial_draws == 0
    draw(0.4, 3, 4, rng, counter)
    assert counter.nontrivial_draws == 1


@pytest.mark.parametrize("xi,lo,hi", [(0.5, 0, 2), (0.4, 3, math.inf), (2.5, -1, 3),
                                       (1.0, -2, 2), (3.0, -math.inf, 0)])
def test_draw_matches_pmf(xi, lo, hi):
    vals, probs, tail = window_pmf(xi, lo, hi, 1e-12)
    ref = TruncatedMeasure(vals, probs, tail)

    def check(seed):
        rng = np.random.default_rng(seed)
        return chi_square(histogram(draw(xi, lo, hi, rng) for _ in range(20000)), ref).passed

    ok, results = passes_on_two(check)
    assert ok, results


def test_geom_sample_unbounded_mean():
    rng = np.random.default_rng(3)
    xs = [geom_sample(TruncGeom(0.5, 0, math.inf), rng) for _ in range(40000)]
    assert abs(np.mean(xs) - 1.0) < 0.05


# ------------------------------------------------------------ partition kernels


def test_up_up_alpha_example():
    pmf, tail = partition_kernel_pmf((1,), (), A(0.5), A(0.5), UP, 1e-14)
    for k in range(1, 8):
        assert pmf[(k,)] == pytest.approx(0.75 * 0.25 ** (k - 1))
    assert tail < 1e-14
    assert all(len(nu) == 1 for nu in pmf)


def test_up_up_alpha_small_xi_is_coordinatewise_max(rng):
    assert up_up_alpha((3, 1), (2, 2, 1), 1e-300, 0.5, rng) == (3, 2, 1)


def test_up_up_alpha_empty_inputs():
    pmf, _ = partition_kernel_pmf((), (), A(0.5), A(0.6), UP, 1e-14)
    assert pmf[(2,)] == pytest.approx(0.7 * 0.3 ** 2)


def test_up_up_alpha_rejects_divergent(rng):
    with pytest.raises(DivergentPairingError):
        up_up_alpha((), (), 1.0, 1.5, rng)


def test_down_up_alpha_examples(rng):
    pmf, _ = partition_kernel_pmf((2,), (), A(1.0), A(0.5), DU)
    assert [pmf[partition((k,))] for k in range(3)] == pytest.approx([4 / 7, 2 / 7, 1 / 7])
    assert down_up_alpha((3, 2, 1), (1,), 0.7, 0.0, rng) == (2, 1)
    pmf, _ = partition_kernel_pmf((1,), (1,), A(1.0), A(1.0), DU)
    assert pmf == {(1,): 1.0}


def test_beta_alpha_examples():
    pmf, _ = partition_kernel_pmf((1,), (1,), B(1.0), A(1.0), UP)
    marg = {}
    for nu, p in pmf.items():
        marg[nu[0]] = marg.get(nu[0], 0) + p
    assert marg == pytest.approx({1: 0.5, 2: 0.5})
    pmf, _ = partition_kernel_pmf((1,), (), B(0.5), A(0.5), DU)
    assert pmf == pytest.approx({(): 0.5, (1,): 0.5})


def test_beta_alpha_zero_b_is_max(rng):
    assert up_up_beta_alpha((2, 1), (1, 1, 1), 0.6, 0.0, rng) == (2, 1, 1)
    assert down_up_beta_alpha((2, 1), (1,), 0.6, 0.0, rng) == (1,)


def test_generic_kernel_examples():
    closed, _ = partition_kernel_pmf((1,), (), A(0.5), A(0.5), UP, 1e-15)
    gen, tail = generic_kernel((1,), (), A(0.5), A(0.5), UP, 1e-13)
    assert pmf_tv(closed, gen) <= 1e-12 + tail
    assert generic_kernel((2, 1), (2, 1), T, T, DD)[0] == {(2, 1): 1.0}
    pmf, _ = generic_kernel((), (1,), A(0.3), A(0.6), UD)
    assert pmf == pytest.approx({(): 0.6 / 0.9, (1,): 0.3 / 0.9})


def test_generic_kernel_empty_support_raises():
    with pytest.raises(KernelError):
        generic_kernel((1,), (2,), T, T, DD)


def test_partitions_containing_counts():
    assert sorted(partitions_containing((1,), 3)) == [(1, 1, 1), (2, 1), (3,)]
    assert sorted(partitions_containing((2, 1), 4, max_len=2)) == [(2, 2), (3, 1)]
    assert list(partitions_containing((2,), 1)) == []


SPECS = [A(0.3), A(0.6), B(0.4), B(1.0), T]


@pytest.mark.parametrize("mode", list(KernelMode))
@pytest.mark.parametrize("r1", SPECS, ids=str)
@pytest.mark.parametrize("r2", SPECS, ids=str)
def test_closed_form_matches_enumeration(mode, r1, r2):
    """Every single-parameter kernel against a box enumeration of skew Schur products."""
    rows = cols = 3
    box = list(partitions_in_box(2, 2))
    if mode is UP and r1.betas and r2.betas and r1.betas[0] * r2.betas[0] >= 1:
        with pytest.raises(DivergentPairingError):
            partition_kernel_pmf((), (), r1, r2, mode)
        return
    checked = 0
    for lam in box:
        for mu in box:
            try:
                closed, tail = partition_kernel_pmf(lam, mu, r1, r2, mode, 1e-14)
            except (KernelError, DivergentPairingError):
                closed = None
            if closed is None:
                assert not partition_kernel_enum(lam, mu, r1, r2, mode.first_up, mode.second_up, 4, 4)
                continue
            inside = {k: v for k, v in closed.items() if len(k) <= rows and (not k or k[0] <= cols)}
            z = sum(inside.values())
            ref = partition_kernel_enum(lam, mu, r1, r2, mode.first_up, mode.second_up, rows, cols)
            assert pmf_tv({k: v / z for k, v in inside.items()}, ref) < 1e-12
            checked += 1
    assert checked


@pytest.mark.parametrize("lam,mu", [((), ()), ((2, 1), (1,)), ((2, 1), (2, 2)), ((1, 1), (2, 1))])
@pytest.mark.parametrize("r1,r2", [(A(0.5), A(0.4)), (B(0.5), A(0.7)), (A(0.2), B(0.9)), (B(0.3), B(0.6))],
                         ids=str)
def test_up_up_against_generic(lam, mu, r1, r2):
    closed, t1 = partition_kernel_pmf(lam, mu, r1, r2, UP, 1e-14)
    gen, t2 = generic_kernel(lam, mu, r1, r2, UP, 1e-11)
    assert pmf_tv(closed, gen) <= 1e-10


@pytest.mark.parametrize("mode,lam,mu,r1,r2", [
    (UP, (2, 1), (1, 1), A(0.5), A(0.5)),
    (DU, (3, 2), (1,), A(0.6), A(0.5)),
    (UP, (1,), (2,), B(0.5), A(0.6)),
    (DU, (3, 1), (1,), B(0.4), A(0.5)),
    (UD, (1,), (3, 2, 1), A(0.5), B(0.7)),
    (DD, (3, 2, 1), (2, 2), B(0.5), B(0.3)),
])
def test_sampler_matches_exact_law(mode, lam, mu, r1, r2):
    pmf, tail = partition_kernel_pmf(lam, mu, r1, r2, mode, 1e-12)
    ref = TruncatedMeasure.from_dict(pmf, tail)

    def check(seed):
        rng = np.random.default_rng(seed)
        draws = [partition_kernel(lam, mu, r1, r2, mode, rng) for _ in range(20000)]
        return chi_square(histogram(draws), ref).passed

    ok, results = passes_on_two(check)
    assert ok, results


@given(st.sampled_from(list(partitions_in_box(3, 3))), st.sampled_from(list(partitions_in_box(3, 3))),
       st.floats(0.05, 0.9), st.floats(0.05, 0.9), st.integers(0, 2**32 - 1))
def test_up_up_draws_lie_in_support(lam, mu, a, b, seed):
    assume(partition_kernel_enum(lam, mu, A(a), A(b), True, True, 4, 4))
    nu = up_up_alpha(lam, mu, a, b, np.random.default_rng(seed))
    assert interlaces(lam, nu) and interlaces(mu, nu)
    assert len(nu) <= max(len(lam), len(mu)) + 1


@given(st.sampled_from(list(partitions_in_box(3, 3))), st.floats(0.05, 0.95), st.floats(0.05, 3.0),
       st.integers(0, 2**32 - 1), st.data())
def test_down_up_draws_lie_in_support(lam, a, b, seed, data):
    mid = data.draw(st.sampled_from(list(interlacing_below(lam))))
    mu = data.draw(st.sampled_from(list(interlacing_below(mid))))
    nu = down_up_alpha(lam, mu, a, b, np.random.default_rng(seed))
    assert interlaces(nu, lam) and interlaces(mu, nu)


def test_multi_parameter_falls_back_to_enumeration(rng):
    rho = Specialization(alphas=(0.3, 0.2))
    nu = kernel((1,), (), rho, A(0.5), UP, rng)
    assert contains((1,), nu)


# ------------------------------------------------------------ signature kernels


def E(kind, value):
    return EdreiSpec.single(kind, value)


def test_sig_aQ_examples():
    pmf, tail = sig_kernel_aQ_pmf((), (0,), E("alpha-", 1.0), 1.0, 1e-14)
    for k in range(6):
        assert pmf[(-k,)] == pytest.approx(2.0 ** (-k - 1))
    pmf, _ = sig_kernel_aQ_pmf((0,), (1, 0), E("beta-", 1e-12), 1.0)
    assert max(pmf.values()) == pytest.approx(1.0) and max(pmf, key=pmf.get) == (1, 0)


def test_sig_aQ_beta_example_matches_enumeration():
    pmf, _ = sig_kernel_aQ_pmf((0,), (1, 0), E("beta-", 0.5), 1.0)
    ref = signature_kernel_enum((0,), (1, 0), 1.0, E("beta-", 0.5), -6, 6)
    assert pmf_tv(pmf, ref) <= 1e-12


def test_sig_MQ_examples():
    pmf, _ = sig_kernel_MQ_pmf((0,), (0,), E("alpha-", 1.0), E("alpha-", 1.0), 1e-14)
    for k in range(6):
        assert pmf[(-k,)] == pytest.approx(0.75 * 0.25 ** k)
    pmf, _ = sig_kernel_MQ_pmf((1, -1), (2, -1), E("alpha+", 0.5), EdreiSpec())
    assert pmf == {(2, -1): 1.0}
    pmf, _ = sig_kernel_MQ_pmf((0,), (1,), E("beta+", 0.5), E("beta-", 0.5))
    assert pmf == pytest.approx({(0,): 0.5, (1,): 0.5})


EDREI = [EdreiSpec(), E("alpha+", 0.5), E("alpha-", 1.0), E("beta+", 0.3), E("beta-", 0.5),
         E("beta+", 1.0), E("beta-", 1.0)]


def _restrict(pmf, lo, hi):
    inside = {k: v for k, v in pmf.items() if all(lo <= x <= hi for x in k)}
    z = sum(inside.values())
    return {k: v / z for k, v in inside.items()}


@pytest.mark.parametrize("M", EDREI, ids=str)
@pytest.mark.parametrize("Q", EDREI, ids=str)
def test_sig_MQ_matches_enumeration(M, Q):
    lo, hi = -7, 7
    for n in (1, 2, 3):
        sigs = list(signatures_in_range(n, -2, 2))
        for lam in sigs[::4]:
            for mu in sigs[::3]:
                ref = signature_kernel_enum(lam, mu, M, Q, lo, hi)
                try:
                    pmf, _ = sig_kernel_MQ_pmf(lam, mu, M, Q, 1e-16)
                except KernelError:
                    assert not ref
                    continue
                assert pmf_tv(_restrict(pmf, lo, hi), ref) < 1e-9


@pytest.mark.parametrize("Q", EDREI, ids=str)
@pytest.mark.parametrize("a", [0.9, 1.0, 1.1])
def test_sig_aQ_matches_enumeration(Q, a):
    lo, hi = -7, 7
    for n in (1, 2, 3):
        for lam in list(signatures_in_range(n - 1, -2, 2))[::3]:
            for mu in list(signatures_in_range(n, -2, 2))[::3]:
                ref = signature_kernel_enum(lam, mu, a, Q, lo, hi)
                try:
                    pmf, _ = sig_kernel_aQ_pmf(lam, mu, Q, a, 1e-16)
                except KernelError:
                    assert not ref
                    continue
                assert pmf_tv(_restrict(pmf, lo, hi), ref) < 1e-9


@pytest.mark.parametrize("lam,mu,M,Q", [
    ((1, 0, -1), (1, 1, 0), E("beta+", 0.4), E("beta-", 0.6)),
    ((0, 0), (1, 0), E("beta-", 0.5), E("beta-", 0.3)),
    ((2, 0), (1, -1), E("alpha-", 0.8), E("beta+", 0.5)),
])
def test_sig_sampler_matches_exact_law(lam, mu, M, Q):
    pmf, tail = sig_kernel_MQ_pmf(lam, mu, M, Q, 1e-12)
    ref = TruncatedMeasure.from_dict(pmf, tail)

    def check(seed):
        rng = np.random.default_rng(seed)
        return chi_square(histogram(sig_kernel_MQ(lam, mu, M, Q, rng) for _ in range(20000)), ref).passed

    ok, results = passes_on_two(check)
    assert ok, results


@given(st.sampled_from(list(signatures_in_range(2, -3, 3))), st.sampled_from(list(signatures_in_range(3, -3, 3))),
       st.floats(0.5, 2.0), st.integers(0, 2**32 - 1))
def test_sig_aQ_draws_interlace(lam, mu, a, seed):
    Q = E("alpha+", 0.3)
    try:
        nu = sig_kernel_aQ(lam, mu, Q, a, np.random.default_rng(seed))
    except KernelError:
        assert not signature_kernel_enum(lam, mu, a, Q, -12, 12)
        return
    assert signature_interlaces(lam, nu)
    assert all(0 <= x - y <= 1 or True for x, y in zip(nu, mu))
    assert all(n_ >= m_ for n_, m_ in zip(nu, mu))


def test_sig_kernel_rejects_multi_parameter(rng):
    with pytest.raises(ValueError):
        sig_kernel_MQ((0,), (0,), EdreiSpec(alpha_plus=(0.1, 0.2)), EdreiSpec(), rng)
    with pytest.raises(ValueError):
        sig_kernel_MQ((0,), (0,), EdreiSpec(gamma_plus=0.1), EdreiSpec(), rng)
