import numpy as np
import pytest
from hypothesis import given, strategies as st

from schurdyn.combinatorics import PlanePartitionShape, partitions_in_box, signatures_in_range, volume
from schurdyn.oracle import (
    EnumerationTooLarge, TestReport, TruncatedMeasure, chi_square, count_spp_transfer, enumerate_spp,
    exact_spp_measure, histogram, mean_volume_closed_form, mean_volume_sum, partition_function_sum,
    pmf_tv, process_marginal_top, residual_report, schur_link_rows, schur_measure, spp_tail_bound,
    tv_distance, verify_intertwining, verify_link_commutation, verify_p_updown, verify_T_relations,
)
from schurdyn.schur_eval import SchurProcessSpec, partition_function_schur, spp_process_spec
from schurdyn.specializations import EdreiSpec, Specialization

A = Specialization.alpha
B = Specialization.beta
E = EdreiSpec.single


# ---------------------------------------------------------------- enumeration


@pytest.mark.parametrize("shape,cap,count", [
    (PlanePartitionShape(1, 1), 3, 4),
    (PlanePartitionShape(1, 2), 2, 6),
    (PlanePartitionShape(2, 3, (3, 3)), 5, 1),
])
def test_enumeration_counts(shape, cap, count):
    assert len(enumerate_spp(shape, cap)) == count


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 3), st.data())
def test_enumeration_matches_transfer_count(a, b, cap, data):
    pi = data.draw(st.sampled_from([p for p in partitions_in_box(a, b)]))
    shape = PlanePartitionShape(a, b, pi)
    fills = enumerate_spp(shape, cap)
    assert len(fills) == count_spp_transfer(shape, cap)
    assert len(set(f.entries for f in fills)) == len(fills)
    assert sum(0.5 ** volume(f) for f in fills) == pytest.approx(count_spp_transfer(shape, cap, 0.5))


def test_enumeration_guard():
    with pytest.raises(EnumerationTooLarge):
        enumerate_spp(PlanePartitionShape(3, 3), 6, state_cap=100)
    with pytest.raises(ValueError):
        enumerate_spp(PlanePartitionShape(1, 1), -1)


def test_enumeration_stable_on_empty_support():
    shape = PlanePartitionShape(2, 2, (2, 2))
    assert len(enumerate_spp(shape, 1)) == len(enumerate_spp(shape, 9)) == 1


def test_exact_measure_one_box():
    m = exact_spp_measure(PlanePartitionShape(1, 1), 0.5, 20)
    d = m.as_dict()
    for n in range(21):
        assert d[((n,),)] == pytest.approx(2.0 ** (-n - 1), rel=1e-12)
    assert m.tail_bound <= 2.0 ** -21 + 1e-15


def test_exact_measure_small_q_is_a_point_mass():
    m = exact_spp_measure(PlanePartitionShape(2, 2), 1e-9, 2)
    assert m.as_dict()[((0, 0), (0, 0))] == pytest.approx(1.0, abs=1e-8)


def test_exact_measure_full_two_by_two():
    m = exact_spp_measure(PlanePartitionShape(2, 2), 0.3, 12)
    assert m.tail_bound < 1e-6
    assert m.mass + m.tail_bound == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        exact_spp_measure(PlanePartitionShape(2, 2), 0.3, 1, max_tail=1e-6)


@pytest.mark.parametrize("shape", [PlanePartitionShape(1, 1), PlanePartitionShape(1, 2),
                                   PlanePartitionShape(2, 2, (1,)), PlanePartitionShape(2, 3, (2,))])
def test_partition_function_sum_matches_product(shape):
    z = partition_function_schur(spp_process_spec(shape, 0.3))
    total, rel = partition_function_sum(shape, 0.3, 30)
    assert abs(total - z) / z <= rel + 1e-14
    assert rel < 1e-8


def test_tail_bound_is_an_upper_bound():
    shape = PlanePartitionShape(1, 2)
    z = partition_function_schur(spp_process_spec(shape, 0.5))
    for cap in range(1, 8):
        assert (z - count_spp_transfer(shape, cap, 0.5)) / z <= spp_tail_bound(shape, 0.5, cap)


# ---------------------------------------------------------------- mean volume


def test_mean_volume_examples():
    assert mean_volume_closed_form(PlanePartitionShape(1, 1), 0.5) == pytest.approx(1.0)
    assert mean_volume_closed_form(PlanePartitionShape(1, 2), 0.5) == pytest.approx(5 / 3)
    assert mean_volume_closed_form(PlanePartitionShape(2, 2), 1e-9) < 1e-8
    with pytest.raises(ValueError):
        mean_volume_closed_form(PlanePartitionShape(1, 1), 1.0)


@pytest.mark.parametrize("shape", [PlanePartitionShape(1, 2), PlanePartitionShape(2, 2, (1,)),
                                   PlanePartitionShape(2, 2)])
def test_mean_volume_matches_enumeration(shape):
    assert mean_volume_sum(shape, 0.3, 25) == pytest.approx(mean_volume_closed_form(shape, 0.3), rel=1e-9)


# ---------------------------------------------------------------- statistics


def test_chi_square_on_exact_counts():
    probs = np.array([0.5, 0.25, 0.125, 0.125])
    ref = TruncatedMeasure(list(range(4)), probs)
    rep = chi_square({k: int(p * 100_000) for k, p in enumerate(probs)}, ref)
    assert rep.passed and rep.statistic == pytest.approx(0.0, abs=1e-9) and rep.p_value > 0.99


def test_chi_square_detects_a_ten_percent_shift():
    rng = np.random.default_rng(7)
    probs = np.array([0.4, 0.3, 0.2, 0.1])
    counts = histogram(rng.choice(4, size=100_000, p=probs).tolist())
    assert chi_square(counts, TruncatedMeasure(list(range(4)), probs)).passed
    shifted = probs.copy()
    shifted[0] *= 1.1
    shifted[1] -= 0.04
    assert not chi_square(counts, TruncatedMeasure(list(range(4)), shifted)).passed


def test_chi_square_needs_samples():
    ref = TruncatedMeasure([0, 1], [0.5, 0.5])
    with pytest.raises(ValueError):
        chi_square({}, ref)
    with pytest.raises(ValueError):
        chi_square({0: 1, 1: 1}, ref)


def test_tv_distance_includes_tail():
    ref = TruncatedMeasure([0, 1], [0.5, 0.4], tail_bound=0.1)
    assert tv_distance({0: 5, 1: 4, 2: 1}, ref) == pytest.approx(0.5 * (0.1 + 0.1))
    assert pmf_tv({0: 1.0}, {1: 1.0}) == 1.0


def test_truncated_measure_rejects_bad_input():
    with pytest.raises(ValueError):
        TruncatedMeasure([0, 1], [0.5])
    with pytest.raises(ValueError):
        TruncatedMeasure([0], [-0.1])


def test_residual_report_requires_meaningful_tail():
    assert residual_report("x", 1e-13, 1e-12).passed
    assert not residual_report("x", 1e-11, 1e-12).passed
    assert not residual_report("x", 0.0, 1e-12, tail=1e-6).passed
    rep = TestReport("y", True, statistic=float("inf"))
    assert rep.as_dict()["statistic"] == "inf"


# ---------------------------------------------------------------- identities


def test_p_updown_alpha_beta_example():
    states = list(partitions_in_box(2, 10))
    for rep in verify_p_updown(A(0.3), B(0.4), A(0.2), states, tol=1e-10):
        assert rep.passed, rep.line()


def test_p_updown_trivial_z_is_identity():
    states = list(partitions_in_box(2, 2))
    for rep in verify_p_updown(B(0.5), Specialization(), B(0.3), states, x=A(0.2), tol=1e-13):
        assert rep.passed, rep.line()


def test_p_updown_beta_only_is_exact():
    states = list(partitions_in_box(3, 2))
    reps = verify_p_updown(Specialization(betas=(0.6, 0.2)), A(0.5), B(0.4), states, x=A(0.3), tol=1e-13)
    assert len(reps) == 5
    for rep in reps:
        assert rep.passed and rep.tail_bound < 1e-15, rep.line()


def test_schur_measure_normalized():
    x, y = A(0.4), Specialization(alphas=(0.3,), betas=(0.2,))
    # a single alpha supports one-row partitions only
    total = sum(schur_measure(x, y, lam) for lam in partitions_in_box(1, 60))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_T_relations_trivial_M():
    states = list(signatures_in_range(2, -3, 3))
    for rep in verify_T_relations((1.0, 1.0), EdreiSpec(), states, tol=0.0):
        assert rep.passed and rep.max_residual == 0.0, rep.line()


def test_T_relations_beta_minus():
    states = list(signatures_in_range(2, -5, 5))
    for rep in verify_T_relations((1.0, 1.0), E("beta-", 0.5), states, M2=E("beta-", 0.2), tol=1e-12):
        assert rep.passed, rep.line()


def test_T_relations_alpha_minus():
    states = list(signatures_in_range(2, -5, 5))
    for rep in verify_T_relations((0.9, 1.1), E("alpha-", 0.5), states, tol=1e-8):
        assert rep.passed, rep.line()


def test_intertwining_identity_chains():
    ident = lambda x: ({x: 1.0}, 0.0)
    link = lambda x: ({x: 0.5, x + 1: 0.5}, 0.0)
    rep = verify_intertwining([ident, ident], [link], [link], {0: 0.3, 3: 0.7})
    assert rep.passed and rep.max_residual == 0.0


@pytest.mark.parametrize("kind,step", [("up", A(0.5)), ("down", B(0.5))])
def test_intertwining_beta_system(kind, step):
    proc = SchurProcessSpec((B(0.5), B(0.4)), (A(0.6), A(0.3)))
    P, Lam, LamT = schur_link_rows(proc, step, kind, tail_tol=1e-15)
    for top in [(), (2, 1), (1, 1, 1)]:
        rep = verify_intertwining(P, Lam, LamT, {top: 1.0}, tol=1e-12, prune=1e-15)
        assert rep.passed, rep.line()


def test_intertwining_with_top_marginal():
    proc = SchurProcessSpec((B(0.5), B(0.4)), (A(0.6), A(0.3)))
    P, Lam, LamT = schur_link_rows(proc, A(0.5), "up", tail_tol=1e-15)
    m_top = process_marginal_top(proc, 8)
    m_top = {k: v for k, v in m_top.items() if v > 1e-9}
    rep = verify_intertwining(P, Lam, LamT, m_top, tol=1e-12, prune=1e-15)
    assert rep.passed, rep.line()


def test_link_commutation_detects_wrong_links():
    proc = SchurProcessSpec((B(0.5), B(0.4)), (A(0.6), A(0.3)))
    P, Lam, LamT = schur_link_rows(proc, A(0.5), "up")
    _, bad, _ = schur_link_rows(SchurProcessSpec((B(0.2), B(0.4)), (A(0.6), A(0.3))), A(0.5), "up")
    states = [list(partitions_in_box(3, 2))] * 3
    assert verify_link_commutation(P, Lam, LamT, states).passed
    assert not verify_link_commutation(P, bad, LamT, states).passed
