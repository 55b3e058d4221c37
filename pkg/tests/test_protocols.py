from __future__ import annotations

import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constcost.problems import GADGET_X, GADGET_Y0, GADGET_Y1, bitstrings, hamming
from constcost.protocol import (
    BOT,
    PartitionNotFound,
    ThresholdInstance,
    bounded_diameter_threshold,
    brute_threshold,
    check_partition,
    diameter_partition,
    eq_gt_protocol,
    gt_bound,
    naive_thd_protocol,
    threshold_distance,
)
from constcost.protocol.engine import PartyView
from constcost.protocol.equality import gt_bits
from constcost.protocol.threshold import (
    as_set,
    diameter_threshold,
    planted_instance,
    query_budget,
    td_program,
    unique_rows,
)


def as_str(row) -> str:
    return "".join("1" if b else "0" for b in row)


# --- greater-than ----------------------------------------------------------------


def test_gt_examples():
    assert eq_gt_protocol(8, 3, 5)[0] == 1
    assert eq_gt_protocol(8, 7, 2)[0] == 0


def test_gt_bound_values():
    assert gt_bound(256) == 5
    assert gt_bits(1) == 0 and gt_bits(2) == 1 and gt_bits(9) == 4


def test_gt_rejects_out_of_range():
    with pytest.raises(ValueError):
        eq_gt_protocol(4, 0, 1)
    with pytest.raises(ValueError):
        eq_gt_protocol(4, 1, 5)


@pytest.mark.parametrize("N", list(range(1, 41)) + [256])
def test_gt_exhaustive(N):
    worst = 0
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            out, tr = eq_gt_protocol(N, i, j)
            assert out == int(i <= j)
            assert set(tr.counts) == {"EQ"} or not tr.entries
            worst = max(worst, tr.queries)
    assert worst <= gt_bound(N)


# --- naive threshold ---------------------------------------------------------------


def test_naive_examples():
    out, tr = naive_thd_protocol(8, 2, "01100110", "01100110")
    assert out == 0 and tr.queries == 1
    assert naive_thd_protocol(8, 1, "00000001", "00000000")[0] == 1
    assert naive_thd_protocol(8, 2, "11100000", "00000000")[0] is BOT


def test_naive_length_check():
    with pytest.raises(ValueError):
        naive_thd_protocol(3, 1, "01", "011")


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 16).flatmap(lambda n: st.tuples(st.text("01", min_size=n, max_size=n), st.text("01", min_size=n, max_size=n))), st.integers(0, 5))
def test_naive_matches_brute(pair, k):
    x, y = pair
    out, tr = naive_thd_protocol(len(x), k, x, y)
    assert out == brute_threshold(x, y, k)
    n = len(x)
    assert tr.queries <= (k + 1) * (1 + math.ceil(math.log2(n + 1)))


# --- partition -----------------------------------------------------------------------


def test_unique_rows_is_lexicographic():
    rng = np.random.default_rng(3)
    arr = rng.integers(0, 2, (60, 11)).astype(bool)
    arr = np.vstack([arr, arr[:10]])
    out = [as_str(r) for r in unique_rows(arr)]
    assert out == sorted({as_str(r) for r in arr})
    rows, inv = unique_rows(arr, return_inverse=True)
    assert np.array_equal(rows[inv], arr)


def test_as_set_validation():
    with pytest.raises(ValueError):
        as_set([])
    with pytest.raises(ValueError):
        as_set(["01", "011"])


def test_small_partition_always_valid():
    Z = ["000", "001", "011"]
    for mask in product([0, 1], repeat=3):
        A = [i for i in range(3) if mask[i]]
        B = [i for i in range(3) if not mask[i]]
        assert check_partition(Z, A, B)


def test_random_partition_found():
    rng = np.random.default_rng(0)
    Z = rng.integers(0, 2, (128, 512)).astype(bool)
    A, B = diameter_partition(Z, seed=0, max_tries=16)
    assert check_partition(Z, A, B)


def test_two_antipodal_strings():
    Z = ["0" * 512, "1" * 512]
    assert diameter_threshold(2) == 3
    # both sides nonempty: the strings never agree on a side, so nothing is constrained
    assert check_partition(Z, list(range(256)), list(range(256, 512)))
    assert check_partition(Z, [7], [i for i in range(512) if i != 7])
    # an empty side agrees trivially and leaves 512 differences on the other
    assert not check_partition(Z, [], list(range(512)))
    A, B = diameter_partition(Z, seed=0)
    assert len(A) and len(B)


def test_partition_errors():
    with pytest.raises(ValueError):
        diameter_partition(["0101"])
    with pytest.raises(ValueError):
        check_partition(["01", "10"], [0], [0])
    # agreeing on an empty side forces every pair to be close on the other
    Z = ["0" * 40, "1" * 40]
    with pytest.raises(PartitionNotFound):
        diameter_partition(Z, seed=0, max_tries=0)


def naive_partition_ok(Z, A, B, thr):
    for u in Z:
        for v in Z:
            for same, other in ((A, B), (B, A)):
                if all(u[i] == v[i] for i in same) and sum(u[i] != v[i] for i in other) > thr:
                    return False
    return True


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(1, 14))
def test_partition_check_matches_naive(seed, size, d):
    rng = np.random.default_rng(seed)
    Z = sorted({as_str(r) for r in rng.integers(0, 2, (size, d))})
    if len(Z) < 2:
        return
    mask = rng.integers(0, 2, d).astype(bool)
    A, B = list(np.nonzero(mask)[0]), list(np.nonzero(~mask)[0])
    for thr in (1, 2, diameter_threshold(len(Z))):
        assert check_partition(Z, A, B, thr) == naive_partition_ok(Z, A, B, thr)


# --- bounded diameter ------------------------------------------------------------------


def test_bounded_diameter_examples():
    Z = ["0000", "0011", "0101"]
    assert bounded_diameter_threshold(Z, "0011", "0011", 2)[0] == 0
    assert bounded_diameter_threshold(Z, "0011", "0101", 2)[0] == 2
    assert bounded_diameter_threshold(Z, "0011", "0101", 1)[0] is BOT


def test_bounded_diameter_debug_checks():
    with pytest.raises(ValueError):
        bounded_diameter_threshold(["0000", "0011"], "0000", "1111", 2, debug=True)
    Z = ["0" * 12, "1" * 12]
    with pytest.raises(ValueError):
        bounded_diameter_threshold(Z, Z[0], Z[1], 2, debug=True)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 4))
def test_bounded_diameter_matches_brute(seed, k):
    rng = np.random.default_rng(seed)
    center = rng.integers(0, 2, 10).astype(bool)
    Z = [center.copy()]
    for _ in range(int(rng.integers(2, 12))):
        z = center.copy()
        z[rng.choice(10, size=int(rng.integers(0, 4)), replace=False)] ^= True
        Z.append(z)
    Zs = as_set(Z)
    bound = diameter_threshold(len(Zs))
    for x in Zs:
        for y in Zs:
            out, tr = bounded_diameter_threshold(Zs, x, y, k, bound=max(bound, 6))
            assert out == brute_threshold(x, y, k)


# --- threshold distance ------------------------------------------------------------------


def test_threshold_distance_examples():
    cube = bitstrings(3)
    assert threshold_distance(cube, cube, "010", "011", 2)[0] == 1
    X, Y = GADGET_X, GADGET_Y0 + GADGET_Y1
    assert threshold_distance(X, Y, "0011000", "1010000", 2)[0] == 2
    assert threshold_distance(X, Y, "0011000", "0000011", 2)[0] is BOT


def test_threshold_distance_rejects_wrong_length():
    with pytest.raises(ValueError):
        threshold_distance(["01"], ["10"], "011", "10", 1)


def test_instance_reuse_is_deterministic():
    rng = np.random.default_rng(5)
    X, Y = planted_instance(rng, 20, 64)
    inst = ThresholdInstance(X, Y, seed=4)
    a = [threshold_distance(None, None, X[i], Y[i], 3, instance=inst) for i in range(20)]
    b = [threshold_distance(X, Y, X[i], Y[i], 3, seed=4) for i in range(20)]
    assert [(o, t.answers()) for o, t in a] == [(o, t.answers()) for o, t in b]


def test_cube_exhaustive():
    cube = bitstrings(4)
    inst = ThresholdInstance(cube, cube)
    for x in cube:
        for y in cube:
            for k in range(5):
                out, tr = threshold_distance(None, None, x, y, k, instance=inst)
                assert out == brute_threshold(x, y, k)
                assert tr.queries <= query_budget(16, k)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 16), st.sampled_from([6, 12, 24, 48]), st.integers(0, 3))
def test_threshold_distance_matches_brute(seed, size, d, k):
    rng = np.random.default_rng(seed)
    X, Y = planted_instance(rng, size, d, near=0.7, max_flips=4)
    inst = ThresholdInstance(X, Y, seed=seed % 7)
    for x in inst.X:
        for y in inst.Y:
            out, tr = threshold_distance(None, None, x, y, k, instance=inst)
            assert out == brute_threshold(x, y, k)
            assert tr.queries <= query_budget(len(inst.Z), k)


def test_gadget_rectangles_by_protocol():
    X, Y = GADGET_X, GADGET_Y0 + GADGET_Y1
    for x in X:
        for y in Y:
            expected = 2 if y in GADGET_Y1 else BOT
            assert threshold_distance(X, Y, x, y, 2)[0] == expected
            assert hamming(x, y) == (2 if y in GADGET_Y1 else 4)


# --- oracle purity ------------------------------------------------------------------------


def replay(program, role, value, shared, answers):
    """Run one party alone, feeding it recorded answers; returns its arguments and output."""
    view = PartyView(role, value, shared)
    gen = program(view)
    args = []
    try:
        q = gen.send(None)
        for a in answers:
            args.append(q.value)
            view.answers.append(a)
            q = gen.send(a)
        raise AssertionError("party asked more queries than recorded")
    except StopIteration as stop:
        return args, stop.value


@pytest.mark.parametrize("seed", range(4))
def test_each_party_depends_only_on_its_view(seed):
    rng = np.random.default_rng(seed)
    X, Y = planted_instance(rng, 24, 96, near=0.8, max_flips=5)
    inst = ThresholdInstance(X, Y, seed=seed)
    for i in range(24):
        for k in (1, 3):
            out, tr = threshold_distance(None, None, X[i], Y[i], k, instance=inst)
            ans = tr.answers()
            a_args, a_out = replay(td_program(inst, k), "alice", X[i], inst, ans)
            b_args, b_out = replay(td_program(inst, k), "bob", Y[i], inst, ans)
            assert a_args == [e.alice_arg for e in tr.entries]
            assert b_args == [e.bob_arg for e in tr.entries]
            assert a_out == b_out == out or (a_out is BOT and out is BOT)
            assert all(e.answer == int(e.alice_arg == e.bob_arg) for e in tr.entries)


def test_query_budget_is_distance_free():
    assert query_budget(64, 2) == query_budget(64, 2)
    assert query_budget(1, 3) == 1
    assert query_budget(4096, 1) < 4 * query_budget(64, 1)
