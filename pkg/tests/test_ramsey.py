from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constcost.domino import ALL, delta_type, is_shuffle_invariant
from constcost.matrix import BudgetExceeded
from constcost.problems import bitstrings, gen_ehd, hamming
from constcost.ramsey import (
    EmbeddingPhi,
    NoHomogeneousSet,
    SubsetColoring,
    embed_phi,
    extract_invariant_queries,
    find_homogeneous,
    is_homogeneous,
    read_coloring,
    signature_order,
    tabulate,
)

from strategies import bitstring_pairs


def graph_coloring(N, edge_color):
    return SubsetColoring(N, 2, lambda S: "v" if len(S) == 1 else edge_color(*S))


def brute_homogeneous_exists(coloring, sigma):
    return any(is_homogeneous(coloring, T) for T in combinations(range(coloring.N), sigma))


# --- homogeneous sets ------------------------------------------------------------------


def test_pigeonhole():
    col = SubsetColoring(3, 1, lambda S: S[0] % 2)
    T = find_homogeneous(col, 2)
    assert T is not None and is_homogeneous(col, T)


def test_pentagon_has_no_monochromatic_triangle():
    col = graph_coloring(5, lambda i, j: (j - i) % 5 in (1, 4))
    assert find_homogeneous(col, 3) is None
    assert not brute_homogeneous_exists(col, 3)


def test_sampled_k6_colorings_have_triangles():
    edges = list(combinations(range(6), 2))
    rng = np.random.default_rng(0)
    for mask in rng.integers(0, 2**15, size=300):
        col = graph_coloring(6, lambda i, j, m=int(mask): (m >> edges.index((i, j))) & 1)
        T = find_homogeneous(col, 3)
        assert T is not None and is_homogeneous(col, T)


def test_budget_is_distinct_from_absent():
    col = graph_coloring(5, lambda i, j: (j - i) % 5 in (1, 4))
    with pytest.raises(BudgetExceeded):
        find_homogeneous(col, 3, budget=3)


def test_sigma_below_alpha():
    with pytest.raises(ValueError):
        find_homogeneous(SubsetColoring(4, 2, lambda S: 0), 1)


def test_mapping_must_be_total():
    with pytest.raises(ValueError):
        SubsetColoring(3, 1, {(0,): 1, (1,): 1})


def test_colors_canonicalized():
    col = SubsetColoring(3, 1, lambda S: "red" if S[0] else "blue")
    assert [col((i,)) for i in range(3)] == [0, 1, 1]
    assert col.beta == 2


def test_read_coloring():
    col = read_coloring("# triangle\n0 a\n1 a\n2 a\n0 1 x\n0 2 x\n1 2 y\n")
    assert (col.N, col.alpha) == (3, 2)
    assert find_homogeneous(col, 2) == (0, 1)
    assert find_homogeneous(col, 3) is None
    with pytest.raises(ValueError):
        read_coloring("# nothing\n")


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 7), st.integers(2, 3), st.integers(2, 4))
def test_search_complete_against_enumeration(seed, N, beta, sigma):
    rng = np.random.default_rng(seed)
    table = {S: int(rng.integers(beta)) for s in (1, 2) for S in combinations(range(N), s)}
    col = SubsetColoring(N, 2, table)
    sigma = min(sigma, N)
    T = find_homogeneous(col, sigma)
    assert (T is not None) == brute_homogeneous_exists(col, sigma)
    if T is not None:
        assert len(T) == sigma and is_homogeneous(col, T)


# --- embedding ----------------------------------------------------------------------------


def test_prefix_embedding_pads():
    assert embed_phi("101", EmbeddingPhi(6, (0, 1, 2), 0)) == "101000"
    assert embed_phi("01", EmbeddingPhi(5, (1, 3), 1)) == "10111"


def test_embedding_validation():
    with pytest.raises(ValueError):
        EmbeddingPhi(4, (2, 1), 0)
    with pytest.raises(ValueError):
        EmbeddingPhi(4, (1, 4), 0)
    with pytest.raises(ValueError):
        EmbeddingPhi(4, (1,), 2)
    with pytest.raises(ValueError):
        embed_phi("01", EmbeddingPhi(4, (1,), 0))


@given(bitstring_pairs(1, 6), st.integers(0, 6), st.integers(0, 1), st.data())
def test_embedding_preserves_distance_and_types(pair, extra, a, data):
    x, y = pair
    n = len(x)
    N = n + extra
    T = tuple(sorted(data.draw(st.lists(st.integers(0, N - 1), min_size=n, max_size=n, unique=True))))
    phi = EmbeddingPhi(N, T, a)
    u, v = embed_phi(x, phi), embed_phi(y, phi)
    assert hamming(u, v) == hamming(x, y)
    D = set(signature_order(a))
    assert delta_type(x, y, D).signature == delta_type(u, v, D).signature


def test_signature_order():
    assert signature_order(0) == ("11", "10", "01")
    assert signature_order(1) == ("00", "10", "01")


# --- extraction -----------------------------------------------------------------------------


def occupied_at_least_two(u: str, v: str) -> int:
    """Depends only on how many positions are not 00."""
    return int(sum(p + q != "00" for p, q in zip(u, v)) >= 2)


def reads_position_zero(u: str, v: str) -> int:
    return int(u[0] == "1")


def test_invariant_queries_stay_invariant():
    ext = extract_invariant_queries([gen_ehd(6, 1)], 2, ALL, 0)
    assert len(ext.T) == 2
    assert all(is_shuffle_invariant(Q, ALL) for Q in ext.queries)


def test_count_sensitive_query():
    ext = extract_invariant_queries([occupied_at_least_two], 2, (), 0, N=6)
    assert is_shuffle_invariant(ext.queries[0], {"00"})


def test_no_slack_fails():
    with pytest.raises(NoHomogeneousSet):
        extract_invariant_queries([reads_position_zero], 2, (), 0, N=2)


def test_rejects_non_invariant_input():
    Q = tabulate(reads_position_zero, 4)
    assert not is_shuffle_invariant(Q, ALL)
    with pytest.raises(ValueError):
        extract_invariant_queries([Q], 2, ALL, 0)


def test_micro_scale_guard():
    with pytest.raises(ValueError):
        extract_invariant_queries([occupied_at_least_two], 4, (), 0, N=8)
    with pytest.raises(ValueError):
        extract_invariant_queries([occupied_at_least_two], 2, (), 0)


def test_reconstruction_hook():
    ext = extract_invariant_queries([gen_ehd(6, 1)], 3, ALL, 0, f=lambda a: a[0], k=1)
    assert ext.f_agrees is True
    ext = extract_invariant_queries([gen_ehd(6, 1)], 3, ALL, 0, f=lambda a: 1 - a[0], k=1)
    assert ext.f_agrees is False
