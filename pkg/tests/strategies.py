"""Hypothesis strategies shared by the test modules."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from constcost.matrix import STAR, BitMatrix, PartialMatrix


def grids(max_rows, max_cols, values):
    return st.tuples(st.integers(1, max_rows), st.integers(1, max_cols)).flatmap(
        lambda s: st.lists(st.lists(values, min_size=s[1], max_size=s[1]), min_size=s[0], max_size=s[0])
    )


def bit_matrices(max_rows=5, max_cols=5):
    return grids(max_rows, max_cols, st.integers(0, 1)).map(BitMatrix.from_rows)


def partial_matrices(max_rows=3, max_cols=3):
    return grids(max_rows, max_cols, st.sampled_from([0, 1, STAR])).map(lambda g: PartialMatrix(np.array(g, dtype=np.int8)))


def bitstring_pairs(min_len=0, max_len=10):
    return st.integers(min_len, max_len).flatmap(
        lambda n: st.tuples(st.text("01", min_size=n, max_size=n), st.text("01", min_size=n, max_size=n))
    )
