"""Generators for the problem families and explicit constructions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .matrix import STAR, BitMatrix, PartialMatrix

MAX_BITS = 14
MAX_SIDE = 2**14


def bitstrings(n: int) -> tuple[str, ...]:
    """All n-bit strings in numeric order (most significant bit first)."""
    return tuple(format(i, f"0{n}b") for i in range(2**n)) if n else ("",)


def hamming(x: str, y: str) -> int:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    return sum(a != b for a, b in zip(x, y))


def distance_matrix(n: int) -> np.ndarray:
    """dist(x, y) for all x, y in {0,1}^n, indexed by numeric value."""
    idx = np.arange(2**n, dtype=np.uint32)
    return np.bitwise_count(idx[:, None] ^ idx[None, :]).astype(np.int16)


def _check_nk(n, k):
    if not (0 <= k <= n <= MAX_BITS):
        raise ValueError(f"need 0 <= k <= n <= {MAX_BITS}, got n={n}, k={k}")


def gen_equality(n: int) -> BitMatrix:
    if not (1 <= n <= MAX_BITS):
        raise ValueError(f"need 1 <= n <= {MAX_BITS}, got {n}")
    labels = bitstrings(n)
    return BitMatrix(np.eye(2**n, dtype=bool), labels, labels)


def gen_gt(t: int) -> BitMatrix:
    """Greater-Than: entry (i, j) is 1 iff i <= j (0-based indices)."""
    if t < 1:
        raise ValueError(f"need t >= 1, got {t}")
    return BitMatrix(np.triu(np.ones((t, t), dtype=bool)))


def gen_ehd(n: int, k: int) -> BitMatrix:
    _check_nk(n, k)
    labels = bitstrings(n)
    return BitMatrix(distance_matrix(n) == k, labels, labels)


def gen_thd(n: int, k: int) -> BitMatrix:
    _check_nk(n, k)
    labels = bitstrings(n)
    return BitMatrix(distance_matrix(n) <= k, labels, labels)


def iip_points(d: int, n: int) -> list[tuple[int, ...]]:
    """Integer vectors in [-2^(n-1), 2^(n-1)]^d, both endpoints included, lexicographic."""
    half = 2 ** (n - 1)
    return list(itertools.product(range(-half, half + 1), repeat=d))


def gen_iip(d: int, n: int) -> BitMatrix:
    """Integer inner product: 0 iff <x, y> = 0.  Rows and columns follow ``iip_points``."""
    if d < 1 or n < 1:
        raise ValueError(f"need d >= 1 and n >= 1, got d={d}, n={n}")
    side = (2**n + 1) ** d
    if side > MAX_SIDE:
        raise ValueError(f"IIP side length {side} exceeds {MAX_SIDE}")
    pts = np.array(iip_points(d, n), dtype=np.int64)
    return BitMatrix((pts @ pts.T) != 0)


def gen_shattered_two_tally(k: int) -> BitMatrix:
    """2^k x k matrix of VC dimension k embedded as a two-tally submatrix of EHD_{k-1}.

    Uses n = 2k + 1 bits.  Column i is the standard basis vector e_i; row S (subsets
    in bitmask order) has bits S set plus the last k - |S| bits.  Entry (S, i) is 1
    iff i is in S.
    """
    if not (1 <= k <= 6):
        raise ValueError(f"need 1 <= k <= 6, got {k}")
    n = 2 * k + 1
    cols = []
    for i in range(k):
        b = ["0"] * n
        b[i] = "1"
        cols.append("".join(b))
    rows, grid = [], []
    for mask in range(2**k):
        S = [i for i in range(k) if mask >> i & 1]
        b = ["0"] * n
        for i in S:
            b[i] = "1"
        for p in range(n - (k - len(S)), n):
            b[p] = "1"
        rows.append("".join(b))
        grid.append([1 if i in S else 0 for i in range(k)])
    return BitMatrix(np.array(grid, dtype=bool), tuple(rows), tuple(cols))


GADGET_X = ("0011000", "1100000")
GADGET_Y0 = ("0000011", "0000101", "0000110")
GADGET_Y1 = ("1010000", "1001000", "0101000")
_WEIGHT2_7 = tuple(s for s in bitstrings(7) if s.count("1") == 2)


def separator(a: str, b: str) -> str:
    """Lexicographically smallest weight-2 string at distance 2 from a and 4 from b."""
    for s in _WEIGHT2_7:
        if hamming(a, s) == 2 and hamming(b, s) == 4:
            return s
    raise AssertionError(f"no separating string for {a}, {b}")


def _dedup(seq):
    return tuple(dict.fromkeys(seq))


def gen_ehd2_gadget() -> PartialMatrix:
    """Partial submatrix of EHD_2 on 7-bit weight-2 strings with 2 -> 1, 4 -> 0, else *."""
    X, Y = GADGET_X, GADGET_Y0 + GADGET_Y1
    extra_cols = [separator(a, b) for a, b in itertools.permutations(X, 2)]
    extra_rows = [separator(a, b) for a, b in itertools.permutations(Y, 2)]
    rows = _dedup(X + tuple(extra_rows))
    cols = _dedup(Y + tuple(extra_cols))
    grid = np.full((len(rows), len(cols)), STAR, dtype=np.int8)
    for i, x in enumerate(rows):
        for j, y in enumerate(cols):
            dist = hamming(x, y)
            if dist == 2:
                grid[i, j] = 1
            elif dist == 4:
                grid[i, j] = 0
    return PartialMatrix(grid, rows, cols)


FAMILIES = ("EQ", "GT", "EHD", "THD", "IIP", "SHATTERED_TWO_TALLY", "EHD2_GADGET")


@dataclass(frozen=True)
class ProblemSpec:
    family: str
    n: int = 0
    k: int = 0
    t: int = 0
    d: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if min(self.n, self.k, self.t, self.d) < 0:
            raise ValueError("parameters must be nonnegative")
        if self.family in ("EHD", "THD") and self.k > self.n:
            raise ValueError("need k <= n")
        if self.family == "IIP" and self.d < 1:
            raise ValueError("IIP needs d >= 1")

    def build(self):
        f = self.family
        if f == "EQ":
            return gen_equality(self.n)
        if f == "GT":
            return gen_gt(self.t)
        if f == "EHD":
            return gen_ehd(self.n, self.k)
        if f == "THD":
            return gen_thd(self.n, self.k)
        if f == "IIP":
            return gen_iip(self.d, self.n)
        if f == "SHATTERED_TWO_TALLY":
            return gen_shattered_two_tally(self.k)
        return gen_ehd2_gadget()
