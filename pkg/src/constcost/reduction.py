"""Constant-cost reductions on small instances.

A reduction of P to a query class is a witness ``(Q_1..Q_c, f)`` with
``P(x, y) = f(Q_1(x, y), ..., Q_c(x, y))`` at every entry.  Truth tables index
their inputs with Q_1 as the most significant bit.

Matrices in the query set of Equality are exactly the *blocky* ones: the 1-entries
form combinatorial rectangles whose row supports are pairwise disjoint and whose
column supports are pairwise disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Protocol, Sequence

import numpy as np

from .matrix import BitMatrix, BudgetExceeded, dumps, loads, negate

DEFAULT_CANDIDATES = 10**6


@dataclass(frozen=True)
class TableFunction:
    """Boolean function given by its truth table ``bits`` of length 2^arity."""

    bits: tuple[int, ...]

    def __post_init__(self):
        n = len(self.bits)
        if n == 0 or n & (n - 1) or any(b not in (0, 1) for b in self.bits):
            raise ValueError("truth table must have 2^c entries in {0, 1}")
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))

    @property
    def arity(self) -> int:
        return len(self.bits).bit_length() - 1

    @classmethod
    def from_string(cls, s: str) -> "TableFunction":
        return cls(tuple(int(ch) for ch in s.strip()))

    @classmethod
    def tabulate(cls, f: Callable, arity: int) -> "TableFunction":
        bits = []
        for idx in range(2**arity):
            answers = tuple((idx >> (arity - 1 - i)) & 1 for i in range(arity))
            bits.append(int(f(answers)))
        return cls(tuple(bits))

    def __call__(self, answers: Sequence[int]) -> int:
        idx = 0
        for a in answers:
            idx = (idx << 1) | int(a)
        return self.bits[idx]

    def flipped(self, i: int) -> "TableFunction":
        bits = list(self.bits)
        bits[i] ^= 1
        return TableFunction(tuple(bits))

    def negated(self) -> "TableFunction":
        return TableFunction(tuple(1 - b for b in self.bits))

    def __str__(self):
        return "".join(map(str, self.bits))


@dataclass(frozen=True, eq=False)
class ReductionWitness:
    queries: tuple[BitMatrix, ...]
    f: Callable[[Sequence[int]], int]

    @property
    def c(self) -> int:
        return len(self.queries)

    def table(self) -> TableFunction:
        if isinstance(self.f, TableFunction):
            return self.f
        return TableFunction.tabulate(self.f, self.c)

    def evaluate(self, shape: tuple[int, int] | None = None) -> BitMatrix:
        """The matrix f(Q_1, ..., Q_c), evaluating f once per distinct answer vector."""
        if not self.queries:
            if shape is None:
                raise ValueError("a query-free witness needs an explicit shape")
            return BitMatrix(np.full(shape, bool(self.f(())), dtype=bool))
        shape = self.queries[0].shape
        if any(q.shape != shape for q in self.queries):
            raise ValueError("queries have different shapes")
        stack = np.stack([q.entries for q in self.queries], axis=-1).reshape(-1, self.c)
        uniq, inverse = np.unique(stack, axis=0, return_inverse=True)
        values = np.array([self.f(tuple(int(b) for b in row)) for row in uniq], dtype=bool)
        return BitMatrix(values[inverse.reshape(-1)].reshape(shape))


def verify_witness(target: BitMatrix, w: ReductionWitness) -> bool:
    """True iff target(x, y) = f(Q_1(x, y), ..., Q_c(x, y)) at every entry."""
    for i, q in enumerate(w.queries):
        if q.shape != target.shape:
            raise ValueError(f"query {i} has shape {q.shape}, target has {target.shape}")
    got = w.evaluate(target.shape)
    return bool(np.array_equal(got.entries, target.entries))


# ---------------------------------------------------------------------------
# Blocky matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockyLabeling:
    """Row labels ``a`` and column labels ``b``; entry is 1 iff a(x) = b(y) is not None."""

    a: tuple[int | None, ...]
    b: tuple[int | None, ...]

    def matrix(self) -> BitMatrix:
        a = np.array([-1 if v is None else v for v in self.a])
        b = np.array([-2 if v is None else v for v in self.b])
        return BitMatrix(a[:, None] == b[None, :])


def is_blocky(M: BitMatrix) -> BlockyLabeling | None:
    """Labeling witnessing membership in the query set of Equality, or None.

    Rows with a common 1 must have identical 1-sets; equivalently the distinct
    nonzero rows have pairwise disjoint supports.
    """
    block_of: dict[bytes, int] = {}
    reps: list[np.ndarray] = []
    a: list[int | None] = []
    for row in M.entries:
        if not row.any():
            a.append(None)
            continue
        key = row.tobytes()
        if key not in block_of:
            block_of[key] = len(reps)
            reps.append(row)
        a.append(block_of[key])
    b: list[int | None] = [None] * M.cols
    if reps:
        cover = np.sum(reps, axis=0)
        if cover.max() > 1:
            return None
        for label, row in enumerate(reps):
            for j in np.nonzero(row)[0]:
                b[int(j)] = label
    return BlockyLabeling(tuple(a), tuple(b))


def iter_blocky(rows: int, cols: int) -> Iterator[BitMatrix]:
    """Every blocky rows x cols matrix exactly once.

    Columns get a restricted-growth labeling over {none, block 1, block 2, ...};
    rows then map onto {none} plus those blocks, hitting every block.
    """

    def col_labelings(j, m, acc):
        if j == cols:
            yield tuple(acc), m
            return
        for v in range(m + 2):  # 0 = none, 1..m existing, m+1 new
            acc.append(v)
            yield from col_labelings(j + 1, max(m, v), acc)
            acc.pop()

    def row_maps(i, m, acc, hit):
        if rows - i < m - len(hit):
            return
        if i == rows:
            yield tuple(acc)
            return
        for v in range(m + 1):
            acc.append(v)
            new = v and v not in hit
            if new:
                hit.add(v)
            yield from row_maps(i + 1, m, acc, hit)
            if new:
                hit.discard(v)
            acc.pop()

    for b, m in col_labelings(0, 0, []):
        bb = np.array(b)
        for a in row_maps(0, m, [], set()):
            aa = np.array(a)
            yield BitMatrix((aa[:, None] == bb[None, :]) & (aa[:, None] > 0))


class QueryClass(Protocol):
    name: str

    def contains(self, M: BitMatrix) -> bool: ...

    def enumerate(self, rows: int, cols: int) -> Iterator[BitMatrix]: ...


class BlockyQueries:
    """The query set of Equality, through its blocky canonical form."""

    name = "blocky"

    def contains(self, M: BitMatrix) -> bool:
        return is_blocky(M) is not None

    def enumerate(self, rows: int, cols: int) -> Iterator[BitMatrix]:
        return iter_blocky(rows, cols)


class FiniteQueries:
    """An explicit list of candidate queries."""

    name = "finite"

    def __init__(self, matrices: Sequence[BitMatrix]):
        self.matrices = list(matrices)

    def contains(self, M: BitMatrix) -> bool:
        return any(np.array_equal(M.entries, q.entries) for q in self.matrices)

    def enumerate(self, rows: int, cols: int) -> Iterator[BitMatrix]:
        return (q for q in self.matrices if q.shape == (rows, cols))


BLOCKY = BlockyQueries()


def _counted(it, budget):
    for count, q in enumerate(it, 1):
        if count > budget:
            raise BudgetExceeded(f"query enumeration exceeded {budget} candidates")
        yield q


def search_reduction(
    target: BitMatrix,
    queries: QueryClass = BLOCKY,
    c: int = 1,
    budget: int = DEFAULT_CANDIDATES,
    allow_c2: bool = False,
    method: str = "auto",
) -> ReductionWitness | None:
    """Exhaustively look for a ``c``-query witness of ``target`` over a query class.

    For c = 1 only f in {identity, negation} can work on a non-constant target, so
    the search reduces to two membership tests (``method="auto"``); ``"enumerate"``
    scans the class instead.  c = 2 needs ``allow_c2=True`` and scans all Q_1 with
    every f against a packed table of all Q_2.  Returns None once the space is
    exhausted; raises BudgetExceeded if it cannot be.
    """
    if c not in (0, 1, 2):
        raise ValueError("c must be 0, 1 or 2")
    T = target.entries
    constant = None if T.size and T.min() != T.max() else int(T.flat[0]) if T.size else 0
    if c == 0:
        return ReductionWitness((), TableFunction((constant,))) if constant is not None else None
    if c == 1:
        return _search_one(target, queries, budget, method, constant)
    if not allow_c2:
        raise ValueError("c = 2 search is gated: pass allow_c2=True and a budget")
    return _search_two(target, queries, budget)


def _search_one(target, queries, budget, method, constant):
    shape = target.shape
    if constant is not None:
        for q in _counted(queries.enumerate(*shape), budget):
            return ReductionWitness((q,), TableFunction((constant, constant)))
        return None
    if method == "auto" and hasattr(queries, "contains"):
        if queries.contains(target):
            return ReductionWitness((target,), TableFunction((0, 1)))
        neg = negate(target)
        if queries.contains(neg):
            return ReductionWitness((neg,), TableFunction((1, 0)))
        return None
    T = target.entries
    for q in _counted(queries.enumerate(*shape), budget):
        if np.array_equal(q.entries, T):
            return ReductionWitness((q,), TableFunction((0, 1)))
        if np.array_equal(q.entries, ~T):
            return ReductionWitness((q,), TableFunction((1, 0)))
    return None


def _pack(M: np.ndarray) -> int:
    return int.from_bytes(np.packbits(M.ravel().astype(np.uint8), bitorder="little").tobytes(), "little")


def _search_two(target, queries, budget):
    shape = target.shape
    members = list(_counted(queries.enumerate(*shape), budget))
    size = shape[0] * shape[1]
    packed = [_pack(q.entries) for q in members]
    wide = size > 64
    arr = None if wide else np.array(packed, dtype=np.uint64)
    t = target.entries.ravel()
    for i, q1 in enumerate(members):
        a = q1.entries.ravel()
        for fidx in range(16):
            f = TableFunction(tuple((fidx >> (3 - p)) & 1 for p in range(4)))
            # allowed Q2 value b at each entry: f(a, b) == t
            ok0 = np.array([f((int(x), 0)) for x in (0, 1)])[a.astype(int)] == t
            ok1 = np.array([f((int(x), 1)) for x in (0, 1)])[a.astype(int)] == t
            if not np.all(ok0 | ok1):
                continue
            must1 = _pack(ok1 & ~ok0)
            must0 = _pack(ok0 & ~ok1)
            if wide:
                hits = [j for j, p in enumerate(packed) if p & must1 == must1 and not p & must0]
            else:
                m1, m0 = np.uint64(must1), np.uint64(must0)
                hits = np.nonzero(((arr & m1) == m1) & ((arr & m0) == 0))[0]
            if len(hits):
                return ReductionWitness((q1, members[int(hits[0])]), f)
    return None


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def dumps_witness(w: ReductionWitness) -> str:
    """``witness c`` header, the f truth table, then each query in matrix text format."""
    parts = [f"witness {w.c}", str(w.table())]
    text = "\n".join(parts) + "\n"
    for q in w.queries:
        text += dumps(q)
    return text


def loads_witness(text: str) -> ReductionWitness:
    lines = text.splitlines()
    head = lines[0].split()
    if len(head) != 2 or head[0] != "witness":
        raise ValueError(f"bad witness header {lines[0]!r}")
    c = int(head[1])
    f = TableFunction.from_string(lines[1])
    if f.arity != c:
        raise ValueError(f"truth table length {len(f.bits)} does not match c = {c}")
    queries, pos = [], 2
    for _ in range(c):
        r, k = (int(v) for v in lines[pos].split()[:2])
        labeled = len(lines[pos].split()) == 3
        span = 1 + r + ((r + k) if labeled else 0)
        queries.append(loads("\n".join(lines[pos : pos + span]) + "\n", partial=False))
        pos += span
    return ReductionWitness(tuple(queries), f)
