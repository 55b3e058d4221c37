"""Homogeneous subsets under colorings of small subsets, and query invariantization.

``find_homogeneous`` searches for a set T whose subsets of each size up to alpha
all receive the same color.  ``extract_invariant_queries`` uses it to pick
coordinates T of {0,1}^N such that queries restricted to strings living on T
(with every other coordinate fixed to a bit ``a``) stop distinguishing where the
``aa`` dominoes sit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .domino import domino_set, is_shuffle_invariant
from .matrix import DEFAULT_BUDGET, BitMatrix, BudgetExceeded
from .problems import bitstrings


class NoHomogeneousSet(LookupError):
    """The exhaustive search found no homogeneous set at this ground size."""


@dataclass
class SubsetColoring:
    """Coloring of the nonempty subsets of range(N) with at most ``alpha`` elements.

    ``color`` is a callable on sorted index tuples or a mapping keyed by them.
    Raw colors are canonicalized to 0, 1, 2, ... in first-seen order.  The empty
    set is a single subset, so it never affects homogeneity and is not colored.
    """

    N: int
    alpha: int
    color: Callable[[tuple[int, ...]], Hashable] | Mapping[tuple[int, ...], Hashable]
    _canon: dict = field(default_factory=dict, init=False, repr=False)
    _memo: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.alpha < 1 or self.N < 0:
            raise ValueError("need N >= 0 and alpha >= 1")
        if isinstance(self.color, Mapping):
            table = {tuple(sorted(k)): v for k, v in self.color.items()}
            for s in range(1, self.alpha + 1):
                for S in combinations(range(self.N), s):
                    if S not in table:
                        raise ValueError(f"coloring undefined on subset {S}")
            self.color = table

    @property
    def beta(self) -> int:
        """Number of distinct colors seen so far."""
        return len(self._canon)

    def __call__(self, S: Sequence[int]) -> int:
        S = tuple(S)
        if S not in self._memo:
            raw = self.color[S] if isinstance(self.color, dict) else self.color(S)
            self._memo[S] = self._canon.setdefault(raw, len(self._canon))
        return self._memo[S]


def is_homogeneous(coloring: SubsetColoring, T: Iterable[int]) -> bool:
    """Independent check: every level s <= alpha of T is monochromatic."""
    T = sorted(T)
    for s in range(1, coloring.alpha + 1):
        if len({coloring(S) for S in combinations(T, s)}) > 1:
            return False
    return True


def find_homogeneous(coloring: SubsetColoring, sigma: int, budget: int = DEFAULT_BUDGET) -> tuple[int, ...] | None:
    """A size-``sigma`` set homogeneous at every level up to alpha, or None.

    T is grown in increasing order.  The first subset of each size fixes that
    level's color and every later subset containing the new element must match
    it, so a branch dies as soon as it breaks homogeneity.  The search is
    exhaustive; running out of ``budget`` color lookups raises BudgetExceeded.
    """
    if sigma < coloring.alpha:
        raise ValueError("sigma must be at least alpha")
    N, alpha = coloring.N, coloring.alpha
    refs: dict[int, int] = {}
    T: list[int] = []
    lookups = 0

    def extend(start: int) -> bool:
        nonlocal lookups
        if len(T) == sigma:
            return True
        for e in range(start, N - (sigma - len(T)) + 1):
            fixed, ok = [], True
            for s in range(1, min(alpha, len(T) + 1) + 1):
                for C in combinations(T, s - 1):
                    lookups += 1
                    if lookups > budget:
                        raise BudgetExceeded(f"homogeneous search exceeded {budget} color lookups")
                    c = coloring(C + (e,))
                    if s not in refs:
                        refs[s] = c
                        fixed.append(s)
                    elif refs[s] != c:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                T.append(e)
                if extend(e + 1):
                    return True
                T.pop()
            for s in fixed:
                del refs[s]
        return False

    if not extend(0):
        return None
    result = tuple(T)
    if not is_homogeneous(coloring, result):
        raise AssertionError(f"search returned a non-homogeneous set {result}")
    return result


# ---------------------------------------------------------------------------
# Embedding into a larger cube
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddingPhi:
    """Write an n-bit string into positions T of an N-bit string, filling the rest with ``a``."""

    N: int
    T: tuple[int, ...]
    a: int

    def __post_init__(self):
        T = tuple(int(t) for t in self.T)
        if list(T) != sorted(set(T)) or (T and not (0 <= T[0] and T[-1] < self.N)):
            raise ValueError("T must be increasing indices inside range(N)")
        if self.a not in (0, 1):
            raise ValueError("fill bit must be 0 or 1")
        object.__setattr__(self, "T", T)

    @property
    def n(self) -> int:
        return len(self.T)


def embed_phi(x: str, phi: EmbeddingPhi) -> str:
    if len(x) != phi.n:
        raise ValueError(f"expected {phi.n} bits, got {len(x)}")
    out = [str(phi.a)] * phi.N
    for pos, bit in zip(phi.T, x):
        out[pos] = bit
    return "".join(out)


# ---------------------------------------------------------------------------
# Query extraction
# ---------------------------------------------------------------------------

Query2 = Callable[[str, str], int]


def _as_callable(q) -> Query2:
    if isinstance(q, BitMatrix):
        if not q.labeled:
            raise ValueError("queries must be labeled by their strings")
        return lambda u, v: int(q.at(u, v))
    return lambda u, v: int(q(u, v))


def tabulate(q: Query2, n: int) -> BitMatrix:
    """Labeled 2^n x 2^n matrix of a query given as a function of two strings."""
    labels = bitstrings(n)
    arr = np.array([[q(u, v) for v in labels] for u in labels], dtype=bool)
    return BitMatrix(arr, tuple(labels), tuple(labels))


def signature_order(a: int) -> tuple[str, str, str]:
    """Domino alphabet for the coloring: the complement of aa, then 10, then 01."""
    b = str(1 - a)
    return (b + b, "10", "01")


def subset_color(queries: Sequence[Query2], N: int, a: int, S: Sequence[int]) -> tuple[int, ...]:
    """Concatenated answers of all queries on every signature written into S (rest aa)."""
    D = signature_order(a)
    out = []
    for d in product(D, repeat=len(S)):
        u = [str(a)] * N
        v = [str(a)] * N
        for pos, dom in zip(S, d):
            u[pos], v[pos] = dom[0], dom[1]
        U, V = "".join(u), "".join(v)
        out.extend(q(U, V) for q in queries)
    return tuple(out)


@dataclass
class Extraction:
    T: tuple[int, ...]
    phi: EmbeddingPhi
    queries: list[BitMatrix]
    f_agrees: bool | None = None


def extract_invariant_queries(
    queries: Sequence,
    n: int,
    delta: Iterable[str] | str,
    a: int,
    N: int | None = None,
    f: Callable[[Sequence[int]], int] | None = None,
    k: int | None = None,
    budget: int = DEFAULT_BUDGET,
) -> Extraction:
    """Restrict Δ-shuffle invariant queries on {0,1}^N to an n-dimensional copy on which
    they become (Δ ∪ {aa})-shuffle invariant.

    ``queries`` are labeled BitMatrix objects over all N-bit strings or functions of
    two N-bit strings.  When ``f`` and ``k`` are given, also checks that f over the
    restricted queries equals the exact-k-distance matrix on n bits.
    """
    delta = domino_set(delta)
    if N is None:
        if not queries or not isinstance(queries[0], BitMatrix):
            raise ValueError("N is required for function queries")
        N = len(queries[0].row_labels[0])
    if n > 3 or N > 12:
        raise ValueError("micro scale only: n <= 3 and N <= 12")
    calls = [_as_callable(q) for q in queries]
    for i, (raw, q) in enumerate(zip(queries, calls)):
        M = raw if isinstance(raw, BitMatrix) else tabulate(q, N) if N <= 10 else None
        if M is not None and not is_shuffle_invariant(M, delta):
            raise ValueError(f"query {i} is not shuffle invariant for {sorted(delta)}")

    coloring = SubsetColoring(N, n, lambda S: subset_color(calls, N, a, S))
    T = find_homogeneous(coloring, n, budget)
    if T is None:
        raise NoHomogeneousSet(f"no homogeneous set of size {n} at N = {N}")
    phi = EmbeddingPhi(N, T, a)
    restricted = [tabulate(lambda x, y, q=q: q(embed_phi(x, phi), embed_phi(y, phi)), n) for q in calls]

    wider = delta | {f"{a}{a}"}
    for i, M in enumerate(restricted):
        if not is_shuffle_invariant(M, wider):
            raise AssertionError(f"restricted query {i} is not shuffle invariant for {sorted(wider)}")

    agrees = None
    if f is not None and k is not None:
        labels = bitstrings(n)
        agrees = all(
            int(f(tuple(int(M.entries[i, j]) for M in restricted)))
            == int(sum(p != q for p, q in zip(x, y)) == k)
            for i, x in enumerate(labels)
            for j, y in enumerate(labels)
        )
    return Extraction(T, phi, restricted, agrees)


def read_coloring(text: str, N: int | None = None) -> SubsetColoring:
    """Parse lines ``i j ... color`` (0-based indices, color last); '#' starts a comment."""
    table = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        *idx, color = line.split()
        S = tuple(sorted(int(i) for i in idx))
        if not S:
            continue
        table[S] = color
    if not table:
        raise ValueError("empty coloring")
    N = N if N is not None else 1 + max(max(S) for S in table)
    alpha = max(len(S) for S in table)
    return SubsetColoring(N, alpha, table)
