"""Structural analysers: VC dimension and the largest Greater-Than subproblem."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix import DEFAULT_BUDGET, BitMatrix, BudgetExceeded, Embedding, contains_pattern, negate
from .problems import gen_gt


def shattered_columns(M: BitMatrix, cap: int = 20, budget: int = DEFAULT_BUDGET) -> tuple[int, ...]:
    """A largest set of columns (size <= cap) shattered by the rows of ``M``.

    Shattered sets are closed under taking subsets, so sets are grown level by
    level and a candidate is kept only if every one-smaller subset survived the
    previous level.
    """
    if cap > 20:
        raise ValueError("cap must be <= 20")
    if M.rows == 0 or M.cols == 0:
        return ()
    arr = np.unique(M.entries, axis=0)  # duplicate rows never help
    _, first = np.unique(arr.T, axis=0, return_index=True)
    col_ids = np.sort(first)  # duplicate columns cannot be shattered together
    cols = arr[:, col_ids].astype(np.int64)
    max_d = min(cap, int(np.floor(np.log2(arr.shape[0]))))
    checks = 0

    level: dict[tuple[int, ...], np.ndarray] = {}
    for j in range(cols.shape[1]):
        if 0 < cols[:, j].sum() < cols.shape[0]:
            level[(j,)] = cols[:, j]
    if not level or max_d < 1:
        return ()
    singles = set(level)
    best = next(iter(level))
    d = 1
    while d < max_d and level:
        nxt: dict[tuple[int, ...], np.ndarray] = {}
        for S, codes in level.items():
            for c in range(S[-1] + 1, cols.shape[1]):
                if (c,) not in singles:
                    continue
                T = S + (c,)
                if any(T[:i] + T[i + 1 :] not in level for i in range(d)):
                    continue
                checks += 1
                if checks > budget:
                    raise BudgetExceeded(f"VC search exceeded {budget} shattering checks")
                new = codes | (cols[:, c] << d)
                if np.unique(new).size == 2 ** (d + 1):
                    nxt[T] = new
        if not nxt:
            break
        level = nxt
        d += 1
        best = next(iter(level))
    return tuple(int(col_ids[j]) for j in best)


def vc_dimension(M: BitMatrix, cap: int = 20, budget: int = DEFAULT_BUDGET) -> int:
    """Largest d <= cap such that some d columns are shattered by the rows."""
    return len(shattered_columns(M, cap, budget))


@dataclass(frozen=True)
class GtReport:
    max_gt: int
    max_negated_gt: int
    gt_witness: Embedding | None
    negated_witness: Embedding | None
    cap: int

    @property
    def gt_at_cap(self) -> bool:
        return self.max_gt >= self.cap

    @property
    def negated_at_cap(self) -> bool:
        return self.max_negated_gt >= self.cap


def _largest(M: BitMatrix, pattern_for, cap, budget):
    best, witness = 0, None
    for t in range(1, cap + 1):
        emb = contains_pattern(M, pattern_for(t), budget=budget)
        if emb is None:
            break
        best, witness = t, emb
    return best, witness


def max_gt_size(M: BitMatrix, cap: int = 8, budget: int = DEFAULT_BUDGET) -> GtReport:
    """Largest t <= cap with GT_t (and separately NOT GT_t) embedded in ``M``.

    GT_t has pairwise distinct rows and columns, so an embedding never reuses an
    index and no distinctness flag is needed.  A value equal to ``cap`` means "at
    least cap".
    """
    gt, gw = _largest(M, gen_gt, cap, budget)
    ngt, nw = _largest(M, lambda t: negate(gen_gt(t)), cap, budget)
    return GtReport(gt, ngt, gw, nw, cap)


def is_stable_upto(M: BitMatrix, t: int, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff neither GT_t nor NOT GT_t embeds in ``M``."""
    report = max_gt_size(M, cap=t, budget=budget)
    return report.max_gt < t and report.max_negated_gt < t


def max_shared_ones(M: BitMatrix) -> int:
    """Largest number of columns where two distinct rows both have a 1.

    Counts row pairs column by column, which is cheap for sparse matrices.  A
    2 x t all-ones pattern with distinct indices embeds iff this is at least t.
    """
    counts: dict[int, int] = {}
    best = 0
    R = M.rows
    for col in M.entries.T:
        rows = np.nonzero(col)[0]
        if rows.size < 2:
            continue
        i, j = np.triu_indices(rows.size, 1)
        keys = rows[i].astype(np.int64) * R + rows[j]
        for key in keys.tolist():
            c = counts.get(key, 0) + 1
            counts[key] = c
            if c > best:
                best = c
    return best
