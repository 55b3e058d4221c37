"""Dominoes, tallies, Δ-types, shuffle invariance and two-tally verification.

A domino is written as the two-character string ``x_i + y_i``: "00", "01", "10", "11".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .matrix import STAR, AnyMatrix, BitMatrix, as_partial

DOMINOES = ("00", "01", "10", "11")
ALL = frozenset(DOMINOES)


def domino_set(spec: Iterable[str] | str) -> frozenset[str]:
    """Parse ``"01,10"``, ``"all"``, ``""`` or an iterable of dominoes."""
    if isinstance(spec, str):
        spec = spec.strip()
        if spec.lower() in ("all", "full"):
            return ALL
        spec = [s for s in spec.replace(" ", ",").split(",") if s]
    out = frozenset(spec)
    bad = out - ALL
    if bad:
        raise ValueError(f"not dominoes: {sorted(bad)}")
    return out


class Tally(NamedTuple):
    t00: int
    t01: int
    t10: int
    t11: int


@dataclass(frozen=True)
class DeltaType:
    signature: tuple[str, ...]
    tally: Tally


def dominoes(x: str, y: str) -> list[str]:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    return [a + b for a, b in zip(x, y)]


def tally(x: str, y: str) -> Tally:
    seq = dominoes(x, y)
    return Tally(*(seq.count(d) for d in DOMINOES))


def delta_type(x: str, y: str, delta: Iterable[str]) -> DeltaType:
    """Signature (dominoes in ``delta``, in position order) together with the full tally."""
    delta = domino_set(delta)
    seq = dominoes(x, y)
    return DeltaType(tuple(d for d in seq if d in delta), Tally(*(seq.count(d) for d in DOMINOES)))


# ---------------------------------------------------------------------------
# Shuffle invariance
# ---------------------------------------------------------------------------


def _codes(labels) -> np.ndarray:
    return np.array([int(s, 2) if s else 0 for s in labels], dtype=np.int64)


def type_keys(row_labels, col_labels, delta: Iterable[str]) -> np.ndarray:
    """Integer key of the Δ-type for every (row, col) label pair, shape (rows, cols).

    Two pairs share a key iff their Δ-types agree: the signature is packed in base 4
    behind a leading 1 (so its length is implicit) and the tally fills the low bits.
    """
    delta = domino_set(delta)
    n = len(row_labels[0]) if len(row_labels) else 0
    if n > 12:
        raise ValueError("shuffle keys support n <= 12")
    x = _codes(row_labels)[:, None]
    y = _codes(col_labels)[None, :]
    sig = np.ones((x.shape[0], y.shape[1]), dtype=np.int64)
    for p in range(n - 1, -1, -1):
        xb = (x >> p) & 1
        yb = (y >> p) & 1
        code = 2 * xb + yb
        inside = np.zeros_like(sig, dtype=bool)
        for d in delta:
            inside |= code == int(d, 2)
        sig = np.where(inside, sig * 4 + code, sig)
    t11 = np.bitwise_count(x & y).astype(np.int64)
    t10 = np.bitwise_count(x & ~y & ((1 << n) - 1)).astype(np.int64)
    t01 = np.bitwise_count(~x & y & ((1 << n) - 1)).astype(np.int64)
    return (sig << 12) | (t11 << 8) | (t10 << 4) | t01


def find_shuffle_violation(Q: BitMatrix, delta: Iterable[str]):
    """First quadruple (x, y, u, v) with equal complement-Δ types but Q(x,y) != Q(u,v).

    Pairs are scanned in label order (rows then columns, both sorted); the reported
    (x, y) is the first pair of the offending type class and (u, v) the first pair
    of that class disagreeing with it.  Returns None when Q is Δ-shuffle invariant.
    """
    if not Q.labeled:
        raise ValueError("shuffle invariance needs a fully labeled matrix")
    complement = ALL - domino_set(delta)
    r_order = sorted(range(Q.rows), key=lambda i: Q.row_labels[i])
    c_order = sorted(range(Q.cols), key=lambda j: Q.col_labels[j])
    rl = [Q.row_labels[i] for i in r_order]
    cl = [Q.col_labels[j] for j in c_order]
    vals = Q.entries[np.ix_(r_order, c_order)].ravel()
    keys = type_keys(rl, cl, complement).ravel()
    _, first_idx, inverse = np.unique(keys, return_index=True, return_inverse=True)
    bad = np.nonzero(vals != vals[first_idx[inverse]])[0]
    if bad.size == 0:
        return None
    pos = int(bad[0])
    ref = int(first_idx[inverse[pos]])
    nc = len(cl)
    return (rl[ref // nc], cl[ref % nc], rl[pos // nc], cl[pos % nc])


def is_shuffle_invariant(Q: BitMatrix, delta: Iterable[str]) -> bool:
    return find_shuffle_violation(Q, delta) is None


# ---------------------------------------------------------------------------
# Two-tally matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoTallyReport:
    agrees_with_ehd: bool
    shared_tallies: bool
    violation: str | None = None
    one_tally: Tally | None = None
    zero_tally: Tally | None = None

    @property
    def passed(self) -> bool:
        return self.agrees_with_ehd and self.shared_tallies

    def __bool__(self):
        return self.passed


def verify_two_tally(M: AnyMatrix, k: int) -> TwoTallyReport:
    """Check that ``M`` is a two-tally matrix of EHD_k on its labels.

    Condition (1): each defined entry equals [dist(x, y) == k].
    Condition (2): all 1-entries share one tally, and all 0-entries share one tally.
    """
    P = as_partial(M)
    if not P.labeled:
        raise ValueError("two-tally verification needs row and column labels")
    cond1 = cond2 = True
    first = None
    seen: dict[int, tuple[Tally, str, str]] = {}
    for i, x in enumerate(P.row_labels):
        for j, y in enumerate(P.col_labels):
            v = int(P.entries[i, j])
            if v == STAR:
                continue
            dist = sum(a != b for a, b in zip(x, y))
            if int(dist == k) != v:
                cond1 = False
                first = first or f"entry ({x}, {y}) = {v} but dist = {dist}"
            t = tally(x, y)
            if v not in seen:
                seen[v] = (t, x, y)
            elif seen[v][0] != t:
                cond2 = False
                _, x0, y0 = seen[v]
                first = first or f"{v}-entries ({x0}, {y0}) and ({x}, {y}) have different tallies"
    return TwoTallyReport(
        cond1,
        cond2,
        first,
        seen[1][0] if 1 in seen else None,
        seen[0][0] if 0 in seen else None,
    )
