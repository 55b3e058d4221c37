"""Equality-oracle protocols for Greater-Than and a naive threshold distance."""

from __future__ import annotations

import math

from .engine import BOT, PartyView, Query, Transcript, run_parties


def gt_bits(N: int) -> int:
    """Bits needed to write 0..N-1."""
    return max(0, math.ceil(math.log2(N))) if N > 1 else 0


def gt_bound(N: int) -> int:
    """Worst-case query budget ceil(log2 ceil(log2 N)) + 2 of the prefix search."""
    L = gt_bits(N)
    return (math.ceil(math.log2(L)) if L > 1 else 0) + 2


def gt_party(role: str, value: int, L: int, note: str = "gt"):
    """One party's side of [a <= b] for L-bit values a (Alice) and b (Bob).

    Binary search for the longest common prefix, then one query reveals Alice's
    bit at the first difference (Bob queries the constant 0).
    """
    lo, hi = 0, L  # prefixes of length lo agree; the longest common prefix is <= hi
    while lo < hi:
        mid = (lo + hi + 1) // 2
        same = yield Query(value >> (L - mid), f"{note} prefix {mid}")
        if same:
            lo = mid
        else:
            hi = mid - 1
    if lo == L:
        return 1
    bit = (value >> (L - lo - 1)) & 1
    return (yield Query(bit if role == "alice" else 0, f"{note} bit"))


def eq_gt_protocol(N: int, i: int, j: int) -> tuple[int, Transcript]:
    """GT_N(i, j) = [i <= j] for 1 <= i, j <= N using equality queries only."""
    if not (1 <= i <= N and 1 <= j <= N):
        raise ValueError(f"inputs must lie in 1..{N}")
    L = gt_bits(N)

    def program(view: PartyView):
        return (yield from gt_party(view.role, view.input - 1, L))

    return run_parties(program, i, j, shared=N)


def _naive_party(view: PartyView):
    s, k = view.input, view.shared
    n = len(s)
    pos = c = 0
    while True:
        if (yield Query(s[pos:], f"suffix {pos}")):
            return c
        if c == k:
            return BOT
        lo, hi = pos + 1, n  # smallest m with s[pos:m] differing
        while lo < hi:
            mid = (lo + hi) // 2
            if (yield Query(s[pos:mid], f"range {pos}:{mid}")):
                lo = mid + 1
            else:
                hi = mid
        c += 1
        pos = lo


def naive_thd_protocol(n: int, k: int, x: str, y: str):
    """dist(x, y) if it is at most k, else BOT, by repeatedly locating the first difference."""
    if len(x) != n or len(y) != n:
        raise ValueError(f"inputs must have length {n}")
    return run_parties(_naive_party, x, y, shared=k)
