"""Threshold Hamming distance in O(k log log N) equality queries.

Both parties share the row set X, the column set Y and k.  A seeded random split
of the coordinates into A and B makes every pair that agrees on one side close
on the other, so a pair equal on one side reduces to a low-diameter instance.
Low-diameter instances are handled by rewriting each string as its set of
differences from a fixed reference string and peeling off the smallest element
of the symmetric difference, located by halving and a Greater-Than subprotocol.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .engine import BOT, PartyView, ProtocolError, Query, Transcript, run_parties
from .equality import gt_party


class PartitionNotFound(RuntimeError):
    pass


def as_bits(s) -> np.ndarray:
    if isinstance(s, str):
        return np.frombuffer(s.encode(), dtype=np.uint8) == ord("1")
    return np.asarray(s, dtype=bool)


def as_set(strings) -> np.ndarray:
    """Deduplicated, lexicographically sorted 2-D bool array of strings."""
    if isinstance(strings, np.ndarray):
        arr = strings.astype(bool)
    else:
        rows = [as_bits(s) for s in strings]
        if not rows:
            raise ValueError("empty string set")
        if len({r.size for r in rows}) > 1:
            raise ValueError("strings of different lengths")
        arr = np.array(rows, dtype=bool)
    if arr.ndim != 2:
        raise ValueError("expected a set of equal-length strings")
    return unique_rows(arr)


def unique_rows(arr: np.ndarray, return_inverse: bool = False):
    """Distinct rows in lexicographic order, compared as packed byte strings."""
    if arr.shape[1] == 0:
        first = arr[: min(1, len(arr))]
        return (first, np.zeros(len(arr), dtype=np.int64)) if return_inverse else first
    packed = np.ascontiguousarray(np.packbits(arr, axis=1))
    flat = packed.view(np.dtype((np.void, packed.shape[1]))).ravel()
    if return_inverse:
        _, idx, inv = np.unique(flat, return_index=True, return_inverse=True)
        return arr[idx], inv.reshape(-1)
    _, idx = np.unique(flat, return_index=True)
    return arr[idx]


def diameter_threshold(N: int) -> float:
    return 3 * math.log2(N) if N > 1 else 0.0


def _pair_distances(G: np.ndarray) -> np.ndarray:
    packed = np.packbits(G, axis=1)
    return np.bitwise_count(packed[:, None, :] ^ packed[None, :, :]).sum(axis=2)


def _side_ok(Z: np.ndarray, same: np.ndarray, other: np.ndarray, thr: float) -> bool:
    if same.size == 0:
        groups = np.zeros(len(Z), dtype=np.int64)
    else:
        _, groups = unique_rows(Z[:, same], return_inverse=True)
    counts = np.bincount(groups)
    for g in np.nonzero(counts > 1)[0]:
        members = Z[groups == g][:, other]
        if _pair_distances(members).max() > thr:
            return False
    return True


def check_partition(Z, A, B, threshold: float | None = None) -> bool:
    """Exhaustive check over all pairs: agreeing on one side means close on the other."""
    Z = as_set(Z)
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if sorted(np.concatenate([A, B]).tolist()) != list(range(Z.shape[1])):
        raise ValueError("A and B must partition the coordinates")
    thr = diameter_threshold(len(Z)) if threshold is None else threshold
    return _side_ok(Z, A, B, thr) and _side_ok(Z, B, A, thr)


def diameter_partition(Z, seed=0, max_tries: int = 16):
    """Uniformly random split [d] = A u B passing check_partition, retried up to max_tries."""
    Z = as_set(Z)
    if len(Z) < 2:
        raise ValueError("need at least two distinct strings")
    rng = np.random.default_rng(seed)
    thr = diameter_threshold(len(Z))
    for _ in range(max_tries):
        mask = rng.integers(0, 2, size=Z.shape[1]).astype(bool)
        A, B = np.nonzero(mask)[0], np.nonzero(~mask)[0]
        if _side_ok(Z, A, B, thr) and _side_ok(Z, B, A, thr):
            return A, B
    raise PartitionNotFound(f"no partition found within {max_tries} tries")


def _key(bits: np.ndarray) -> bytes:
    return bits.tobytes()


def _bdtd_party(role: str, s: np.ndarray, Z: np.ndarray, k: int, bound: float, note: str):
    """One party's side of the low-diameter protocol; Z is sorted and deduplicated."""
    z = Z[0]
    I = np.nonzero((Z != z).any(axis=0))[0]
    rank = {int(i): r for r, i in enumerate(I)}
    S = [int(i) for i in np.nonzero(s != z)[0]]
    L = max(1, math.ceil(math.log2(len(I) + 1)))
    K0 = max(1, math.ceil(bound))
    c = 0
    while True:
        if (yield Query(tuple(S), f"{note} sets {c}")):
            return c
        if c >= k:
            return BOT
        c += 1
        Sp, K = S, K0
        while K > 1:
            K = math.ceil(K / 2)
            S1, S2 = Sp[:K], Sp[K:]
            same = yield Query(tuple(S1), f"{note} half {c}/{K}")
            Sp = S2 if same else S1
        if len(Sp) > 1:
            raise ProtocolError("difference set exceeded the diameter bound")
        # An empty side ranks after every index, so the comparison settles who holds
        # the smallest difference without either party learning the other's size.
        mine = rank[Sp[0]] if Sp else len(I)
        alice_first = yield from gt_party(role, mine, L, f"{note} gt {c}")
        if not Sp and alice_first and role == "alice":
            # [|I| <= b] forces b = |I|: both sides empty, yet the sets differed
            raise ProtocolError("both difference sets empty after an unequal comparison")
        if Sp and ((role == "alice") == bool(alice_first)):
            S = [i for i in S if i != Sp[0]]


def bounded_diameter_threshold(Z, x, y, k: int, bound: float | None = None, debug: bool = False):
    """dist(x, y) if at most k, else BOT, for x, y in a set of small diameter."""
    Zs = as_set(Z)
    xb, yb = as_bits(x), as_bits(y)
    if bound is None:
        bound = diameter_threshold(len(Zs))
    if debug:
        members = {_key(r) for r in Zs}
        if _key(xb) not in members or _key(yb) not in members:
            raise ValueError("inputs must belong to Z")
        if len(Zs) > 1 and _pair_distances(Zs).max() > bound:
            raise ValueError("diameter precondition violated")

    def program(view: PartyView):
        return (yield from _bdtd_party(view.role, view.input, Zs, k, bound, "bd"))

    return run_parties(program, xb, yb, shared=(Zs, k))


@dataclass
class _Level:
    """One node of the recursion: its coordinates, projected set and split."""

    coords: np.ndarray
    Z: np.ndarray
    a: np.ndarray  # positions within coords
    b: np.ndarray
    bound: float
    fibres: dict = field(default_factory=dict)


@dataclass
class ThresholdInstance:
    """Shared data of one threshold-distance matrix: its row and column sets.

    Recursion levels are named by their path ("", "A", "AB", ...) and cached, so
    many runs over one instance pay for each split only once.
    """

    X: np.ndarray
    Y: np.ndarray
    seed: int = 0
    max_tries: int = 16
    Z: np.ndarray = field(init=False)
    _levels: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.X = as_set(self.X)
        self.Y = as_set(self.Y)
        if self.X.shape[1] != self.Y.shape[1]:
            raise ValueError("X and Y have different dimensions")
        self.Z = unique_rows(np.vstack([self.X, self.Y]))

    @property
    def d(self) -> int:
        return self.Z.shape[1]

    def level(self, path: str) -> _Level:
        if path not in self._levels:
            if path:
                parent = self.level(path[:-1])
                coords = parent.coords[parent.a if path[-1] == "A" else parent.b]
            else:
                coords = np.arange(self.d)
            Z = unique_rows(self.Z[:, coords])
            seed = [self.seed, zlib.crc32(path.encode())]
            a, b = diameter_partition(Z, seed, self.max_tries) if len(Z) > 1 else (coords[:0], coords[:0])
            self._levels[path] = _Level(coords, Z, a, b, diameter_threshold(len(Z)))
        return self._levels[path]

    def partition(self, path: str = ""):
        """The split (A, B) of the coordinates used at recursion level ``path``."""
        lv = self.level(path)
        return lv.coords[lv.a], lv.coords[lv.b]

    def residual(self, path: str, side: str, value: np.ndarray) -> np.ndarray:
        """Sorted distinct z restricted to the other side, over z agreeing with ``value`` on ``side``."""
        lv = self.level(path)
        same, other = (lv.a, lv.b) if side == "A" else (lv.b, lv.a)
        if side not in lv.fibres:
            rows, inv = unique_rows(lv.Z[:, same], return_inverse=True)
            lv.fibres[side] = {_key(r): [np.nonzero(inv == g)[0], None] for g, r in enumerate(rows)}
        entry = lv.fibres[side][_key(value)]
        if entry[1] is None:
            entry[1] = unique_rows(lv.Z[entry[0]][:, other])
        return entry[1]


def _td_party(role: str, s: np.ndarray, inst: ThresholdInstance, k: int, path: str):
    lv = inst.level(path)
    mine = s[lv.coords]
    if (yield Query(_key(mine), f"{path} eq")):
        return 0
    if k == 0:
        return BOT
    for same, other, tag in ((lv.a, lv.b, "A"), (lv.b, lv.a, "B")):
        if (yield Query(_key(mine[same]), f"{path} eq{tag}")):
            # the other side differs, since the whole strings differ
            Zs = inst.residual(path, tag, mine[same])
            return (yield from _bdtd_party(role, mine[other], Zs, k, lv.bound, f"{path} bd{tag}"))
    t = yield from _td_party(role, s, inst, k - 1, path + "A")
    if t is BOT:
        return BOT
    r = yield from _td_party(role, s, inst, k - t, path + "B")
    return BOT if r is BOT else t + r


def td_program(inst: ThresholdInstance, k: int):
    def program(view: PartyView):
        return (yield from _td_party(view.role, view.input, inst, k, ""))

    return program


def threshold_distance(X, Y, x, y, k: int, seed: int = 0, instance: ThresholdInstance | None = None):
    """dist(x, y) if at most k, else BOT, for x in X and y in Y.

    Pass a prebuilt ``instance`` to reuse its cached partitions across many inputs.
    """
    inst = instance or ThresholdInstance(X, Y, seed)
    xb, yb = as_bits(x), as_bits(y)
    if xb.size != inst.d or yb.size != inst.d:
        raise ValueError("input length does not match the instance dimension")
    return run_parties(td_program(inst, k), xb, yb, shared=inst)


def brute_threshold(x, y, k: int):
    dist = int(np.count_nonzero(as_bits(x) != as_bits(y)))
    return dist if dist <= k else BOT


def query_budget(N: int, k: int) -> int:
    """Analytic d-free upper bound on threshold_distance queries for |X u Y| = N.

    Each recursion node spends at most three equality queries and the recursion
    has at most 2k+1 nodes; each low-diameter run costs per found difference one
    set comparison, ceil(log2 K0) halvings and a Greater-Than over at most
    N * K0 + 1 ranks, plus a final comparison.
    """
    if N < 2:
        return 1
    K0 = max(1, math.ceil(diameter_threshold(N)))
    halvings = math.ceil(math.log2(K0)) if K0 > 1 else 0
    L = max(1, math.ceil(math.log2(N * K0 + 1)))
    gt = math.ceil(math.log2(L + 1)) + 1
    return 3 * (2 * k + 1) + (k + 1) + k * (halvings + gt)


def planted_instance(rng: np.random.Generator, size: int, d: int, near: float = 0.5, max_flips: int = 6):
    """Random X plus a Y in which a ``near`` fraction are small perturbations of X rows."""
    X = rng.integers(0, 2, size=(size, d)).astype(bool)
    Y = rng.integers(0, 2, size=(size, d)).astype(bool)
    for i in range(size):
        if rng.random() < near:
            Y[i] = X[i]
            flips = rng.choice(d, size=int(rng.integers(0, max_flips + 1)), replace=False)
            Y[i, flips] ^= True
    return X, Y
