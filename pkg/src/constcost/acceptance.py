"""Acceptance suite: nine end-to-end checks, each reported as one pass/fail line."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from .domino import ALL, find_shuffle_violation, is_shuffle_invariant, type_keys, verify_two_tally
from .matrix import STAR, BitMatrix, PartialMatrix, contains_pattern
from .problems import (
    bitstrings,
    gen_ehd,
    gen_ehd2_gadget,
    gen_equality,
    gen_gt,
    gen_iip,
    gen_shattered_two_tally,
    hamming,
)
from .protocol import (
    ThresholdInstance,
    check_partition,
    diameter_partition,
    eq_gt_protocol,
    eval_protocol,
    flatten_protocol,
    naive_thd_protocol,
    random_tree,
    threshold_distance,
)
from .protocol.equality import gt_bits, gt_bound
from .protocol.threshold import brute_threshold, planted_instance, query_budget
from .ramsey import SubsetColoring, extract_invariant_queries, find_homogeneous
from .reduction import BLOCKY, ReductionWitness, TableFunction, is_blocky, search_reduction, verify_witness
from .structure import max_gt_size, max_shared_ones, vc_dimension

SCALING_CONSTANT = 8.0
"""Documented bound on max queries / ((k + 1) log2 log2 N) for threshold_distance."""

SCALING_SIZES = (64, 256, 1024, 4096)
SCALING_SEEDS = {64: 6, 256: 4, 1024: 3, 4096: 1}
SCALING_KS = (1, 2, 3, 4)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool = True
    notes: list[str] = field(default_factory=list)
    seconds: float = 0.0

    def check(self, ok: bool, note: str):
        if not ok:
            self.passed = False
            self.notes.append("FAILED: " + note)
        else:
            self.notes.append(note)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number}. {self.title} ({self.seconds:.1f}s): " + "; ".join(self.notes)


# ---------------------------------------------------------------------------
# 1. threshold_distance correctness
# ---------------------------------------------------------------------------


def _exhaustive_instances():
    cube = np.array([[c == "1" for c in s] for s in bitstrings(5)])
    yield "cube5", cube, cube
    for d in (8, 12, 16):
        for seed in range(3):
            rng = np.random.default_rng([d, seed])
            X, Y = planted_instance(rng, 16, d, near=0.75, max_flips=4)
            yield f"planted d={d} s={seed}", X, Y
        # a tight cluster: everything within a small ball, so the low-diameter branch dominates
        rng = np.random.default_rng([d, 99])
        center = rng.integers(0, 2, d).astype(bool)
        pts = np.repeat(center[None, :], 32, axis=0)
        for row in pts[1:]:
            row[rng.choice(d, size=int(rng.integers(1, 5)), replace=False)] ^= True
        yield f"cluster d={d}", pts[:16], pts[16:]


def criterion_protocol_correctness() -> CriterionResult:
    res = CriterionResult(1, "threshold_distance matches the brute-force rule")
    start = time.perf_counter()
    runs = bad = 0
    for name, X, Y in _exhaustive_instances():
        inst = ThresholdInstance(X, Y, seed=0)
        if len(inst.Z) > 32 or inst.d > 16:
            res.check(False, f"{name} exceeds the exhaustive caps")
            continue
        for x in inst.X:
            for y in inst.Y:
                for k in range(4):
                    out, _ = threshold_distance(None, None, x, y, k, instance=inst)
                    runs += 1
                    bad += out != brute_threshold(x, y, k)
    res.check(bad == 0, f"exhaustive: {runs} runs, {bad} mismatches")

    runs = bad = 0
    for seed in range(20):
        for d in (64, 256, 1024):
            rng = np.random.default_rng([seed, d])
            X, Y = planted_instance(rng, 64, d)
            inst = ThresholdInstance(X, Y, seed=seed)
            for _ in range(167):
                if rng.random() < 0.6:
                    i = int(rng.integers(64))
                    x, y = X[i], Y[i]
                else:
                    x, y = X[int(rng.integers(64))], Y[int(rng.integers(64))]
                k = int(rng.integers(0, 5))
                out, _ = threshold_distance(None, None, x, y, k, instance=inst)
                runs += 1
                bad += out != brute_threshold(x, y, k)
    res.seconds = time.perf_counter() - start
    res.check(runs >= 10_000 and bad == 0, f"random: {runs} trials, {bad} mismatches")
    res.check(res.seconds < 120, f"runtime {res.seconds:.1f}s < 120s")
    return res


# ---------------------------------------------------------------------------
# 2. query scaling
# ---------------------------------------------------------------------------


def gt_worst_cases(max_n: int = 512) -> dict[int, int]:
    """Worst query count per bit length L, over all pairs in 1..2^L, checking outputs.

    The protocol reads N only through L = ceil(log2 N) and the answer [i <= j] does
    not depend on N, so all pairs at N = 2^L cover every N with that bit length.
    """
    worst = {}
    for L in range(gt_bits(max_n) + 1):
        size = 2**L
        w = 0
        for i in range(1, size + 1):
            for j in range(1, size + 1):
                out, tr = eq_gt_protocol(size, i, j)
                if out != int(i <= j):
                    raise AssertionError(f"GT protocol wrong at N={size}, ({i}, {j})")
                w = max(w, len(tr))
        worst[L] = w
    return worst


def td_scaling(sizes=SCALING_SIZES, seeds=SCALING_SEEDS, ks=SCALING_KS) -> dict[int, dict[int, int]]:
    """Max threshold_distance queries per (N, k) on planted instances with d = 4N.

    Every row of Y is a perturbation (at most 6 flips) of the matching row of X and
    every planted pair is run, so each instance exercises the low-diameter branch.
    """
    out = {}
    for N in sizes:
        best = {k: 0 for k in ks}
        for seed in range(seeds.get(N, 1)):
            rng = np.random.default_rng([N, seed])
            X, Y = planted_instance(rng, N // 2, 4 * N, near=1.0, max_flips=6)
            inst = ThresholdInstance(X, Y, seed=seed)
            for i in range(N // 2):
                for k in ks:
                    res, tr = threshold_distance(None, None, X[i], Y[i], k, instance=inst)
                    if res != brute_threshold(X[i], Y[i], k):
                        raise AssertionError(f"threshold_distance wrong at N={N}, pair {i}, k={k}")
                    best[k] = max(best[k], len(tr))
        out[N] = best
    return out


def d_comparison(dims=(64, 4096), size: int = 32, seeds: int = 4, ks=(1, 2, 3)):
    """Max queries of the naive and the threshold protocol at equal |X u Y| and varying d."""
    naive, td, sizes = {}, {}, {}
    for d in dims:
        naive[d], td[d] = 0, 0
        for seed in range(seeds):
            rng = np.random.default_rng([size, seed])
            X, Y = planted_instance(rng, size, d, near=1.0, max_flips=6)
            inst = ThresholdInstance(X, Y, seed=seed)
            sizes[d] = max(sizes.get(d, 0), len(inst.Z))
            for i in range(size):
                xs = "".join("1" if b else "0" for b in X[i])
                ys = "".join("1" if b else "0" for b in Y[i])
                for k in ks:
                    r1, t1 = naive_thd_protocol(d, k, xs, ys)
                    r2, t2 = threshold_distance(None, None, X[i], Y[i], k, instance=inst)
                    want = brute_threshold(X[i], Y[i], k)
                    if r1 != want or r2 != want:
                        raise AssertionError("protocol output disagrees with the brute-force rule")
                    naive[d] = max(naive[d], len(t1))
                    td[d] = max(td[d], len(t2))
    return naive, td, sizes


def criterion_query_scaling() -> CriterionResult:
    res = CriterionResult(2, "query scaling")
    start = time.perf_counter()
    worst = gt_worst_cases(512)
    over = [N for N in range(1, 513) if worst[gt_bits(N)] > gt_bound(N)]
    res.check(not over, f"GT worst per bit length {worst}; all N <= 512 within ceil(log2 ceil(log2 N)) + 2")

    table = td_scaling()
    ratios = {
        N: {k: table[N][k] / ((k + 1) * math.log2(math.log2(N))) for k in SCALING_KS} for N in SCALING_SIZES
    }
    top = max(r for row in ratios.values() for r in row.values())
    res.check(top <= SCALING_CONSTANT, f"threshold max queries {table}; max ratio {top:.2f} <= C = {SCALING_CONSTANT}")
    mono = all(
        table[a][k] <= table[b][k] for k in SCALING_KS for a, b in zip(SCALING_SIZES, SCALING_SIZES[1:])
    )
    res.check(mono, "maxima non-decreasing in N")
    lo, hi = SCALING_SIZES[0], SCALING_SIZES[-1]
    growth = max(table[hi][k] / table[lo][k] for k in SCALING_KS)
    res.check(growth < math.log2(hi) / math.log2(lo), f"growth {growth:.2f}x vs log2 N growth {math.log2(hi) / math.log2(lo):.2f}x")

    naive, td, sizes = d_comparison()
    d0, d1 = sorted(naive)
    res.check(naive[d1] > naive[d0], f"naive max grows with d: {naive[d0]} -> {naive[d1]}")
    bound = query_budget(max(sizes.values()), 3)
    res.check(td[d1] <= td[d0] and td[d1] <= bound, f"threshold max does not: {td[d0]} -> {td[d1]} (d-free bound {bound}, |Z| {sizes})")
    res.seconds = time.perf_counter() - start
    return res


# ---------------------------------------------------------------------------
# 3. diameter partition
# ---------------------------------------------------------------------------


def criterion_partition() -> CriterionResult:
    res = CriterionResult(3, "diameter partition")
    start = time.perf_counter()
    ok = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        Z = rng.integers(0, 2, size=(128, 512)).astype(bool)
        A, B = diameter_partition(Z, seed=seed, max_tries=16)
        ok += check_partition(Z, A, B, 3 * math.log2(128))
    res.check(ok == 100, f"{ok}/100 random Z (N=128, d=512) split within 16 tries and pass the pairwise check")
    res.seconds = time.perf_counter() - start
    return res


# ---------------------------------------------------------------------------
# 4. structural numbers
# ---------------------------------------------------------------------------


def criterion_structure() -> CriterionResult:
    res = CriterionResult(4, "structural numbers")
    start = time.perf_counter()
    v = vc_dimension(gen_equality(4))
    res.check(v == 1, f"VC(EQ on 4 bits) = {v}")
    v = vc_dimension(gen_ehd(7, 1))
    res.check(v == 3, f"VC(EHD 7,1) = {v}")
    vs = [vc_dimension(gen_shattered_two_tally(k)) for k in range(1, 5)]
    res.check(vs == [1, 2, 3, 4], f"VC(shattered two-tally k=1..4) = {vs}")
    gts = [max_gt_size(gen_gt(t), cap=8).max_gt for t in range(1, 7)]
    res.check(gts == list(range(1, 7)), f"max GT in GT_t, t=1..6 = {gts}")
    r = max_gt_size(gen_iip(2, 2), cap=8)
    res.check(r.max_gt <= 3, f"max GT in IIP(2,2) = {r.max_gt} <= 3")
    res.seconds = time.perf_counter() - start
    return res


# ---------------------------------------------------------------------------
# 5. gadget
# ---------------------------------------------------------------------------


def criterion_gadget() -> CriterionResult:
    res = CriterionResult(5, "two-tally gadget")
    start = time.perf_counter()
    G = gen_ehd2_gadget()
    rep = verify_two_tally(G, 2)
    res.check(rep.passed, f"verify_two_tally passes (1-tally {tuple(rep.one_tally)}, 0-tally {tuple(rep.zero_tally)})")
    E = gen_ehd(7, 2)
    mismatched = sum(
        int(G.entries[i, j]) != int(E.at(x, y))
        for i, x in enumerate(G.row_labels)
        for j, y in enumerate(G.col_labels)
        if G.entries[i, j] != STAR
    )
    res.check(mismatched == 0, f"{int(G.defined.sum())} defined entries all match EHD(7,2)")
    k23 = BitMatrix(np.ones((2, 3), dtype=bool))
    emb = contains_pattern(G.completion(0), k23, require_distinct=True)
    res.check(emb is not None, f"distinct-row K_2,3 in the completion at rows {emb.rows if emb else None}")
    shared = {n: max_shared_ones(gen_ehd(n, 1)) for n in range(1, 13)}
    res.check(max(shared.values()) <= 2, "EHD(n,1), n <= 12: no two rows share 3 columns, so no K_2,3")
    small = [contains_pattern(gen_ehd(n, 1), k23, require_distinct=True) for n in range(1, 6)]
    res.check(all(e is None for e in small), "contains_pattern agrees for n <= 5")
    res.seconds = time.perf_counter() - start
    return res


# ---------------------------------------------------------------------------
# 6. shuffle invariance
# ---------------------------------------------------------------------------


def numeric_gt_query(n: int) -> BitMatrix:
    labels = bitstrings(n)
    arr = np.array([[int(x, 2) <= int(y, 2) for y in labels] for x in labels])
    return BitMatrix(arr, labels, labels)


def criterion_shuffle() -> CriterionResult:
    res = CriterionResult(6, "shuffle invariance")
    start = time.perf_counter()
    failing = [(n, k) for n in range(1, 7) for k in range(n + 1) if not is_shuffle_invariant(gen_ehd(n, k), ALL)]
    res.check(not failing, f"EHD(n,k) invariant under all dominoes for n <= 6, k <= n (failures {failing})")
    Q = numeric_gt_query(2)
    v = find_shuffle_violation(Q, ALL)
    genuine = False
    if v is not None:
        x, y, u, w = v
        same_type = type_keys([x], [y], set()) == type_keys([u], [w], set())
        genuine = bool(same_type.all()) and Q.at(x, y) != Q.at(u, w)
    res.check(genuine, f"numeric GT at n=2 fails: {v}")
    res.seconds = time.perf_counter() - start
    return res


# ---------------------------------------------------------------------------
# 7. Ramsey mechanics
# ---------------------------------------------------------------------------


def _graph_coloring(N: int, edge_color: Callable[[int, int], int]) -> SubsetColoring:
    table = {(i,): 0 for i in range(N)}
    for i, j in combinations(range(N), 2):
        table[(i, j)] = edge_color(i, j)
    return SubsetColoring(N, 2, table)


def corner_sensitive_query(u: str, v: str) -> int:
    """Reads whether the first domino is 00, plus whether the strings are at distance 1."""
    return int(u[0] + v[0] == "00") ^ int(hamming(u, v) == 1)


def first_nonzero_domino_query(u: str, v: str) -> int:
    """1 iff the first domino other than 00 is 11; ignores where the 00 dominoes sit."""
    for a, b in zip(u, v):
        if a + b != "00":
            return int(a + b == "11")
    return 0


def criterion_ramsey() -> CriterionResult:
    res = CriterionResult(7, "Ramsey mechanics")
    start = time.perf_counter()
    edges = list(combinations(range(6), 2))
    misses = 0
    for mask in range(2 ** len(edges)):
        col = _graph_coloring(6, lambda i, j: (mask >> edges.index((i, j))) & 1)
        misses += find_homogeneous(col, 3) is None
    res.check(misses == 0, f"all 2^15 colorings of K6 have a homogeneous triple ({misses} misses)")
    pent = _graph_coloring(5, lambda i, j: int((j - i) % 5 in (1, 4)))
    res.check(find_homogeneous(pent, 3) is None, "pentagon coloring of K5 has none")

    ex1 = extract_invariant_queries([corner_sensitive_query], 2, "", 0, N=6)
    ok1 = all(is_shuffle_invariant(M, {"00"}) for M in ex1.queries)
    res.check(ok1, f"n=2, N=6, delta={{}}, a=0: T={ex1.T}, restricted queries {{00}}-invariant")
    ex2 = extract_invariant_queries([first_nonzero_domino_query], 2, "00", 1, N=8)
    ok2 = all(is_shuffle_invariant(M, {"00", "11"}) for M in ex2.queries)
    res.check(ok2, f"n=2, N=8, delta={{00}}, a=1: T={ex2.T}, restricted queries {{00,11}}-invariant")
    ex3 = extract_invariant_queries([gen_ehd(6, 1)], 2, ALL, 0, f=lambda a: a[0], k=1)
    res.check(bool(ex3.f_agrees), f"EHD(6,1) restricted through T={ex3.T} still computes EHD(2,1)")
    res.seconds = time.perf_counter() - start
    return res


# ---------------------------------------------------------------------------
# 8. reductions
# ---------------------------------------------------------------------------


def criterion_reduction() -> CriterionResult:
    res = CriterionResult(8, "reduction facts")
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    bad = 0
    for _ in range(100):
        tree = random_tree(rng, 3, (8, 8))
        w = flatten_protocol(tree)
        for x in range(8):
            for y in range(8):
                answers = tuple(int(q.entries[x, y]) for q in w.queries)
                bad += w.f(answers) != eval_protocol(tree, x, y)[0]
    res.check(bad == 0, f"100 random trees of height <= 3 on 8x8: flatten and eval agree on all inputs ({bad} mismatches)")
    res.check(is_blocky(gen_ehd(2, 1)) is not None, "EHD(2,1) is blocky")
    res.check(is_blocky(gen_ehd(3, 1)) is None, "EHD(3,1) is not blocky")
    res.check(
        search_reduction(gen_ehd(3, 1), BLOCKY, c=1) is None,
        "no one-query blocky reduction of EHD(3,1)",
    )
    res.seconds = time.perf_counter() - start
    return res


# ---------------------------------------------------------------------------
# 9. mutation sensitivity
# ---------------------------------------------------------------------------


def mutation_witnesses() -> list[tuple[BitMatrix, ReductionWitness]]:
    """Valid witnesses whose queries realise every answer vector."""
    out = []
    eq = gen_equality(2)
    out.append((eq, ReductionWitness((eq,), TableFunction((0, 1)))))
    ehd = gen_ehd(2, 1)
    out.append((ehd, search_reduction(ehd, BLOCKY, c=1)))
    top = BitMatrix(np.repeat(np.array([[1], [1], [0], [0]], dtype=bool), 4, axis=1))
    pair = ReductionWitness((top, eq), TableFunction((0, 1, 1, 0)))
    out.append((pair.evaluate(), pair))
    neq = BitMatrix(~eq.entries, eq.row_labels, eq.col_labels)
    out.append((neq, search_reduction(neq, BLOCKY, c=1)))
    return out


def realised(w: ReductionWitness) -> set[tuple[int, ...]]:
    """Answer vectors that occur at some entry; only these constrain f."""
    stack = np.stack([q.entries for q in w.queries], axis=-1).reshape(-1, w.c)
    return {tuple(int(b) for b in row) for row in np.unique(stack, axis=0)}


def criterion_mutation() -> CriterionResult:
    res = CriterionResult(9, "mutation sensitivity")
    start = time.perf_counter()
    G = gen_ehd2_gadget()
    defined = list(zip(*np.nonzero(G.defined)))
    survivors = 0
    for i, j in defined:
        arr = G.entries.copy()
        arr[i, j] = 1 - arr[i, j]
        survivors += verify_two_tally(PartialMatrix(arr, G.row_labels, G.col_labels), 2).passed
    res.check(survivors == 0, f"all {len(defined)} single-entry flips of the gadget fail verification")

    flips = survivors = 0
    for target, w in mutation_witnesses():
        if not verify_witness(target, w) or len(realised(w)) != 2**w.c:
            res.check(False, "a base witness does not verify or misses an answer vector")
            continue
        table = w.table()
        for b in range(len(table.bits)):
            flips += 1
            survivors += verify_witness(target, ReductionWitness(w.queries, table.flipped(b)))
    res.check(survivors == 0, f"all {flips} single f-bit flips break their witness")
    res.seconds = time.perf_counter() - start
    return res


CRITERIA = (
    criterion_protocol_correctness,
    criterion_query_scaling,
    criterion_partition,
    criterion_structure,
    criterion_gadget,
    criterion_shuffle,
    criterion_ramsey,
    criterion_reduction,
    criterion_mutation,
)


def run_criterion(fn) -> CriterionResult:
    start = time.perf_counter()
    try:
        res = fn()
    except Exception as exc:  # report, do not abort the suite
        number = CRITERIA.index(fn) + 1
        res = CriterionResult(number, fn.__name__.removeprefix("criterion_"), False, [f"error: {exc!r}"])
    if not res.seconds:
        res.seconds = time.perf_counter() - start
    return res


def run_all(echo: Callable[[str], None] | None = print) -> list[CriterionResult]:
    results = []
    for fn in CRITERIA:
        res = run_criterion(fn)
        results.append(res)
        if echo:
            echo(res.line())
    return results
