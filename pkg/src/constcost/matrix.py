"""Boolean and partial matrices, query-set closure operations, pattern search.

Indices are 0-based throughout; a 1-based index ``i`` in ``[t]`` maps to ``i - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

STAR = -1
DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    """A bounded exhaustive search ran out of budget before finishing."""


class QsSpecError(ValueError):
    """A closure operation does not fit the matrix shape it is applied to."""

    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


def _check_labels(labels, count, what):
    if labels is None:
        return None
    labels = tuple(str(s) for s in labels)
    if len(labels) != count:
        raise ValueError(f"{what} labels: expected {count}, got {len(labels)}")
    dims = {len(s) for s in labels}
    if len(dims) > 1:
        raise ValueError(f"{what} labels have mixed lengths {sorted(dims)}")
    if any(set(s) - {"0", "1"} for s in labels):
        raise ValueError(f"{what} labels must be bitstrings")
    return labels


class _Labeled:
    """Shared label plumbing for BitMatrix and PartialMatrix."""

    entries: np.ndarray
    row_labels: tuple[str, ...] | None
    col_labels: tuple[str, ...] | None

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def labeled(self) -> bool:
        return self.row_labels is not None and self.col_labels is not None

    @property
    def label_dim(self) -> int | None:
        for labels in (self.row_labels, self.col_labels):
            if labels:
                return len(labels[0])
        return None

    @cached_property
    def _row_index(self) -> dict[str, int]:
        return {s: i for i, s in reversed(list(enumerate(self.row_labels or ())))}

    @cached_property
    def _col_index(self) -> dict[str, int]:
        return {s: i for i, s in reversed(list(enumerate(self.col_labels or ())))}

    def row_of(self, label: str) -> int:
        return self._row_index[label]

    def col_of(self, label: str) -> int:
        return self._col_index[label]

    def at(self, x: str, y: str) -> int:
        """Entry addressed by row and column label (first occurrence)."""
        return int(self.entries[self.row_of(x), self.col_of(y)])

    def __getitem__(self, ij) -> int:
        i, j = ij
        return int(self.entries[i, j])

    def _validate_labels(self):
        object.__setattr__(self, "row_labels", _check_labels(self.row_labels, self.rows, "row"))
        object.__setattr__(self, "col_labels", _check_labels(self.col_labels, self.cols, "column"))
        dims = {len(lab[0]) for lab in (self.row_labels, self.col_labels) if lab}
        if len(dims) > 1:
            raise ValueError("row and column labels must share one bit-length")

    def _same(self, other) -> bool:
        return (
            type(self) is type(other)
            and self.shape == other.shape
            and bool(np.array_equal(self.entries, other.entries))
            and self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
        )

    def with_entries(self, entries, row_labels=None, col_labels=None):
        return type(self)(entries, row_labels, col_labels)

    def unlabeled(self):
        return type(self)(self.entries)


@dataclass(frozen=True, eq=False)
class BitMatrix(_Labeled):
    """Dense 0/1 matrix with optional bitstring labels on rows and columns."""

    entries: np.ndarray
    row_labels: tuple[str, ...] | None = None
    col_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d grid, got shape {arr.shape}")
        if arr.dtype != bool:
            if arr.size and not np.isin(arr, (0, 1)).all():
                raise ValueError("BitMatrix entries must be 0 or 1")
            arr = arr.astype(bool)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        self._validate_labels()

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int] | str], row_labels=None, col_labels=None):
        grid = [[int(c) for c in r] for r in rows]
        return cls(np.array(grid, dtype=bool).reshape(len(grid), -1 if grid else 0), row_labels, col_labels)

    def __eq__(self, other):
        return self._same(other)

    __hash__ = None

    def __repr__(self):
        body = "\n".join("".join("1" if v else "0" for v in row) for row in self.entries)
        return f"BitMatrix({self.rows}x{self.cols})\n{body}"

    def tolist(self) -> list[list[int]]:
        return self.entries.astype(int).tolist()


@dataclass(frozen=True, eq=False)
class PartialMatrix(_Labeled):
    """Matrix over {0, 1, *}; ``*`` is stored as ``STAR`` (-1)."""

    entries: np.ndarray
    row_labels: tuple[str, ...] | None = None
    col_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d grid, got shape {arr.shape}")
        arr = arr.astype(np.int8)
        if arr.size and not np.isin(arr, (0, 1, STAR)).all():
            raise ValueError("PartialMatrix entries must be 0, 1 or *")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        self._validate_labels()

    @classmethod
    def from_rows(cls, rows: Iterable[str | Sequence], row_labels=None, col_labels=None):
        grid = [[STAR if c in ("*", None, STAR) else int(c) for c in r] for r in rows]
        return cls(np.array(grid, dtype=np.int8).reshape(len(grid), -1 if grid else 0), row_labels, col_labels)

    @classmethod
    def from_bitmatrix(cls, M: BitMatrix) -> "PartialMatrix":
        return cls(M.entries.astype(np.int8), M.row_labels, M.col_labels)

    def __eq__(self, other):
        return self._same(other)

    __hash__ = None

    def __repr__(self):
        body = "\n".join("".join("*" if v == STAR else str(int(v)) for v in row) for row in self.entries)
        return f"PartialMatrix({self.rows}x{self.cols})\n{body}"

    @property
    def defined(self) -> np.ndarray:
        return self.entries != STAR

    def completion(self, fill: int = 0) -> BitMatrix:
        """Total matrix with every ``*`` replaced by ``fill``."""
        arr = np.where(self.defined, self.entries, fill).astype(bool)
        return BitMatrix(arr, self.row_labels, self.col_labels)

    def is_completed_by(self, M: BitMatrix) -> bool:
        if M.shape != self.shape:
            return False
        return bool(np.all(~self.defined | (M.entries.astype(np.int8) == self.entries)))


AnyMatrix = Union[BitMatrix, PartialMatrix]


def as_partial(M: AnyMatrix) -> PartialMatrix:
    return M if isinstance(M, PartialMatrix) else PartialMatrix.from_bitmatrix(M)


def negate(M: AnyMatrix) -> AnyMatrix:
    """Entrywise Boolean complement; ``*`` entries stay ``*``."""
    if isinstance(M, PartialMatrix):
        arr = np.where(M.defined, 1 - M.entries, STAR)
        return PartialMatrix(arr, M.row_labels, M.col_labels)
    return BitMatrix(~M.entries, M.row_labels, M.col_labels)


# ---------------------------------------------------------------------------
# Query-set closure operations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Permute:
    """Reorder rows (axis 0) or columns (axis 1): new position p holds old ``order[p]``."""

    axis: int
    order: tuple[int, ...]


@dataclass(frozen=True)
class Select:
    """Keep the listed rows and columns (distinct indices, order kept); ``None`` keeps all."""

    rows: tuple[int, ...] | None = None
    cols: tuple[int, ...] | None = None


@dataclass(frozen=True)
class Duplicate:
    """Repeat rows (axis 0) or columns (axis 1); ``counts`` maps index -> multiplicity >= 1.

    Copies are placed next to the original.
    """

    axis: int
    counts: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, axis: int, counts: dict[int, int]) -> "Duplicate":
        return cls(axis, tuple(sorted(counts.items())))


QsOp = Union[Permute, Select, Duplicate]
QsOpSpec = tuple  # ordered tuple of QsOp; composition is concatenation


def _take(M: AnyMatrix, axis: int, idx: Sequence[int]) -> AnyMatrix:
    idx = list(idx)
    entries = np.take(M.entries, idx, axis=axis) if idx else np.take(M.entries, np.array([], dtype=int), axis=axis)
    rl, cl = M.row_labels, M.col_labels
    if axis == 0 and rl is not None:
        rl = tuple(rl[i] for i in idx)
    if axis == 1 and cl is not None:
        cl = tuple(cl[i] for i in idx)
    return type(M)(entries, rl, cl)


def _check_indices(step, idx, size, what, distinct=True):
    for i in idx:
        if not (0 <= i < size):
            raise QsSpecError(step, f"{what} index {i} out of range for size {size}")
    if distinct and len(set(idx)) != len(idx):
        raise QsSpecError(step, f"{what} indices must be distinct")


def apply_qs_ops(M: AnyMatrix, spec: Iterable[QsOp]) -> AnyMatrix:
    """Apply permutations, submatrix selections and duplications in order.

    Labels travel with their rows and columns.  Raises ``QsSpecError`` naming the
    first step that does not fit the shape it meets.
    """
    for step, op in enumerate(spec):
        if isinstance(op, Permute):
            if op.axis not in (0, 1):
                raise QsSpecError(step, f"bad axis {op.axis}")
            size = M.shape[op.axis]
            if sorted(op.order) != list(range(size)):
                raise QsSpecError(step, f"order is not a permutation of range({size})")
            M = _take(M, op.axis, op.order)
        elif isinstance(op, Select):
            if op.rows is not None:
                _check_indices(step, op.rows, M.rows, "row")
                M = _take(M, 0, op.rows)
            if op.cols is not None:
                _check_indices(step, op.cols, M.cols, "column")
                M = _take(M, 1, op.cols)
        elif isinstance(op, Duplicate):
            if op.axis not in (0, 1):
                raise QsSpecError(step, f"bad axis {op.axis}")
            size = M.shape[op.axis]
            counts = dict(op.counts)
            _check_indices(step, list(counts), size, "duplicated")
            if any(c < 1 for c in counts.values()):
                raise QsSpecError(step, "multiplicities must be >= 1")
            idx = [i for i in range(size) for _ in range(counts.get(i, 1))]
            M = _take(M, op.axis, idx)
        else:
            raise QsSpecError(step, f"unknown operation {op!r}")
    return M


# ---------------------------------------------------------------------------
# Pattern containment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Embedding:
    rows: tuple[int, ...]
    cols: tuple[int, ...]


def _vector_classes(arr: np.ndarray) -> list[int]:
    seen: dict[bytes, int] = {}
    return [seen.setdefault(np.ascontiguousarray(row).tobytes(), len(seen)) for row in arr]


def _mask(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits.astype(np.uint8), bitorder="little").tobytes(), "little")


def _bit_indices(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def contains_pattern(
    M: BitMatrix,
    P: AnyMatrix,
    require_distinct: bool = False,
    budget: int = DEFAULT_BUDGET,
) -> Embedding | None:
    """Find rows and columns of ``M`` realising every defined entry of ``P``.

    Rows are chosen first (lexicographic), columns second; every row choice is
    pruned by keeping, per pattern column, the mask of still-compatible columns.
    Without ``require_distinct`` an index may be reused.  With it, the chosen
    row vectors (and column vectors) of ``M`` are pairwise distinct.
    """
    P = as_partial(P)
    pr, pc = P.shape
    mr, mc = M.shape
    if pr == 0 or pc == 0:
        # no constraints: any pr rows and pc columns will do
        if (pr and not mr) or (pc and not mc):
            return None
        return Embedding((0,) * pr if not require_distinct else tuple(range(pr)), (0,) * pc if not require_distinct else tuple(range(pc)))
    if mr == 0 or mc == 0:
        return None
    if require_distinct and (pr > mr or pc > mc):
        return None

    full = (1 << mc) - 1
    ones = [_mask(M.entries[r]) for r in range(mr)]
    masks = [(full ^ ones[r], ones[r]) for r in range(mr)]
    pattern = P.entries.tolist()
    row_cls = _vector_classes(M.entries) if require_distinct else None
    col_cls = _vector_classes(M.entries.T) if require_distinct else None
    ticks = 0

    def tick():
        nonlocal ticks
        ticks += 1
        if ticks > budget:
            raise BudgetExceeded(f"search budget of {budget} partial assignments exceeded")

    def place_columns(cand: list[int]) -> tuple[int, ...] | None:
        if not require_distinct:
            return tuple((c & -c).bit_length() - 1 for c in cand)
        chosen: list[int] = []
        used: set[int] = set()

        def rec(j):
            if j == pc:
                return True
            for c in _bit_indices(cand[j]):
                if col_cls[c] in used:
                    continue
                tick()
                chosen.append(c)
                used.add(col_cls[c])
                if rec(j + 1):
                    return True
                chosen.pop()
                used.discard(col_cls[c])
            return False

        return tuple(chosen) if rec(0) else None

    rows_chosen: list[int] = []
    used_rows: set[int] = set()

    def rec_rows(i: int, cand: list[int]) -> tuple[int, ...] | None:
        if i == pr:
            return place_columns(cand)
        prow = pattern[i]
        for r in range(mr):
            if require_distinct and row_cls[r] in used_rows:
                continue
            tick()
            zero_m, one_m = masks[r]
            new = []
            for j, v in enumerate(prow):
                c = cand[j] if v == STAR else cand[j] & (one_m if v == 1 else zero_m)
                if not c:
                    break
                new.append(c)
            else:
                if require_distinct:
                    union = 0
                    for c in new:
                        union |= c
                    if union.bit_count() < pc:
                        continue
                    used_rows.add(row_cls[r])
                rows_chosen.append(r)
                cols = rec_rows(i + 1, new)
                if cols is not None:
                    return cols
                rows_chosen.pop()
                if require_distinct:
                    used_rows.discard(row_cls[r])
        return None

    cols = rec_rows(0, [full] * pc)
    if cols is None:
        return None
    return Embedding(tuple(rows_chosen), cols)


def check_embedding(M: BitMatrix, P: AnyMatrix, emb: Embedding) -> bool:
    """Independent re-check that ``emb`` realises every defined entry of ``P``."""
    P = as_partial(P)
    if len(emb.rows) != P.rows or len(emb.cols) != P.cols:
        return False
    sub = M.entries[np.ix_(emb.rows, emb.cols)].astype(np.int8) if P.rows and P.cols else np.zeros(P.shape, np.int8)
    return bool(np.all(~P.defined | (sub == P.entries)))


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def dumps(M: AnyMatrix) -> str:
    """Serialise: header ``rows cols [d]``, one line per row, then labels if any."""
    lines = []
    labeled = M.labeled
    header = f"{M.rows} {M.cols}"
    if labeled:
        header += f" {M.label_dim if M.label_dim is not None else 0}"
    lines.append(header)
    if isinstance(M, PartialMatrix):
        for row in M.entries:
            lines.append("".join("*" if v == STAR else str(int(v)) for v in row))
    else:
        for row in M.entries:
            lines.append("".join("1" if v else "0" for v in row))
    if labeled:
        lines.extend(M.row_labels)
        lines.extend(M.col_labels)
    return "\n".join(lines) + "\n"


def loads(text: str, partial: bool | None = None) -> AnyMatrix:
    """Parse the text format.  ``partial=None`` picks PartialMatrix iff a ``*`` occurs."""
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty matrix text")
    head = lines[0].split()
    if len(head) not in (2, 3):
        raise ValueError(f"bad header {lines[0]!r}")
    rows, cols = int(head[0]), int(head[1])
    body = lines[1 : 1 + rows]
    if len(body) != rows or any(len(r) != cols for r in body):
        raise ValueError("row lines do not match header shape")
    if any(set(r) - set("01*") for r in body):
        raise ValueError("row lines must use 0, 1 and * only")
    rl = cl = None
    if len(head) == 3:
        d = int(head[2])
        labels = lines[1 + rows : 1 + rows + rows + cols]
        if len(labels) != rows + cols or any(len(s) != d for s in labels):
            raise ValueError("label block does not match header")
        rl, cl = tuple(labels[:rows]), tuple(labels[rows:])
    has_star = any("*" in r for r in body)
    if partial is None:
        partial = has_star
    if partial:
        return PartialMatrix.from_rows(body, rl, cl) if rows else PartialMatrix(np.zeros((0, cols), np.int8), rl, cl)
    if has_star:
        raise ValueError("'*' entry in a total matrix")
    return BitMatrix.from_rows(body, rl, cl) if rows else BitMatrix(np.zeros((0, cols), bool), rl, cl)
