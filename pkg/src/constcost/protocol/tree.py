"""Oracle protocols as binary decision trees over query matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..matrix import BitMatrix
from ..reduction import ReductionWitness
from .engine import ProtocolError, Transcript, TranscriptEntry

MAX_FLATTEN_HEIGHT = 16


@dataclass(frozen=True)
class Leaf:
    bit: int


@dataclass(frozen=True, eq=False)
class Node:
    """Inner node: go to ``zero`` or ``one`` according to ``query[x, y]``."""

    query: BitMatrix
    zero: "Tree"
    one: "Tree"
    name: str = ""
    tag: str = "Q"


Tree = Union[Leaf, Node]


def tree_height(tree: Tree) -> int:
    """Height in inner nodes; also validates node types, leaf bits and query shapes."""
    shapes = set()

    def walk(t):
        if isinstance(t, Leaf):
            if t.bit not in (0, 1):
                raise ProtocolError(f"leaf bit {t.bit!r} is not 0/1")
            return 0
        if not isinstance(t, Node) or not isinstance(t.query, BitMatrix):
            raise ProtocolError(f"malformed tree node {t!r}")
        shapes.add(t.query.shape)
        if len(shapes) > 1:
            raise ProtocolError(f"queries disagree on the input domain: {sorted(shapes)}")
        return 1 + max(walk(t.zero), walk(t.one))

    return walk(tree)


def domain_shape(tree: Tree) -> tuple[int, int] | None:
    return tree.query.shape if isinstance(tree, Node) else None


def eval_protocol(tree: Tree, x: int, y: int) -> tuple[int, Transcript]:
    """Walk the tree on input (x, y); one transcript entry per inner node visited."""
    tree_height(tree)
    shape = domain_shape(tree)
    if shape is not None and not (0 <= x < shape[0] and 0 <= y < shape[1]):
        raise ProtocolError(f"input ({x}, {y}) outside domain {shape}")
    transcript = Transcript()
    node = tree
    while isinstance(node, Node):
        answer = node.query[x, y]
        transcript.record(TranscriptEntry(node.tag, node.name, answer))
        node = node.one if answer else node.zero
    return node.bit, transcript


def protocol_matrix(tree: Tree, shape: tuple[int, int] | None = None) -> BitMatrix:
    """The matrix computed by the tree, by evaluating every input."""
    shape = domain_shape(tree) or shape
    if shape is None:
        raise ValueError("a bare leaf needs an explicit shape")
    out = np.zeros(shape, dtype=bool)
    for x in range(shape[0]):
        for y in range(shape[1]):
            out[x, y] = eval_protocol(tree, x, y)[0]
    return BitMatrix(out)


def _inner_count(tree, memo):
    key = id(tree)
    if key not in memo:
        memo[key] = 0 if isinstance(tree, Leaf) else 1 + _inner_count(tree.zero, memo) + _inner_count(tree.one, memo)
    return memo[key]


@dataclass(frozen=True, eq=False)
class TreeFunction:
    """f(a_1, ..., a_c) that replays the tree, reading node p's answer from a_p (preorder)."""

    tree: Tree
    arity: int

    def __post_init__(self):
        object.__setattr__(self, "_sizes", {})

    def __call__(self, answers) -> int:
        node, p = self.tree, 0
        while isinstance(node, Node):
            if answers[p]:
                p += 1 + _inner_count(node.zero, self._sizes)
                node = node.one
            else:
                p += 1
                node = node.zero
        return node.bit


def flatten_protocol(tree: Tree) -> ReductionWitness:
    """All inner-node queries (preorder) plus the f that simulates the tree on their answers."""
    if tree_height(tree) > MAX_FLATTEN_HEIGHT:
        raise ProtocolError(f"tree height exceeds {MAX_FLATTEN_HEIGHT}")
    queries = []
    stack = [tree]
    while stack:
        t = stack.pop()
        if isinstance(t, Node):
            queries.append(t.query)
            stack.extend((t.one, t.zero))
    return ReductionWitness(tuple(queries), TreeFunction(tree, len(queries)))


def random_tree(rng: np.random.Generator, height: int, shape: tuple[int, int], p_leaf: float = 0.25) -> Tree:
    """Random tree of height <= ``height`` with uniformly random query matrices."""
    if height == 0 or (rng.random() < p_leaf):
        return Leaf(int(rng.integers(2)))
    q = BitMatrix(rng.integers(0, 2, size=shape).astype(bool))
    return Node(q, random_tree(rng, height - 1, shape, p_leaf), random_tree(rng, height - 1, shape, p_leaf))
