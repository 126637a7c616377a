"""Immutable CSG expression trees.

Nodes are hash-consed enough for cheap structural identity: every node caches
its structural hash and node count at construction, so equality checks can
short-circuit and `tree_size` is O(1).  Subtrees may be shared between trees;
sizes count occurrences, not objects.
"""

from __future__ import annotations

import hashlib
from typing import Callable, Iterator

# SDF value used for the empty-set / universal-set literals.  Large enough to
# dominate any real geometry, small enough that min/max stay finite.
LARGE = 1e30

BINARY_OPS = ("union", "inter", "diff")
LEAF_OPS = ("leaf", "empty", "universe")
ALL_OPS = LEAF_OPS + BINARY_OPS + ("comp",)


class StructuralError(Exception):
    """A tree references a halfspace id that the scene does not define."""


class CsgNode:
    __slots__ = ("op", "hs", "args", "_hash", "_size", "_ckey")

    def __init__(self, op: str, hs: int | None = None, args: tuple["CsgNode", ...] = ()):
        if op not in ALL_OPS:
            raise ValueError(f"unknown op {op!r}")
        if op == "leaf":
            if hs is None or args:
                raise ValueError("leaf takes a halfspace id and no children")
        elif op in ("empty", "universe"):
            if hs is not None or args:
                raise ValueError(f"{op} takes no arguments")
        elif op == "comp":
            if hs is not None or len(args) != 1:
                raise ValueError("comp takes exactly one child")
        else:
            if hs is not None or len(args) != 2:
                raise ValueError(f"{op} takes exactly two children")
        self.op = op
        self.hs = hs
        self.args = args
        self._size = 1 + sum(a._size for a in args)
        self._hash = hash((op, hs, tuple(a._hash for a in args)))
        self._ckey: bytes | None = None

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, CsgNode):
            return NotImplemented
        if self._hash != other._hash or self.op != other.op or self.hs != other.hs:
            return False
        if len(self.args) != len(other.args):
            return False
        return all(a == b for a, b in zip(self.args, other.args))

    def __repr__(self) -> str:
        return f"CsgNode({to_expr(self)})"

    @property
    def is_leafish(self) -> bool:
        return self.op in LEAF_OPS


def Leaf(hs_id: int) -> CsgNode:
    return CsgNode("leaf", hs=hs_id)


def Union(a: CsgNode, b: CsgNode) -> CsgNode:
    return CsgNode("union", args=(a, b))


def Inter(a: CsgNode, b: CsgNode) -> CsgNode:
    return CsgNode("inter", args=(a, b))


def Diff(a: CsgNode, b: CsgNode) -> CsgNode:
    return CsgNode("diff", args=(a, b))


def Comp(a: CsgNode) -> CsgNode:
    return CsgNode("comp", args=(a,))


EMPTY = CsgNode("empty")
UNIVERSE = CsgNode("universe")


def tree_size(node: CsgNode) -> int:
    """Node count: operations plus literals, including empty/universe."""
    return node._size


def iter_nodes(node: CsgNode) -> Iterator[CsgNode]:
    """Preorder traversal (iterative; safe for deep trees)."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.args))


def iter_paths(node: CsgNode) -> Iterator[tuple[tuple[int, ...], CsgNode]]:
    """Preorder traversal yielding (path, node); path is child indices from the root."""
    stack: list[tuple[tuple[int, ...], CsgNode]] = [((), node)]
    while stack:
        path, n = stack.pop()
        yield path, n
        for i in range(len(n.args) - 1, -1, -1):
            stack.append((path + (i,), n.args[i]))


def node_at(root: CsgNode, path: tuple[int, ...]) -> CsgNode:
    n = root
    for i in path:
        n = n.args[i]
    return n


def replace_at(root: CsgNode, path: tuple[int, ...], new: CsgNode) -> CsgNode:
    """Rebuild the spine from root to `path`, substituting `new` at the end."""
    if not path:
        return new
    i = path[0]
    child = replace_at(root.args[i], path[1:], new)
    args = tuple(child if j == i else a for j, a in enumerate(root.args))
    return CsgNode(root.op, hs=root.hs, args=args)


def used_halfspaces(node: CsgNode) -> frozenset[int]:
    return frozenset(n.hs for n in iter_nodes(node) if n.op == "leaf")


def substitute_leaves(node: CsgNode, mapping: dict[int, CsgNode]) -> CsgNode:
    """Replace every leaf whose id is in `mapping`; shares untouched subtrees."""
    memo: dict[CsgNode, CsgNode] = {}

    def rec(n: CsgNode) -> CsgNode:
        got = memo.get(n)
        if got is not None:
            return got
        if n.op == "leaf":
            out = mapping.get(n.hs, n)
        elif n.args:
            args = tuple(rec(a) for a in n.args)
            out = n if all(x is y for x, y in zip(args, n.args)) else CsgNode(n.op, hs=n.hs, args=args)
        else:
            out = n
        memo[n] = out
        return out

    return rec(node)


def canon_key(node: CsgNode) -> bytes:
    """Structural digest, invariant under operand order of union/intersection
    and under the difference sugar (diff is keyed as inter+comp)."""
    if node._ckey is not None:
        return node._ckey
    if node.op == "leaf":
        key = _digest(b"l", str(node.hs).encode())
    elif node.op == "empty":
        key = _digest(b"e")
    elif node.op == "universe":
        key = _digest(b"w")
    elif node.op == "comp":
        key = _digest(b"c", canon_key(node.args[0]))
    elif node.op == "diff":
        inner = _digest(b"c", canon_key(node.args[1]))
        key = _digest(b"i", *sorted((canon_key(node.args[0]), inner)))
    elif node.op == "union":
        key = _digest(b"u", *sorted(canon_key(a) for a in node.args))
    else:  # inter
        key = _digest(b"i", *sorted(canon_key(a) for a in node.args))
    node._ckey = key
    return key


def _digest(*parts: bytes) -> bytes:
    h = hashlib.blake2b(digest_size=12)
    for p in parts:
        h.update(p)
    return h.digest()


_OP_SYMBOL = {"union": "+", "inter": "·", "diff": "−"}


def to_expr(node: CsgNode) -> str:
    """Human-readable infix form: h3, !h0, (a + b), (a · b), (a − b)."""
    if node.op == "leaf":
        return f"h{node.hs}"
    if node.op == "empty":
        return "∅"
    if node.op == "universe":
        return "W"
    if node.op == "comp":
        return f"!{to_expr(node.args[0])}"
    a, b = node.args
    return f"({to_expr(a)} {_OP_SYMBOL[node.op]} {to_expr(b)})"


def node_to_json(node: CsgNode) -> dict:
    if node.op == "leaf":
        return {"op": "leaf", "hs": node.hs}
    if node.op in ("empty", "universe"):
        return {"op": node.op}
    return {"op": node.op, "args": [node_to_json(a) for a in node.args]}


def node_from_json(data: dict) -> CsgNode:
    op = data.get("op")
    if op == "leaf":
        return Leaf(int(data["hs"]))
    if op == "empty":
        return EMPTY
    if op == "universe":
        return UNIVERSE
    args = [node_from_json(a) for a in data.get("args", ())]
    if op == "comp":
        if len(args) != 1:
            raise ValueError("comp takes one argument")
        return Comp(args[0])
    if op in BINARY_OPS:
        if len(args) != 2:
            raise ValueError(f"{op} takes two arguments")
        return CsgNode(op, args=tuple(args))
    raise ValueError(f"unknown op in tree json: {op!r}")


def map_tree(node: CsgNode, fn: Callable[[CsgNode], CsgNode | None]) -> CsgNode:
    """Bottom-up rewrite: `fn` sees each rebuilt node, returns a replacement or None."""
    memo: dict[CsgNode, CsgNode] = {}

    def rec(n: CsgNode) -> CsgNode:
        got = memo.get(n)
        if got is not None:
            return got
        if n.args:
            args = tuple(rec(a) for a in n.args)
            rebuilt = n if all(x is y for x, y in zip(args, n.args)) else CsgNode(n.op, hs=n.hs, args=args)
        else:
            rebuilt = n
        out = fn(rebuilt)
        out = rebuilt if out is None else out
        memo[n] = out
        return out

    return rec(node)
