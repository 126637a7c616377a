"""Redundancy removal: a rewrite system run to fixpoint.

Rules, applied bottom-up once per pass until a pass changes nothing:

* intersection of spatially disjoint operands -> empty set
* union (or intersection) of identical point-sets -> one operand
* literal rules for the empty/universal set under union and intersection
* double complement elimination; complement of a literal flips it

Differences are normalized to intersection+complement up front and re-sugared
afterwards.  Every rule strictly shrinks the tree, so the fixpoint terminates.
"""

from __future__ import annotations

from .sampling import EmptinessDecider
from .scene import Scene
from .tree import Comp, CsgNode, Diff, EMPTY, Inter, UNIVERSE, map_tree


def desugar_diff(node: CsgNode) -> CsgNode:
    """Rewrite every difference as intersection with a complement."""
    def rule(n: CsgNode) -> CsgNode | None:
        if n.op == "diff":
            return Inter(n.args[0], Comp(n.args[1]))
        return None

    return map_tree(node, rule)


def resugar_diff(node: CsgNode) -> CsgNode:
    """Turn intersection-with-complement back into a difference node."""
    def rule(n: CsgNode) -> CsgNode | None:
        if n.op == "inter":
            a, b = n.args
            if b.op == "comp":
                return Diff(a, b.args[0])
            if a.op == "comp":
                return Diff(b, a.args[0])
        return None

    return map_tree(node, rule)


def _pass(scene: Scene, node: CsgNode, decider: EmptinessDecider) -> CsgNode:
    def rule(n: CsgNode) -> CsgNode | None:
        if n.op == "comp":
            c = n.args[0]
            if c.op == "comp":
                return c.args[0]
            if c.op == "empty":
                return UNIVERSE
            if c.op == "universe":
                return EMPTY
            return None
        if n.op == "inter":
            a, b = n.args
            if a.op == "empty" or b.op == "empty":
                return EMPTY
            if a.op == "universe":
                return b
            if b.op == "universe":
                return a
            if a == b or decider.identical(a, b):
                return a
            if decider.is_empty(n):
                return EMPTY
            return None
        if n.op == "union":
            a, b = n.args
            if a.op == "empty":
                return b
            if b.op == "empty":
                return a
            if a.op == "universe" or b.op == "universe":
                return UNIVERSE
            if a == b or decider.identical(a, b):
                return a
            return None
        return None

    return map_tree(node, rule)


def remove_redundancies(scene: Scene, node: CsgNode, decider: EmptinessDecider) -> CsgNode:
    """Apply the rule set until no rule fires; output denotes the same set
    (up to sampling resolution) and is never larger than the input."""
    current = desugar_diff(node)
    while True:
        rewritten = _pass(scene, current, decider)
        if rewritten == current:
            break
        current = rewritten
    return resugar_diff(current)
