"""Editability metrics: expression size and spatial proximity."""

from __future__ import annotations

from dataclasses import dataclass

from .sampling import EmptinessDecider
from .scene import Scene
from .tree import CsgNode, tree_size


@dataclass(frozen=True)
class Metrics:
    size: int
    proximity: float


def proximity_recursive(scene: Scene, node: CsgNode, decider: EmptinessDecider) -> int:
    """Leaf nodes score 1; a binary node adds 1 when its operands' point-sets
    overlap (sampled); complement counts as a trivially-overlapping unary node."""
    if node.is_leafish:
        return 1
    if node.op == "comp":
        return proximity_recursive(scene, node.args[0], decider) + 1
    a, b = node.args
    total = proximity_recursive(scene, a, decider) + proximity_recursive(scene, b, decider)
    if decider.overlaps(a, b):
        total += 1
    return total


def proximity(scene: Scene, node: CsgNode, decider: EmptinessDecider) -> float:
    """Fraction of the tree whose operations join spatially overlapping operands.

    Equals 1 for a single leaf and for any tree in which every operation's
    operands overlap; always in (0, 1].
    """
    return proximity_recursive(scene, node, decider) / tree_size(node)


def metrics(scene: Scene, node: CsgNode, decider: EmptinessDecider) -> Metrics:
    return Metrics(tree_size(node), proximity(scene, node, decider))
