"""Scenes: a halfspace set plus a root expression, with SDF evaluation and JSON I/O.

Scene JSON layout::

    {"name": str,
     "halfspaces": [{"id": int, "type": "sphere"|"box"|"cylinder", ...}],
     "tree": {"op": "union"|"inter"|"comp"|"diff"|"leaf"|"empty"|"universe",
              "hs": int?, "args": [...]}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .geometry import Aabb, Box, Cylinder, Halfspace, Shape, Sphere
from .tree import (
    LARGE,
    CsgNode,
    StructuralError,
    iter_nodes,
    node_from_json,
    node_to_json,
)


@dataclass(frozen=True)
class Scene:
    halfspaces: tuple[Halfspace, ...]
    root: CsgNode
    name: str = "scene"

    def __post_init__(self):
        by_id: dict[int, Halfspace] = {}
        for h in self.halfspaces:
            if h.id in by_id:
                raise ValueError(f"duplicate halfspace id {h.id}")
            by_id[h.id] = h
        for n in iter_nodes(self.root):
            if n.op == "leaf" and n.hs not in by_id:
                raise StructuralError(f"leaf references unknown halfspace {n.hs}")
        box = Aabb.empty()
        for h in self.halfspaces:
            box = box.union(h.aabb())
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_aabb", box)

    @property
    def aabb(self) -> Aabb:
        return self._aabb

    def halfspace(self, hs_id: int) -> Halfspace:
        try:
            return self._by_id[hs_id]
        except KeyError:
            raise StructuralError(f"unknown halfspace id {hs_id}") from None

    def with_root(self, root: CsgNode) -> "Scene":
        return Scene(self.halfspaces, root, self.name)

    def halfspace_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._by_id))


def eval_from_table(node: CsgNode, columns: Mapping[int, np.ndarray], shape, large=LARGE) -> np.ndarray:
    """Evaluate a tree over precomputed per-leaf value arrays.

    Works for float SDF columns and equally for int8 ternary signs, because
    union/intersection/complement are min/max/negate either way.
    """
    if node.op == "leaf":
        try:
            return columns[node.hs]
        except KeyError:
            raise StructuralError(f"no column for halfspace {node.hs}") from None
    if node.op == "empty":
        return np.full(shape, large, dtype=np.result_type(large))
    if node.op == "universe":
        return np.full(shape, -large, dtype=np.result_type(large))
    if node.op == "comp":
        return -eval_from_table(node.args[0], columns, shape, large)
    a = eval_from_table(node.args[0], columns, shape, large)
    b = eval_from_table(node.args[1], columns, shape, large)
    if node.op == "union":
        return np.minimum(a, b)
    if node.op == "inter":
        return np.maximum(a, b)
    return np.maximum(a, -b)  # diff


def eval_sdf_many(scene: Scene, node: CsgNode, points) -> np.ndarray:
    """Vectorized SDF of `node` at an (n, 3) array of points."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    columns: dict[int, np.ndarray] = {}
    for n in iter_nodes(node):
        if n.op == "leaf" and n.hs not in columns:
            columns[n.hs] = scene.halfspace(n.hs).sdf(pts)
    return eval_from_table(node, columns, pts.shape[0])


def eval_sdf(scene: Scene, node: CsgNode, p) -> float:
    """SDF of `node` at a single point: min for union, max for intersection,
    negation for complement, max(a, -b) for difference."""
    return float(eval_sdf_many(scene, node, np.asarray(p, dtype=np.float64)[None, :])[0])


def aabb(scene: Scene, node: CsgNode) -> Aabb:
    """Conservative bounding box of the node's point-set within the scene box."""
    if node.op == "leaf":
        return scene.halfspace(node.hs).aabb()
    if node.op == "empty":
        return Aabb.empty()
    if node.op in ("universe", "comp"):
        return scene.aabb
    a = aabb(scene, node.args[0])
    if node.op == "diff":
        return a
    b = aabb(scene, node.args[1])
    return a.union(b) if node.op == "union" else a.intersect(b)


def _shape_to_json(shape: Shape) -> dict:
    if isinstance(shape, Sphere):
        return {"type": "sphere", "center": list(shape.center), "radius": shape.radius}
    if isinstance(shape, Box):
        return {
            "type": "box",
            "center": list(shape.center),
            "half_extents": list(shape.half_extents),
            "rotation": [list(row) for row in shape.rotation],
        }
    if isinstance(shape, Cylinder):
        return {
            "type": "cylinder",
            "center": list(shape.center),
            "axis": list(shape.axis),
            "radius": shape.radius,
            "half_height": shape.half_height,
        }
    raise TypeError(f"unknown shape {shape!r}")


def _shape_from_json(data: dict) -> Shape:
    kind = data.get("type")
    if kind == "sphere":
        return Sphere(tuple(data["center"]), float(data["radius"]))
    if kind == "box":
        return Box(
            tuple(data["center"]),
            tuple(data["half_extents"]),
            tuple(tuple(row) for row in data["rotation"]),
        )
    if kind == "cylinder":
        return Cylinder(
            tuple(data["center"]),
            tuple(data["axis"]),
            float(data["radius"]),
            float(data["half_height"]),
        )
    raise ValueError(f"unknown halfspace type: {kind!r}")


def scene_to_json(scene: Scene) -> dict:
    return {
        "name": scene.name,
        "halfspaces": [{"id": h.id, **_shape_to_json(h.shape)} for h in scene.halfspaces],
        "tree": node_to_json(scene.root),
    }


def scene_from_json(data: dict) -> Scene:
    halfspaces = tuple(
        Halfspace(int(h["id"]), _shape_from_json(h)) for h in data["halfspaces"]
    )
    return Scene(halfspaces, node_from_json(data["tree"]), str(data.get("name", "scene")))


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_json(scene), indent=1))


def load_scene(path) -> Scene:
    return scene_from_json(json.loads(Path(path).read_text()))
