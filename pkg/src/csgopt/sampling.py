"""Sampling-based decision procedures.

Two empty-set strategies: hierarchical (octree descent over the node's
bounding box, sampling cell centers coarse-to-fine with early stop) and
CIT-based (test the witness point of every canonical intersection term).
Both are approximations sound up to the sampling resolution: features
smaller than the minimum cell can be missed.

All regular-grid scans share one lattice anchored at the scene bounding box
corner and sample cell centers, so CIT witnesses and verification samples
coincide and never sit exactly on axis-aligned surfaces placed at lattice
multiples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .geometry import Aabb, Vec3
from .scene import Scene, aabb, eval_from_table, eval_sdf_many
from .tree import Comp, CsgNode, Inter, canon_key, used_halfspaces

_CHUNK = 262_144  # lattice points evaluated per block


@dataclass(frozen=True)
class GridSpec:
    """Regular-scan step plus the minimum octree cell for hierarchical descent."""

    cell_size: float = 0.1
    min_cell: Vec3 = (0.1, 0.1, 0.1)

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        if not all(m > 0 for m in self.min_cell):
            raise ValueError("min_cell must be positive")

    def coarser(self, factor: float = 4.0) -> "GridSpec":
        return GridSpec(self.cell_size, tuple(m * factor for m in self.min_cell))


@dataclass(frozen=True)
class Cit:
    """Canonical intersection term: one sign bit per halfspace plus a witness."""

    signs: tuple[int, ...]
    witness: Vec3
    inside: bool


@dataclass
class CitSet:
    """Distinct sign-vector cells found on the lattice, with first witnesses.

    `signs` is binary (1 = inside the halfspace); `signs3` keeps the exact
    ternary SDF sign at the witness so boundary hits stay exact.  `inside`
    flags each cell against the node the set was enumerated for.
    """

    ids: tuple[int, ...]
    signs: np.ndarray
    signs3: np.ndarray
    witnesses: np.ndarray
    inside: np.ndarray
    counts: np.ndarray

    def __len__(self) -> int:
        return len(self.signs)

    @property
    def n_inside(self) -> int:
        return int(self.inside.sum())

    def cits(self) -> tuple[Cit, ...]:
        return tuple(
            Cit(tuple(int(v) for v in self.signs[i]), tuple(map(float, self.witnesses[i])), bool(self.inside[i]))
            for i in range(len(self))
        )

    def inside_signs(self) -> np.ndarray:
        return self.signs[self.inside]

    def outside_signs(self) -> np.ndarray:
        return self.signs[~self.inside]

    def sign_columns(self) -> dict[int, np.ndarray]:
        return {hs: self.signs3[:, j] for j, hs in enumerate(self.ids)}

    def with_inside_for(self, scene: Scene, node: CsgNode) -> "CitSet":
        inside = ternary_eval(node, self.sign_columns(), len(self)) <= 0
        return CitSet(self.ids, self.signs, self.signs3, self.witnesses, inside, self.counts)


def ternary_eval(node: CsgNode, columns: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Exact sign of the node SDF from per-halfspace ternary signs.

    sign is a lattice homomorphism for min/max and odd under negation, so
    propagating int8 signs through the tree reproduces sign(F) exactly.
    """
    return eval_from_table(node, columns, n, large=np.int8(1))


def lattice_axis(anchor: float, lo: float, hi: float, step: float) -> np.ndarray:
    """Cell centers of the global lattice covering [lo, hi]."""
    i_lo = math.floor((lo - anchor) / step)
    i_hi = math.ceil((hi - anchor) / step) - 1
    if i_hi < i_lo:
        i_hi = i_lo
    return anchor + (np.arange(i_lo, i_hi + 1) + 0.5) * step


def lattice_points(scene: Scene, box: Aabb, step: float):
    """Yield (points, ) chunks of lattice cell centers covering `box` in C order."""
    anchor = scene.aabb.lo
    xs = lattice_axis(anchor[0], box.lo[0], box.hi[0], step)
    ys = lattice_axis(anchor[1], box.lo[1], box.hi[1], step)
    zs = lattice_axis(anchor[2], box.lo[2], box.hi[2], step)
    per_x = len(ys) * len(zs)
    block = max(1, _CHUNK // max(per_x, 1))
    for start in range(0, len(xs), block):
        xb = xs[start : start + block]
        gx, gy, gz = np.meshgrid(xb, ys, zs, indexing="ij")
        yield np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)


_CELL_CACHE: dict[tuple, CitSet] = {}


def clear_cell_cache() -> None:
    _CELL_CACHE.clear()


def _cell_table(scene: Scene, ids: tuple[int, ...], box: Aabb, step: float) -> CitSet:
    """Distinct halfspace-sign cells over the lattice covering `box` (cached)."""
    key = (scene, ids, box, step)
    got = _CELL_CACHE.get(key)
    if got is not None:
        return got

    n = len(ids)
    shapes = [scene.halfspace(i) for i in ids]
    merged: dict[bytes, list] = {}
    for pts in lattice_points(scene, box, step):
        bits = np.zeros((len(pts), 2 * n), dtype=np.uint8)
        for j, h in enumerate(shapes):
            s = h.sdf(pts)
            bits[:, 2 * j] = s <= 0.0
            bits[:, 2 * j + 1] = s == 0.0
        packed = np.packbits(bits, axis=1)
        rows, first, counts = np.unique(packed, axis=0, return_index=True, return_counts=True)
        order = np.argsort(first, kind="stable")
        for k in order:
            rkey = rows[k].tobytes()
            entry = merged.get(rkey)
            if entry is None:
                merged[rkey] = [pts[first[k]].copy(), int(counts[k])]
            else:
                entry[1] += int(counts[k])

    row_keys = sorted(merged)
    u = len(row_keys)
    witnesses = np.zeros((u, 3))
    counts_arr = np.zeros(u, dtype=np.int64)
    signs = np.zeros((u, n), dtype=np.uint8)
    signs3 = np.zeros((u, n), dtype=np.int8)
    nbytes = (2 * n + 7) // 8
    for i, rkey in enumerate(row_keys):
        witnesses[i], counts_arr[i] = merged[rkey]
        bits = np.unpackbits(np.frombuffer(rkey, dtype=np.uint8))[: 2 * n]
        inside_bits = bits[0::2].astype(bool)
        zero_bits = bits[1::2].astype(bool)
        signs[i] = inside_bits
        signs3[i] = np.where(zero_bits, 0, np.where(inside_bits, -1, 1)).astype(np.int8)
    assert nbytes == len(row_keys[0]) if row_keys else True
    table = CitSet(ids, signs, signs3, witnesses, np.zeros(u, dtype=bool), counts_arr)
    _CELL_CACHE[key] = table
    return table


def enumerate_cits(
    scene: Scene,
    node: CsgNode,
    grid: GridSpec | None = None,
    ids: Iterable[int] | None = None,
) -> CitSet:
    """Scan the lattice over the halfspaces' boxes and collect distinct CITs.

    The scan box is padded by one cell ring so the all-outside term always has
    a witness.  Cells are deduplicated by sign vector keeping the first
    witness in scan order; each cell is flagged inside/outside w.r.t. `node`.
    """
    grid = grid or GridSpec()
    if ids is None:
        ids = scene.halfspace_ids()
    ids = tuple(sorted(ids))
    box = Aabb.empty()
    for i in ids:
        box = box.union(scene.halfspace(i).aabb())
    if box.is_empty or not ids:
        return CitSet(
            ids,
            np.zeros((0, len(ids)), dtype=np.uint8),
            np.zeros((0, len(ids)), dtype=np.int8),
            np.zeros((0, 3)),
            np.zeros(0, dtype=bool),
            np.zeros(0, dtype=np.int64),
        )
    box = box.pad(grid.cell_size)
    cells = _cell_table(scene, ids, box, grid.cell_size)
    return cells.with_inside_for(scene, node)


def scene_cells(scene: Scene, grid: GridSpec | None = None) -> CitSet:
    """Arrangement cells over the scene bounding box (verification lattice)."""
    grid = grid or GridSpec()
    return _cell_table(scene, scene.halfspace_ids(), scene.aabb, grid.cell_size)


def grid_disagreements(scene: Scene, a: CsgNode, b: CsgNode, grid: GridSpec | None = None) -> int:
    """Number of lattice samples over the scene box where the two trees differ in sign."""
    grid = grid or GridSpec()
    cells = scene_cells(scene, grid)
    cols = cells.sign_columns()
    in_a = ternary_eval(a, cols, len(cells)) <= 0
    in_b = ternary_eval(b, cols, len(cells)) <= 0
    mismatch = in_a != in_b
    return int(cells.counts[mismatch].sum())


def grids_agree(scene: Scene, a: CsgNode, b: CsgNode, grid: GridSpec | None = None) -> bool:
    return grid_disagreements(scene, a, b, grid) == 0


def octree_level_sizes(box: Aabb, min_cell: Vec3) -> list[np.ndarray]:
    """Cell sizes per level: halve until any dimension drops to the minimum."""
    sizes = [np.asarray(box.dims, dtype=np.float64)]
    while np.all(sizes[-1] > np.asarray(min_cell)):
        sizes.append(sizes[-1] / 2.0)
    return sizes


_CHILD_SIGNS = np.array(
    [[(1 if k & 1 else -1), (1 if k & 2 else -1), (1 if k & 4 else -1)] for k in range(8)],
    dtype=np.float64,
)  # Morton order: bit0 -> x, bit1 -> y, bit2 -> z


def _children(centers: np.ndarray, size: np.ndarray) -> np.ndarray:
    offs = _CHILD_SIGNS * (size / 4.0)
    return (centers[:, None, :] + offs[None, :, :]).reshape(-1, 3)


def is_empty_hierarchical(
    scene: Scene,
    node: CsgNode,
    grid: GridSpec | None = None,
    *,
    early_stop: bool = True,
    prune: bool = True,
) -> bool:
    """Octree descent over the node's box; False as soon as a center has SDF <= 0.

    `prune` skips cells whose center value exceeds the cell half-diagonal;
    sound because all SDFs here are 1-Lipschitz, so such cells cannot contain
    a non-positive value.  Neither flag changes the decision, only the work.
    """
    grid = grid or GridSpec()
    box = aabb(scene, node)
    if box.is_empty:
        return True
    sizes = octree_level_sizes(box, grid.min_cell)
    centers = np.asarray([box.center], dtype=np.float64)
    found = False
    for level, size in enumerate(sizes):
        radius = 0.5 * float(np.linalg.norm(size))
        inside_any = False
        vals_blocks = []
        for start in range(0, len(centers), _CHUNK):
            vals = eval_sdf_many(scene, node, centers[start : start + _CHUNK])
            vals_blocks.append(vals)
            if np.any(vals <= 0.0):
                inside_any = True
                if early_stop:
                    return False
        if inside_any:
            found = True
        if level + 1 == len(sizes):
            break
        vals = np.concatenate(vals_blocks)
        keep = vals <= radius if prune else np.ones(len(centers), dtype=bool)
        if not keep.any():
            break
        centers = _children(centers[keep], size)
    return not found


def is_empty_citbased(scene: Scene, node: CsgNode, cits: CitSet) -> bool:
    """True iff the node's SDF is positive at every CIT witness point."""
    if len(cits) == 0:
        return True
    vals = eval_sdf_many(scene, node, cits.witnesses)
    return not bool(np.any(vals <= 0.0))


HIERARCHICAL = "hierarchical"
CIT_BASED = "cit"


class EmptinessDecider:
    """Empty-set decisions under a fixed strategy, with a proven-empty table.

    The CIT strategy requires terms enumerated from the original full tree;
    witnesses stay valid for any subtree over the same halfspaces.
    """

    def __init__(
        self,
        scene: Scene,
        grid: GridSpec | None = None,
        strategy: str = HIERARCHICAL,
        cits: CitSet | None = None,
    ):
        if strategy not in (HIERARCHICAL, CIT_BASED):
            raise ValueError(f"unknown strategy {strategy!r}")
        self.scene = scene
        self.grid = grid or GridSpec()
        self.strategy = strategy
        if strategy == CIT_BASED and cits is None:
            cits = enumerate_cits(scene, scene.root, self.grid)
        self.cits = cits
        self.cache: dict[bytes, bool] = {}
        self._overlap_memo: dict[tuple[bytes, bytes], bool] = {}

    def clear_cache(self) -> None:
        self.cache.clear()
        self._overlap_memo.clear()

    def is_empty(self, node: CsgNode) -> bool:
        if node.op == "empty":
            return True
        if node.op == "universe":
            return False
        key = canon_key(node)
        if key in self.cache:
            return True
        if aabb(self.scene, node).is_empty:
            self.cache[key] = True
            return True
        if self.strategy == HIERARCHICAL:
            empty = is_empty_hierarchical(self.scene, node, self.grid)
        else:
            empty = is_empty_citbased(self.scene, node, self.cits)
        if empty:
            self.cache[key] = True
        return empty

    def overlaps(self, a: CsgNode, b: CsgNode) -> bool:
        """Do the two operands' point-sets share any sampled point?"""
        ka, kb = canon_key(a), canon_key(b)
        key = (ka, kb) if ka <= kb else (kb, ka)
        got = self._overlap_memo.get(key)
        if got is None:
            got = not self.is_empty(Inter(a, b))
            self._overlap_memo[key] = got
        return got

    def identical(self, a: CsgNode, b: CsgNode) -> bool:
        if a == b:
            return True
        return self.is_empty(Inter(a, Comp(b))) and self.is_empty(Inter(b, Comp(a)))


def sets_identical(scene: Scene, a: CsgNode, b: CsgNode, decider: EmptinessDecider) -> bool:
    """Identity via two empty-set decisions: a \\ b and b \\ a both empty."""
    return decider.identical(a, b)


def dense_empty_oracle(scene: Scene, node: CsgNode, step: float) -> bool:
    """Brute-force dense scan over the node's box: the independent reference."""
    box = aabb(scene, node)
    if box.is_empty:
        return True
    for pts in lattice_points(scene, box, step):
        if np.any(eval_sdf_many(scene, node, pts) <= 0.0):
            return False
    return True
