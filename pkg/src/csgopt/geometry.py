"""Geometric primitives and axis-aligned bounding boxes.

Every primitive is a "halfspace" in the CSG sense: a point-set described by
an exact signed distance function (negative inside, zero on the surface,
positive outside).  All SDFs here are exact Euclidean distances, hence
1-Lipschitz; the spatial samplers rely on that bound for sound cell pruning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

Vec3 = tuple[float, float, float]

_ORTHO_TOL = 1e-9
_UNIT_TOL = 1e-9


def _as_points(p: np.ndarray) -> np.ndarray:
    pts = np.asarray(p, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected points of shape (n, 3), got {pts.shape}")
    return pts


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box [lo, hi]; lo > hi in any axis means empty."""

    lo: Vec3
    hi: Vec3

    @staticmethod
    def empty() -> "Aabb":
        return Aabb((math.inf,) * 3, (-math.inf,) * 3)

    @property
    def is_empty(self) -> bool:
        return any(l > h for l, h in zip(self.lo, self.hi))

    @property
    def dims(self) -> Vec3:
        if self.is_empty:
            return (0.0, 0.0, 0.0)
        return tuple(h - l for l, h in zip(self.lo, self.hi))  # type: ignore[return-value]

    @property
    def center(self) -> Vec3:
        return tuple(0.5 * (l + h) for l, h in zip(self.lo, self.hi))  # type: ignore[return-value]

    def union(self, other: "Aabb") -> "Aabb":
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return Aabb(
            tuple(min(a, b) for a, b in zip(self.lo, other.lo)),
            tuple(max(a, b) for a, b in zip(self.hi, other.hi)),
        )

    def intersect(self, other: "Aabb") -> "Aabb":
        if self.is_empty or other.is_empty:
            return Aabb.empty()
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        box = Aabb(lo, hi)
        return box if not box.is_empty else Aabb.empty()

    def pad(self, amount: float) -> "Aabb":
        if self.is_empty:
            return self
        return Aabb(
            tuple(l - amount for l in self.lo),
            tuple(h + amount for h in self.hi),
        )

    def contains_point(self, p) -> bool:
        return all(l <= v <= h for v, l, h in zip(p, self.lo, self.hi))

    def contains_box(self, other: "Aabb") -> bool:
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        return all(sl <= ol for sl, ol in zip(self.lo, other.lo)) and all(
            oh <= sh for sh, oh in zip(self.hi, other.hi)
        )


@dataclass(frozen=True)
class Sphere:
    center: Vec3
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")
        object.__setattr__(self, "_c", np.asarray(self.center, dtype=np.float64))

    def sdf(self, p) -> np.ndarray:
        pts = _as_points(p)
        return np.linalg.norm(pts - self._c, axis=1) - self.radius

    def aabb(self) -> Aabb:
        r = self.radius
        return Aabb(
            tuple(c - r for c in self.center),
            tuple(c + r for c in self.center),
        )


@dataclass(frozen=True)
class Box:
    """Oriented box; `rotation` columns are the box's local axes (orthonormal)."""

    center: Vec3
    half_extents: Vec3
    rotation: tuple[Vec3, Vec3, Vec3] = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    def __post_init__(self):
        he = np.asarray(self.half_extents, dtype=np.float64)
        if not np.all(he > 0):
            raise ValueError("box half_extents must be positive")
        r = np.asarray(self.rotation, dtype=np.float64)
        if r.shape != (3, 3):
            raise ValueError("rotation must be a 3x3 matrix")
        if not np.allclose(r.T @ r, np.eye(3), atol=_ORTHO_TOL, rtol=0.0):
            raise ValueError("rotation must be orthonormal")
        object.__setattr__(self, "_c", np.asarray(self.center, dtype=np.float64))
        object.__setattr__(self, "_he", he)
        object.__setattr__(self, "_r", r)

    def sdf(self, p) -> np.ndarray:
        pts = _as_points(p)
        local = (pts - self._c) @ self._r
        q = np.abs(local) - self._he
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        inside = np.minimum(np.max(q, axis=1), 0.0)
        return outside + inside

    def aabb(self) -> Aabb:
        ext = np.abs(self._r) @ self._he
        return Aabb(tuple(self._c - ext), tuple(self._c + ext))


@dataclass(frozen=True)
class Cylinder:
    """Finite (capped) cylinder around `axis` through `center`."""

    center: Vec3
    axis: Vec3
    radius: float
    half_height: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("cylinder radius must be positive")
        if not self.half_height > 0:
            raise ValueError("cylinder half_height must be positive")
        a = np.asarray(self.axis, dtype=np.float64)
        if abs(np.linalg.norm(a) - 1.0) > _UNIT_TOL:
            raise ValueError("cylinder axis must be a unit vector")
        object.__setattr__(self, "_c", np.asarray(self.center, dtype=np.float64))
        object.__setattr__(self, "_a", a)

    def sdf(self, p) -> np.ndarray:
        pts = _as_points(p)
        d = pts - self._c
        y = d @ self._a
        radial = np.linalg.norm(d - y[:, None] * self._a, axis=1)
        dr = radial - self.radius
        dy = np.abs(y) - self.half_height
        q = np.stack([dr, dy], axis=1)
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        inside = np.minimum(np.max(q, axis=1), 0.0)
        return outside + inside

    def aabb(self) -> Aabb:
        ext = np.empty(3)
        for i in range(3):
            ai = abs(self._a[i])
            ext[i] = ai * self.half_height + self.radius * math.sqrt(max(0.0, 1.0 - ai * ai))
        return Aabb(tuple(self._c - ext), tuple(self._c + ext))


Shape = Union[Sphere, Box, Cylinder]


@dataclass(frozen=True)
class Halfspace:
    """A primitive with a scene-unique id."""

    id: int
    shape: Shape

    def sdf(self, p) -> np.ndarray:
        return self.shape.sdf(p)

    def aabb(self) -> Aabb:
        return self.shape.aabb()
