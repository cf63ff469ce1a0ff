"""Planar regions with analytic membership, area, and boundary sampling.

Regions are symbolic descriptors (disk, rectangle, strip, union, translate,
image-under-a-map); membership and areas are closed-form wherever possible.
Points are numpy arrays of shape (..., 2) with coordinates (q, p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import GeometryError, UnsupportedRegionError


def as_points(x) -> np.ndarray:
    """Coerce a point or array of points to float ndarray of shape (..., 2)."""
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != 2:
        raise GeometryError(f"expected (..., 2) points, got shape {pts.shape}")
    return pts


@dataclass(frozen=True)
class BBox:
    q0: float
    q1: float
    p0: float
    p1: float

    def __post_init__(self):
        if not (self.q0 <= self.q1 and self.p0 <= self.p1):
            raise GeometryError(f"empty bounding box {self}")

    @property
    def width(self) -> float:
        return self.q1 - self.q0

    @property
    def height(self) -> float:
        return self.p1 - self.p0

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> np.ndarray:
        return np.array([(self.q0 + self.q1) / 2, (self.p0 + self.p1) / 2])

    def is_finite(self) -> bool:
        return all(map(math.isfinite, (self.q0, self.q1, self.p0, self.p1)))

    def pad(self, m: float) -> "BBox":
        return BBox(self.q0 - m, self.q1 + m, self.p0 - m, self.p1 + m)

    def union(self, other: "BBox") -> "BBox":
        return BBox(min(self.q0, other.q0), max(self.q1, other.q1),
                    min(self.p0, other.p0), max(self.p1, other.p1))

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        pts = as_points(pts)
        q, p = pts[..., 0], pts[..., 1]
        return ((q >= self.q0 + margin) & (q <= self.q1 - margin)
                & (p >= self.p0 + margin) & (p <= self.p1 - margin))

    def grid(self, nq: int, np_: int) -> np.ndarray:
        """Regular (nq*np_, 2) grid of interior-ish points (cell centers)."""
        if not self.is_finite():
            raise UnsupportedRegionError("cannot grid an unbounded box")
        qs = np.linspace(self.q0, self.q1, nq + 2)[1:-1]
        ps = np.linspace(self.p0, self.p1, np_ + 2)[1:-1]
        Q, P = np.meshgrid(qs, ps, indexing="ij")
        return np.stack([Q.ravel(), P.ravel()], axis=-1)

    def random_points(self, n: int, rng: np.random.Generator) -> np.ndarray:
        qs = rng.uniform(self.q0, self.q1, n)
        ps = rng.uniform(self.p0, self.p1, n)
        return np.stack([qs, ps], axis=-1)


class Region:
    """Base class; subclasses are immutable value objects."""

    #: True when area() returns a closed-form/invariance value, not quadrature.
    area_is_exact: bool = True

    @property
    def bbox(self) -> BBox:
        raise NotImplementedError

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        """Membership test; margin > 0 demands depth >= margin inside."""
        raise NotImplementedError

    def area(self) -> float:
        raise NotImplementedError

    def boundary_points(self, n: int = 256) -> np.ndarray:
        raise NotImplementedError

    def translate(self, v) -> "Region":
        return TranslateRegion(self, np.asarray(v, dtype=float))

    def sample_interior(self, n: int, rng: np.random.Generator,
                        margin: float = 0.0) -> np.ndarray:
        """Rejection-sample n interior points (deterministic given rng)."""
        box = self.bbox
        if not box.is_finite():
            raise UnsupportedRegionError("cannot sample an unbounded region")
        out = []
        got = 0
        for _ in range(200):
            cand = box.random_points(max(4 * n, 64), rng)
            keep = cand[self.contains(cand, margin=margin)]
            out.append(keep)
            got += len(keep)
            if got >= n:
                break
        pts = np.concatenate(out) if out else np.empty((0, 2))
        if len(pts) < n:
            raise GeometryError("interior sampling failed; region too thin for margin")
        return pts[:n]

    def grid_inside(self, nq: int, np_: int, margin: float = 0.0) -> np.ndarray:
        pts = self.bbox.grid(nq, np_)
        return pts[self.contains(pts, margin=margin)]


@dataclass(frozen=True)
class EmptyRegion(Region):
    """The empty set (e.g. estimated support of the identity map)."""

    @property
    def bbox(self) -> BBox:
        return BBox(0.0, 0.0, 0.0, 0.0)

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        pts = as_points(pts)
        return np.zeros(pts.shape[:-1], dtype=bool)

    def area(self) -> float:
        return 0.0

    def boundary_points(self, n: int = 256) -> np.ndarray:
        return np.empty((0, 2))


@dataclass(frozen=True)
class Disk(Region):
    """Round disk parameterized by its area (radius sqrt(area/pi))."""

    area_value: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.area_value <= 0:
            raise GeometryError("disk area must be positive")

    @property
    def radius(self) -> float:
        return math.sqrt(self.area_value / math.pi)

    @property
    def bbox(self) -> BBox:
        r = self.radius
        cq, cp = self.center
        return BBox(cq - r, cq + r, cp - r, cp + r)

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        pts = as_points(pts)
        d2 = (pts[..., 0] - self.center[0]) ** 2 + (pts[..., 1] - self.center[1]) ** 2
        r = self.radius - margin
        return d2 <= r * r if r > 0 else np.zeros(pts.shape[:-1], dtype=bool)

    def area(self) -> float:
        return self.area_value

    def boundary_points(self, n: int = 256) -> np.ndarray:
        th = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        r = self.radius
        return np.stack([self.center[0] + r * np.cos(th),
                         self.center[1] + r * np.sin(th)], axis=-1)


@dataclass(frozen=True)
class Rectangle(Region):
    q0: float
    q1: float
    p0: float
    p1: float

    def __post_init__(self):
        if not (self.q0 < self.q1 and self.p0 < self.p1):
            raise GeometryError("degenerate rectangle")

    @property
    def bbox(self) -> BBox:
        return BBox(self.q0, self.q1, self.p0, self.p1)

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        return self.bbox.contains(pts, margin=margin)

    def area(self) -> float:
        return (self.q1 - self.q0) * (self.p1 - self.p0)

    def boundary_points(self, n: int = 256) -> np.ndarray:
        w, h = self.q1 - self.q0, self.p1 - self.p0
        per = 2 * (w + h)
        s = np.linspace(0.0, per, n, endpoint=False)
        pts = np.empty((n, 2))
        for i, si in enumerate(s):
            if si < w:
                pts[i] = (self.q0 + si, self.p0)
            elif si < w + h:
                pts[i] = (self.q1, self.p0 + (si - w))
            elif si < 2 * w + h:
                pts[i] = (self.q1 - (si - w - h), self.p1)
            else:
                pts[i] = (self.q0, self.p1 - (si - 2 * w - h))
        return pts


@dataclass(frozen=True)
class RoundedRectangle(Region):
    """Axis-aligned rectangle with circular corners: a smooth embedded disk.

    area = width*height - (4-pi)*corner_radius^2, exactly.
    """

    center: tuple[float, float]
    width: float
    height: float
    corner_radius: float

    def __post_init__(self):
        r = self.corner_radius
        if not (0 < r <= min(self.width, self.height) / 2):
            raise GeometryError("corner radius incompatible with side lengths")

    @classmethod
    def with_area(cls, center, height: float, target_area: float,
                  corner_radius: float) -> "RoundedRectangle":
        """Solve the width so the enclosed area equals target_area exactly."""
        w = (target_area + (4 - math.pi) * corner_radius ** 2) / height
        if w < 2 * corner_radius:
            raise GeometryError("target area too small for this height/corner radius")
        return cls(tuple(center), w, height, corner_radius)

    @property
    def bbox(self) -> BBox:
        cq, cp = self.center
        return BBox(cq - self.width / 2, cq + self.width / 2,
                    cp - self.height / 2, cp + self.height / 2)

    def area(self) -> float:
        return self.width * self.height - (4 - math.pi) * self.corner_radius ** 2

    def _corner_distance(self, pts: np.ndarray) -> np.ndarray:
        # signed "rounded box" distance: <=0 inside
        cq, cp = self.center
        hw = self.width / 2 - self.corner_radius
        hh = self.height / 2 - self.corner_radius
        dq = np.abs(pts[..., 0] - cq) - hw
        dp = np.abs(pts[..., 1] - cp) - hh
        outside = np.hypot(np.maximum(dq, 0.0), np.maximum(dp, 0.0))
        inside = np.minimum(np.maximum(dq, dp), 0.0)
        return outside + inside - self.corner_radius

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        pts = as_points(pts)
        return self._corner_distance(pts) <= -margin

    def boundary_points(self, n: int = 256) -> np.ndarray:
        cq, cp = self.center
        r = self.corner_radius
        hw = self.width / 2 - r
        hh = self.height / 2 - r
        straights = 2 * (2 * hw + 2 * hh)
        arcs = 2 * math.pi * r
        per = straights + arcs
        s = np.linspace(0.0, per, n, endpoint=False)
        segs = [
            ("e", 2 * hw),  # bottom edge, left->right
            ("a", math.pi * r / 2),  # bottom-right corner
            ("e", 2 * hh),  # right edge
            ("a", math.pi * r / 2),
            ("e", 2 * hw),  # top edge
            ("a", math.pi * r / 2),
            ("e", 2 * hh),  # left edge
            ("a", math.pi * r / 2),
        ]
        pts = np.empty((n, 2))
        for i, si in enumerate(s):
            acc = 0.0
            for k, (kind, ln) in enumerate(segs):
                if si <= acc + ln or k == len(segs) - 1:
                    u = si - acc
                    pts[i] = self._boundary_seg(k, u)
                    break
                acc += ln
        return pts

    def _boundary_seg(self, k: int, u: float) -> tuple[float, float]:
        cq, cp = self.center
        r = self.corner_radius
        hw = self.width / 2 - r
        hh = self.height / 2 - r
        if k == 0:
            return (cq - hw + u, cp - hh - r)
        if k == 1:
            th = -math.pi / 2 + u / r
            return (cq + hw + r * math.cos(th), cp - hh + r * math.sin(th))
        if k == 2:
            return (cq + hw + r, cp - hh + u)
        if k == 3:
            th = u / r
            return (cq + hw + r * math.cos(th), cp + hh + r * math.sin(th))
        if k == 4:
            return (cq + hw - u, cp + hh + r)
        if k == 5:
            th = math.pi / 2 + u / r
            return (cq - hw + r * math.cos(th), cp + hh + r * math.sin(th))
        if k == 6:
            return (cq - hw - r, cp + hh - u)
        th = math.pi + u / r
        return (cq - hw + r * math.cos(th), cp - hh + r * math.sin(th))


@dataclass(frozen=True)
class RotatedRect(Region):
    """Rectangle with axes along a unit direction u and its normal."""

    center: tuple[float, float]
    axis: tuple[float, float]
    half_s: float
    half_n: float

    def _frame(self):
        u = np.asarray(self.axis, dtype=float)
        u = u / math.hypot(*u)
        return u, np.array([-u[1], u[0]])

    @property
    def bbox(self) -> BBox:
        u, n = self._frame()
        reach = np.abs(u) * self.half_s + np.abs(n) * self.half_n
        c = np.asarray(self.center)
        return BBox(c[0] - reach[0], c[0] + reach[0],
                    c[1] - reach[1], c[1] + reach[1])

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        u, n = self._frame()
        rel = as_points(pts) - np.asarray(self.center)
        return ((np.abs(rel @ u) <= self.half_s - margin)
                & (np.abs(rel @ n) <= self.half_n - margin))

    def area(self) -> float:
        return 4 * self.half_s * self.half_n

    def boundary_points(self, n: int = 256) -> np.ndarray:
        u, nv = self._frame()
        hs, hn = self.half_s, self.half_n
        per = 4 * (hs + hn)
        s = np.linspace(0.0, per, n, endpoint=False)
        c = np.asarray(self.center)
        pts = np.empty((n, 2))
        for i, si in enumerate(s):
            if si < 2 * hs:                       # bottom edge, -u -> +u
                pts[i] = c + (si - hs) * u - hn * nv
            elif si < 2 * hs + 2 * hn:            # right edge
                pts[i] = c + hs * u + (si - 2 * hs - hn) * nv
            elif si < 4 * hs + 2 * hn:            # top edge, +u -> -u
                t = si - (2 * hs + 2 * hn)
                pts[i] = c + (hs - t) * u + hn * nv
            else:                                 # left edge
                t = si - (4 * hs + 2 * hn)
                pts[i] = c - hs * u + (hn - t) * nv
        return pts


@dataclass(frozen=True)
class Strip(Region):
    """Horizontal strip p0 < p < p1, unbounded in q."""

    p0: float
    p1: float

    area_is_exact = True

    @property
    def bbox(self) -> BBox:
        return BBox(-math.inf, math.inf, self.p0, self.p1)

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        pts = as_points(pts)
        p = pts[..., 1]
        return (p >= self.p0 + margin) & (p <= self.p1 - margin)

    def area(self) -> float:
        raise UnsupportedRegionError("strip has infinite area")

    def boundary_points(self, n: int = 256) -> np.ndarray:
        raise UnsupportedRegionError("strip boundary is unbounded")


@dataclass(frozen=True)
class UnionRegion(Region):
    parts: tuple[Region, ...]

    def __init__(self, parts: Sequence[Region]):
        object.__setattr__(self, "parts", tuple(parts))
        if not self.parts:
            raise GeometryError("empty union")

    @property
    def bbox(self) -> BBox:
        box = self.parts[0].bbox
        for r in self.parts[1:]:
            box = box.union(r.bbox)
        return box

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        acc = self.parts[0].contains(pts, margin=margin)
        for r in self.parts[1:]:
            acc = acc | r.contains(pts, margin=margin)
        return acc

    def area(self) -> float:
        """Sum of part areas; valid for the disjoint unions used here."""
        return sum(r.area() for r in self.parts)

    def boundary_points(self, n: int = 256) -> np.ndarray:
        k = max(8, n // len(self.parts))
        return np.concatenate([r.boundary_points(k) for r in self.parts])


@dataclass(frozen=True)
class TranslateRegion(Region):
    base: Region
    vector: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def bbox(self) -> BBox:
        b = self.base.bbox
        vq, vp = self.vector
        return BBox(b.q0 + vq, b.q1 + vq, b.p0 + vp, b.p1 + vp)

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        return self.base.contains(as_points(pts) - self.vector, margin=margin)

    def area(self) -> float:
        return self.base.area()

    def boundary_points(self, n: int = 256) -> np.ndarray:
        return self.base.boundary_points(n) + self.vector


class ImageRegion(Region):
    """Image of a region under an invertible map (duck-typed Diffeo).

    The map must expose forward(pts), inverse(pts) and an `area_preserving`
    flag. For area-preserving maps area() is returned by invariance without
    re-integration.
    """

    def __init__(self, base: Region, mapping, bbox_pad: float = 0.0):
        self.base = base
        self.mapping = mapping
        self._bbox = self._estimate_bbox(bbox_pad)

    @property
    def area_is_exact(self) -> bool:
        return bool(getattr(self.mapping, "area_preserving", False))

    def _estimate_bbox(self, pad: float) -> BBox:
        bd = self.boundary_points(256)
        return BBox(bd[:, 0].min(), bd[:, 0].max(),
                    bd[:, 1].min(), bd[:, 1].max()).pad(pad)

    @property
    def bbox(self) -> BBox:
        return self._bbox

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        pre = self.mapping.inverse(as_points(pts))
        return self.base.contains(pre, margin=margin)

    def area(self) -> float:
        if not getattr(self.mapping, "area_preserving", False):
            raise UnsupportedRegionError(
                "area of an image under a non-area-preserving map is not tracked")
        return self.base.area()

    def boundary_points(self, n: int = 256) -> np.ndarray:
        return self.mapping.forward(self.base.boundary_points(n))


def min_cloud_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Minimum pairwise distance between two point clouds."""
    a = as_points(a)
    b = as_points(b)
    if len(a) == 0 or len(b) == 0:
        return math.inf
    best = math.inf
    # chunked to bound memory on large clouds
    for i in range(0, len(a), 512):
        d = a[i:i + 512, None, :] - b[None, :, :]
        best = min(best, float(np.min(np.einsum("ijk,ijk->ij", d, d))))
    return math.sqrt(best)


def hausdorff_distance(a: Region, b: Region, n: int = 256) -> float:
    """Symmetric Hausdorff distance between boundary sample polygons."""
    pa = a.boundary_points(n)
    pb = b.boundary_points(n)

    def one_sided(x, y):
        d = x[:, None, :] - y[None, :, :]
        return float(np.max(np.sqrt(np.min(np.einsum("ijk,ijk->ij", d, d), axis=1))))

    return max(one_sided(pa, pb), one_sided(pb, pa))


def winding_number(curve: np.ndarray, center) -> int:
    """Winding of a closed sampled curve around a point (angle accumulation)."""
    curve = as_points(curve)
    c = np.asarray(center, dtype=float)
    v = curve - c
    ang = np.arctan2(v[:, 1], v[:, 0])
    dth = np.diff(np.concatenate([ang, ang[:1]]))
    dth = (dth + math.pi) % (2 * math.pi) - math.pi
    return int(round(float(np.sum(dth) / (2 * math.pi))))


def shoelace_area(loop: np.ndarray) -> float:
    """Signed area enclosed by a closed sampled loop."""
    loop = as_points(loop)
    q, p = loop[:, 0], loop[:, 1]
    qn, pn = np.roll(q, -1), np.roll(p, -1)
    return 0.5 * float(np.sum(q * pn - qn * p))
