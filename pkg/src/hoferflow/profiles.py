"""Smooth planar profiles with analytic gradients.

Profiles form a small expression tree (polynomials, radial functions, bumps,
products, sums, scalar multiples). Every node evaluates vectorized over
points of shape (..., 2) and returns gradients of shape (..., 2), so flows
and sampling scans can run on whole grids at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import GeometryError
from .geometry import (BBox, Disk, Rectangle, Region, RotatedRect,
                       RoundedRectangle, Strip, UnionRegion, as_points)


# ---------------------------------------------------------------------------
# scalar transition functions
# ---------------------------------------------------------------------------

def _theta(s: np.ndarray) -> np.ndarray:
    # exp(-1/s) for s > 0, else 0; underflow handled by where-mask
    out = np.zeros_like(s)
    pos = s > 0
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        out[pos] = np.exp(-1.0 / s[pos])
    return out


def smoothstep(u) -> np.ndarray:
    """C^inf step: 0 for u<=0, 1 for u>=1, exp(-1/u)-type blend between."""
    u = np.asarray(u, dtype=float)
    a = _theta(u)
    b = _theta(1.0 - u)
    with np.errstate(invalid="ignore"):
        s = np.where(a + b > 0, a / np.where(a + b > 0, a + b, 1.0), 0.0)
    return np.where(u >= 1.0, 1.0, np.where(u <= 0.0, 0.0, s))


def smoothstep_d(u) -> np.ndarray:
    """Derivative of `smoothstep`."""
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    out = np.zeros_like(u)
    if np.any(inside):
        ui = u[inside]
        a = np.exp(-1.0 / ui)
        b = np.exp(-1.0 / (1.0 - ui))
        da = a / ui ** 2
        db = b / (1.0 - ui) ** 2
        out[inside] = (da * b + a * db) / (a + b) ** 2
    return out


def quintic_step(u) -> np.ndarray:
    """C^2 polynomial step 6u^5 - 15u^4 + 10u^3 clamped to [0, 1]."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return u ** 3 * (10.0 + u * (-15.0 + 6.0 * u))


def quintic_step_d(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    out = np.zeros_like(u)
    ui = u[inside]
    out[inside] = 30.0 * ui ** 2 * (1.0 - ui) ** 2
    return out


def quintic_step_int(u) -> np.ndarray:
    """Antiderivative of `quintic_step` with value 0 at u=0 (clamped tails)."""
    u = np.asarray(u, dtype=float)
    uc = np.clip(u, 0.0, 1.0)
    core = uc ** 4 * (2.5 + uc * (-3.0 + uc))
    return core + np.maximum(u - 1.0, 0.0)


def window(x, o0: float, i0: float, i1: float, o1: float) -> np.ndarray:
    """Plateau window: 0 outside (o0,o1), 1 on [i0,i1], smooth transitions."""
    x = np.asarray(x, dtype=float)
    up = smoothstep((x - o0) / (i0 - o0)) if i0 > o0 else np.ones_like(x)
    down = 1.0 - smoothstep((x - i1) / (o1 - i1)) if o1 > i1 else np.ones_like(x)
    return up * down


def window_d(x, o0: float, i0: float, i1: float, o1: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if i0 > o0:
        up = smoothstep((x - o0) / (i0 - o0))
        dup = smoothstep_d((x - o0) / (i0 - o0)) / (i0 - o0)
    else:
        up, dup = np.ones_like(x), np.zeros_like(x)
    if o1 > i1:
        down = 1.0 - smoothstep((x - i1) / (o1 - i1))
        ddown = -smoothstep_d((x - i1) / (o1 - i1)) / (o1 - i1)
    else:
        down, ddown = np.ones_like(x), np.zeros_like(x)
    return dup * down + up * ddown


def _step_vd(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """smoothstep value and derivative in one pass."""
    s = np.zeros_like(u)
    d = np.zeros_like(u)
    inside = (u > 0.0) & (u < 1.0)
    if np.any(inside):
        ui = u[inside]
        a = np.exp(-1.0 / ui)
        b = np.exp(-1.0 / (1.0 - ui))
        tot = a + b
        s[inside] = a / tot
        d[inside] = (a / ui ** 2 * b + a * b / (1.0 - ui) ** 2) / tot ** 2
    s[u >= 1.0] = 1.0
    return s, d


def window_vd(x, o0: float, i0: float, i1: float, o1: float
              ) -> tuple[np.ndarray, np.ndarray]:
    """Plateau window value and derivative together (one transition pass)."""
    x = np.asarray(x, dtype=float)
    if i0 > o0:
        up, dup = _step_vd((x - o0) / (i0 - o0))
        dup = dup / (i0 - o0)
    else:
        up, dup = np.ones_like(x), np.zeros_like(x)
    if o1 > i1:
        sdn, ddn = _step_vd((x - i1) / (o1 - i1))
        down = 1.0 - sdn
        ddown = -ddn / (o1 - i1)
    else:
        down, ddown = np.ones_like(x), np.zeros_like(x)
    return up * down, dup * down + up * ddown


# ---------------------------------------------------------------------------
# profile tree
# ---------------------------------------------------------------------------

class SmoothProfile:
    """A smooth function R^2 -> R with an analytic gradient."""

    #: compact support region when known; None means not tracked/unbounded
    support: Optional[Region] = None

    def value(self, pts) -> np.ndarray:
        raise NotImplementedError

    def grad(self, pts) -> np.ndarray:
        raise NotImplementedError

    def __add__(self, other: "SmoothProfile") -> "SmoothProfile":
        return SumProfile([self, other])

    def __mul__(self, other):
        if isinstance(other, SmoothProfile):
            return ProductProfile(self, other)
        return ScaledProfile(float(other), self)

    def __rmul__(self, other):
        return ScaledProfile(float(other), self)

    def __neg__(self):
        return ScaledProfile(-1.0, self)


@dataclass
class Polynomial2D(SmoothProfile):
    """sum_c coeffs[(i, j)] * q^i * p^j."""

    coeffs: dict

    support = None

    def value(self, pts) -> np.ndarray:
        pts = as_points(pts)
        q, p = pts[..., 0], pts[..., 1]
        out = np.zeros(pts.shape[:-1])
        for (i, j), c in self.coeffs.items():
            out = out + c * q ** i * p ** j
        return out

    def grad(self, pts) -> np.ndarray:
        pts = as_points(pts)
        q, p = pts[..., 0], pts[..., 1]
        gq = np.zeros(pts.shape[:-1])
        gp = np.zeros(pts.shape[:-1])
        for (i, j), c in self.coeffs.items():
            if i > 0:
                gq = gq + c * i * q ** (i - 1) * p ** j
            if j > 0:
                gp = gp + c * j * q ** i * p ** (j - 1)
        return np.stack([gq, gp], axis=-1)


@dataclass
class RadialFunction(SmoothProfile):
    """g(s) with s = |x - center|^2; g and dg/ds supplied as callables."""

    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]
    center: tuple[float, float] = (0.0, 0.0)
    support: Optional[Region] = None

    def _s(self, pts):
        pts = as_points(pts)
        return ((pts[..., 0] - self.center[0]) ** 2
                + (pts[..., 1] - self.center[1]) ** 2)

    def value(self, pts) -> np.ndarray:
        return np.asarray(self.g(self._s(pts)), dtype=float)

    def grad(self, pts) -> np.ndarray:
        pts = as_points(pts)
        ds = np.asarray(self.dg(self._s(pts)), dtype=float)
        rel = pts - np.asarray(self.center)
        return 2.0 * ds[..., None] * rel


@dataclass
class ProfileOfQ(SmoothProfile):
    """f(q): a one-dimensional profile read off the first coordinate."""

    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    support: Optional[Region] = None

    def value(self, pts) -> np.ndarray:
        return np.asarray(self.f(as_points(pts)[..., 0]), dtype=float)

    def grad(self, pts) -> np.ndarray:
        pts = as_points(pts)
        gq = np.asarray(self.df(pts[..., 0]), dtype=float)
        return np.stack([gq, np.zeros_like(gq)], axis=-1)


class RadialBump(SmoothProfile):
    """1 inside radius r_in around center, 0 beyond r_out, C^inf between."""

    def __init__(self, center, r_in: float, r_out: float):
        if not (0 < r_in < r_out):
            raise GeometryError("need 0 < r_in < r_out")
        self.center = np.asarray(center, dtype=float)
        self.r_in = r_in
        self.r_out = r_out
        self.support = Disk(math.pi * r_out ** 2, tuple(self.center))

    def value(self, pts) -> np.ndarray:
        pts = as_points(pts)
        r = np.sqrt(np.sum((pts - self.center) ** 2, axis=-1))
        return 1.0 - smoothstep((r - self.r_in) / (self.r_out - self.r_in))

    def grad(self, pts) -> np.ndarray:
        pts = as_points(pts)
        rel = pts - self.center
        r = np.sqrt(np.sum(rel ** 2, axis=-1))
        u = (r - self.r_in) / (self.r_out - self.r_in)
        mag = -smoothstep_d(u) / (self.r_out - self.r_in)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[..., None] > 1e-300, rel / np.maximum(r, 1e-300)[..., None], 0.0)
        return mag[..., None] * unit


class BoxBump(SmoothProfile):
    """Product of q- and p-windows: 1 on the inner box, 0 outside the outer."""

    def __init__(self, inner: BBox, outer: BBox):
        if not (outer.q0 < inner.q0 <= inner.q1 < outer.q1
                and outer.p0 < inner.p0 <= inner.p1 < outer.p1):
            raise GeometryError("inner box must be strictly inside outer box")
        self.inner = inner
        self.outer = outer
        self.support = Rectangle(outer.q0, outer.q1, outer.p0, outer.p1)

    def value(self, pts) -> np.ndarray:
        pts = as_points(pts)
        wq = window(pts[..., 0], self.outer.q0, self.inner.q0, self.inner.q1, self.outer.q1)
        wp = window(pts[..., 1], self.outer.p0, self.inner.p0, self.inner.p1, self.outer.p1)
        return wq * wp

    def grad(self, pts) -> np.ndarray:
        pts = as_points(pts)
        q, p = pts[..., 0], pts[..., 1]
        wq, dwq = window_vd(q, self.outer.q0, self.inner.q0, self.inner.q1, self.outer.q1)
        wp, dwp = window_vd(p, self.outer.p0, self.inner.p0, self.inner.p1, self.outer.p1)
        return np.stack([dwq * wp, wq * dwp], axis=-1)


class RotatedBoxBump(SmoothProfile):
    """Plateau window in a rotated orthonormal frame (for slanted slabs)."""

    def __init__(self, center, axis, inner_half: tuple[float, float],
                 outer_half: tuple[float, float]):
        axis = np.asarray(axis, dtype=float)
        self.center = np.asarray(center, dtype=float)
        self.u = axis / math.hypot(*axis)
        self.v = np.array([-self.u[1], self.u[0]])
        (is_, in_), (os_, on_) = inner_half, outer_half
        if not (0 < is_ < os_ and 0 < in_ < on_):
            raise GeometryError("need positive inner < outer half-extents")
        self.inner_half = (is_, in_)
        self.outer_half = (os_, on_)
        self.support = RotatedRect(tuple(self.center), tuple(self.u), os_, on_)

    def _coords(self, pts):
        rel = as_points(pts) - self.center
        return rel @ self.u, rel @ self.v

    def value(self, pts) -> np.ndarray:
        s, n = self._coords(pts)
        (is_, in_), (os_, on_) = self.inner_half, self.outer_half
        ws = window(s, -os_, -is_, is_, os_)
        wn = window(n, -on_, -in_, in_, on_)
        return ws * wn

    def grad(self, pts) -> np.ndarray:
        s, n = self._coords(pts)
        (is_, in_), (os_, on_) = self.inner_half, self.outer_half
        ws, dws = window_vd(s, -os_, -is_, is_, os_)
        wn, dwn = window_vd(n, -on_, -in_, in_, on_)
        gs = (dws * wn)[..., None] * self.u
        gn = (ws * dwn)[..., None] * self.v
        return gs + gn


class PWindow(SmoothProfile):
    """Window in the p-coordinate only (for strip-supported cutoffs)."""

    def __init__(self, o0, i0, i1, o1):
        self.args = (float(o0), float(i0), float(i1), float(o1))
        self.support = Strip(self.args[0], self.args[3])

    def value(self, pts) -> np.ndarray:
        return window(as_points(pts)[..., 1], *self.args)

    def grad(self, pts) -> np.ndarray:
        pts = as_points(pts)
        gp = window_d(pts[..., 1], *self.args)
        return np.stack([np.zeros_like(gp), gp], axis=-1)


class SumProfile(SmoothProfile):
    def __init__(self, terms: Sequence[SmoothProfile]):
        self.terms = list(terms)
        sups = [t.support for t in self.terms]
        self.support = UnionRegion([s for s in sups if s is not None]) \
            if all(s is not None for s in sups) else None

    def value(self, pts) -> np.ndarray:
        pts = as_points(pts)
        out = np.zeros(pts.shape[:-1])
        for t in self.terms:
            out = out + t.value(pts)
        return out

    def grad(self, pts) -> np.ndarray:
        pts = as_points(pts)
        out = np.zeros(pts.shape)
        for t in self.terms:
            out = out + t.grad(pts)
        return out


class ProductProfile(SmoothProfile):
    def __init__(self, a: SmoothProfile, b: SmoothProfile):
        self.a = a
        self.b = b
        # the product is supported where both factors live; keep the compact one
        self.support = a.support if a.support is not None else b.support

    def value(self, pts) -> np.ndarray:
        return self.a.value(pts) * self.b.value(pts)

    def grad(self, pts) -> np.ndarray:
        va = self.a.value(pts)[..., None]
        vb = self.b.value(pts)[..., None]
        return va * self.b.grad(pts) + vb * self.a.grad(pts)


class ScaledProfile(SmoothProfile):
    def __init__(self, c: float, a: SmoothProfile):
        self.c = float(c)
        self.a = a
        self.support = a.support

    def value(self, pts) -> np.ndarray:
        return self.c * self.a.value(pts)

    def grad(self, pts) -> np.ndarray:
        return self.c * self.a.grad(pts)


class SmoothUnionBump(SmoothProfile):
    """1 - prod(1 - rho_k): equals 1 where any factor is 1; range [0, 1]."""

    def __init__(self, bumps: Sequence[SmoothProfile]):
        if not bumps:
            raise GeometryError("empty bump union")
        self.bumps = list(bumps)
        sups = [b.support for b in self.bumps]
        self.support = UnionRegion([s for s in sups if s is not None]) \
            if all(s is not None for s in sups) else None

    def value(self, pts) -> np.ndarray:
        pts = as_points(pts)
        acc = np.ones(pts.shape[:-1])
        for b in self.bumps:
            acc = acc * (1.0 - b.value(pts))
        return 1.0 - acc

    def grad(self, pts) -> np.ndarray:
        pts = as_points(pts)
        vals = [b.value(pts) for b in self.bumps]
        grads = [b.grad(pts) for b in self.bumps]
        out = np.zeros(pts.shape)
        for k in range(len(self.bumps)):
            rest = np.ones(pts.shape[:-1])
            for j, v in enumerate(vals):
                if j != k:
                    rest = rest * (1.0 - v)
            out = out + rest[..., None] * grads[k]
        return out


# ---------------------------------------------------------------------------
# bump construction
# ---------------------------------------------------------------------------

def _strictly_inside(inner: Region, outer: Region) -> float:
    """Return a positive clearance if closure(inner) sits inside outer."""
    pts = inner.boundary_points(128)
    lo, hi = 0.0, max(inner.bbox.diagonal, 1e-6)
    if not bool(np.all(outer.contains(pts))):
        raise GeometryError("inner region is not inside outer region")
    # bisect the largest uniform margin still containing the inner boundary
    for _ in range(40):
        mid = (lo + hi) / 2
        if bool(np.all(outer.contains(pts, margin=mid))):
            lo = mid
        else:
            hi = mid
    if lo <= 0:
        raise GeometryError("inner region touches the boundary of outer region")
    return lo


def make_bump(inner: Region, outer: Region) -> SmoothProfile:
    """Smooth cutoff: 1 on `inner`, 0 outside `outer`, values in [0, 1].

    Disk pairs get a radial transition; box-like pairs get per-axis windows.
    A union inner produces a smooth union of per-part bumps.
    """
    if isinstance(inner, UnionRegion):
        return SmoothUnionBump([make_bump(part, outer) for part in inner.parts])

    clearance = _strictly_inside(inner, outer)

    if isinstance(inner, Disk) and isinstance(outer, Disk):
        # largest radius around the inner center still inside the outer disk
        reach = outer.radius - math.hypot(inner.center[0] - outer.center[0],
                                          inner.center[1] - outer.center[1])
        if reach <= inner.radius:
            raise GeometryError("inner disk does not fit in outer disk")
        return RadialBump(inner.center, inner.radius,
                          inner.radius + 0.9 * (reach - inner.radius))

    if isinstance(outer, Disk):
        # radial transition around the outer center covering inner's far corner
        ib = inner.bbox
        corners = np.array([[ib.q0, ib.p0], [ib.q0, ib.p1],
                            [ib.q1, ib.p0], [ib.q1, ib.p1]])
        r_in = float(np.max(np.sqrt(np.sum((corners - np.asarray(outer.center)) ** 2,
                                           axis=-1))))
        if r_in >= outer.radius:
            raise GeometryError("inner bounding box does not fit in outer disk")
        return RadialBump(outer.center, r_in, r_in + 0.9 * (outer.radius - r_in))

    if isinstance(outer, Strip):
        ib = inner.bbox
        m = min(clearance, 0.45 * (outer.p1 - outer.p0 - ib.height))
        q_margin = 0.25 * max(ib.width, ib.height)
        return BoxBump(ib, BBox(ib.q0 - q_margin, ib.q1 + q_margin,
                                max(ib.p0 - m, outer.p0 + 1e-12),
                                min(ib.p1 + m, outer.p1 - 1e-12)))

    ob = outer.bbox
    ib = inner.bbox
    if isinstance(outer, RoundedRectangle):
        # shrink the usable outer box so the support clears the rounded corners
        r = outer.corner_radius
        ob = BBox(ob.q0 + r * 0.3, ob.q1 - r * 0.3, ob.p0 + r * 0.3, ob.p1 - r * 0.3)
    pad = 0.9
    out_box = BBox(ib.q0 - pad * (ib.q0 - ob.q0), ib.q1 + pad * (ob.q1 - ib.q1),
                   ib.p0 - pad * (ib.p0 - ob.p0), ib.p1 + pad * (ob.p1 - ib.p1))
    return BoxBump(ib, out_box)
