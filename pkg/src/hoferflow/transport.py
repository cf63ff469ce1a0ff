"""Constructive transport and normalization maps.

Covers 1-D mass transport between densities (cumulative inversion),
separable/radial planar versions, compactly supported point and region
transport, star-shaped boundary normalization, and explicit area-preserving
gadgets (vertical shears and fiberwise squeezes) used to straighten channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (GeometryError, MassError, ToleranceError,
                     UnsupportedRegionError)
from .flow import (AutonomousHamiltonian, DEFAULT_CONFIG, Diffeo, ExplicitAtom,
                   FlowConfig, TimeDependentHamiltonian, flow_map)
from .geometry import (BBox, Disk, Rectangle, Region, as_points,
                       min_cloud_distance)
from .profiles import (BoxBump, Polynomial2D, SmoothProfile, smoothstep,
                       smoothstep_d, window, window_d)
from .quadrature import CumulativeIntegral


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

@dataclass
class Density1D:
    """Strictly positive density on an interval [a, b]."""

    fn: Callable[[np.ndarray], np.ndarray]
    a: float
    b: float
    name: str = "density"

    def __post_init__(self):
        probe = self.fn(np.linspace(self.a, self.b, 513))
        if np.any(np.asarray(probe) <= 0):
            raise MassError(f"density '{self.name}' is not strictly positive")
        self._cum = CumulativeIntegral(self.fn, self.a, self.b, cells=1024)

    def __call__(self, t):
        return np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=float)

    @property
    def mass(self) -> float:
        return self._cum.total

    def cumulative(self, t):
        return self._cum(t)

    def quantile(self, m):
        m = np.asarray(m, dtype=float)
        if m.ndim == 0:
            return self._cum.invert(float(m))
        return np.array([self._cum.invert(float(v)) for v in m])


@dataclass
class SeparableDensity2D:
    """u(q) * v(p) on a rectangle."""

    uq: Density1D
    vp: Density1D

    @property
    def mass(self) -> float:
        return self.uq.mass * self.vp.mass

    def __call__(self, pts):
        pts = as_points(pts)
        return self.uq(pts[..., 0]) * self.vp(pts[..., 1])


@dataclass
class RadialDensity2D:
    """g(s) with s = r^2, on the disk r <= R; planar mass = pi * int_0^{R^2} g."""

    g: Callable[[np.ndarray], np.ndarray]
    radius: float
    name: str = "radial"

    def __post_init__(self):
        self.s_density = Density1D(self.g, 0.0, self.radius ** 2,
                                   name=self.name + "_s")

    @property
    def mass(self) -> float:
        return math.pi * self.s_density.mass

    def __call__(self, pts):
        pts = as_points(pts)
        s = pts[..., 0] ** 2 + pts[..., 1] ** 2
        return np.asarray(self.g(s), dtype=float)


# ---------------------------------------------------------------------------
# monotone 1-D maps
# ---------------------------------------------------------------------------

class MonotoneMap1D:
    """Strictly increasing map between intervals, with derivative and inverse."""

    def __init__(self, value, deriv, domain: tuple[float, float],
                 codomain: tuple[float, float], inverse=None, label: str = "map"):
        self._value = value
        self._deriv = deriv
        self.domain = domain
        self.codomain = codomain
        self._inverse = inverse
        self.label = label

    def value(self, t):
        return np.asarray(self._value(np.asarray(t, dtype=float)), dtype=float)

    def deriv(self, t):
        return np.asarray(self._deriv(np.asarray(t, dtype=float)), dtype=float)

    def inverse(self, y):
        if self._inverse is not None:
            return np.asarray(self._inverse(np.asarray(y, dtype=float)), dtype=float)
        return _monotone_inverse(self.value, self.deriv, y,
                                 self.domain[0], self.domain[1])


def _monotone_inverse(value, deriv, y, lo_bound, hi_bound, iters: int = 200):
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    yy = np.atleast_1d(y).astype(float)
    lo = np.full_like(yy, lo_bound)
    hi = np.full_like(yy, hi_bound)
    t = 0.5 * (lo + hi)
    for _ in range(iters):
        r = value(t) - yy
        lo = np.where(r < 0, t, lo)
        hi = np.where(r > 0, t, hi)
        d = deriv(t)
        step = np.where(d > 0, r / np.where(d > 0, d, 1.0), 0.0)
        t_new = t - step
        bad = (t_new <= lo) | (t_new >= hi) | ~np.isfinite(t_new)
        t_new = np.where(bad, 0.5 * (lo + hi), t_new)
        if float(np.max(np.abs(t_new - t))) < 1e-14 * max(1.0, abs(hi_bound)):
            t = t_new
            break
        t = t_new
    out = np.clip(t, lo_bound, hi_bound)
    return float(out[0]) if scalar else out


def mass_transport_1d(d0: Density1D, d1: Density1D,
                      mass_rtol: float = 1e-9) -> MonotoneMap1D:
    """Monotone psi with d1(psi(t)) psi'(t) = d0(t) (cumulative inversion)."""
    if abs(d0.mass - d1.mass) > mass_rtol * max(d0.mass, d1.mass):
        raise MassError(f"masses differ: {d0.mass:.12g} vs {d1.mass:.12g}")
    scale = d1.mass / d0.mass  # exact-mass normalization removes the tiny gap

    def value(t):
        return d1.quantile(np.clip(d0.cumulative(t) * scale, 0.0, d1.mass))

    def deriv(t):
        return d0(t) * scale / d1(value(t))

    def inverse(y):
        return d0.quantile(np.clip(d1.cumulative(y) / scale, 0.0, d0.mass))

    return MonotoneMap1D(value, deriv, (d0.a, d0.b), (d1.a, d1.b),
                         inverse=inverse, label="mass_transport")


def pullback_residual_1d(psi: MonotoneMap1D, d0: Density1D, d1: Density1D,
                         n: int = 512) -> float:
    """max |d1(psi) psi_dot - d0| with psi_dot from 4th-order differences."""
    h = (d0.b - d0.a) / (64 * n)
    t = np.linspace(d0.a + 4 * h, d0.b - 4 * h, n)
    vals = {k: psi.value(t + k * h) for k in (-2, -1, 1, 2)}
    dnum = (vals[-2] - 8 * vals[-1] + 8 * vals[1] - vals[2]) / (12 * h)
    return float(np.max(np.abs(d1(psi.value(t)) * dnum - d0(t))))


# ---------------------------------------------------------------------------
# separable / radial planar transport
# ---------------------------------------------------------------------------

class _SeparableAtom(ExplicitAtom):
    def __init__(self, mq: MonotoneMap1D, mp: MonotoneMap1D,
                 area_preserving: bool):
        def fwd(pts):
            pts = as_points(pts)
            return np.stack([mq.value(pts[..., 0]), mp.value(pts[..., 1])], axis=-1)

        def inv(pts):
            pts = as_points(pts)
            return np.stack([mq.inverse(pts[..., 0]), mp.inverse(pts[..., 1])], axis=-1)

        super().__init__(fwd, inv, name="separable_transport",
                         area_preserving=area_preserving)


class _RadialAtom(ExplicitAtom):
    """x -> sqrt(smap(r^2)) * x/r with a monotone map in s = r^2."""

    def __init__(self, smap: MonotoneMap1D, area_preserving: bool):
        def fwd(pts):
            pts = as_points(pts)
            s = pts[..., 0] ** 2 + pts[..., 1] ** 2
            s2 = np.asarray(smap.value(np.clip(s, *smap.domain)), dtype=float)
            with np.errstate(invalid="ignore", divide="ignore"):
                fac = np.where(s > 0, np.sqrt(np.where(s > 0, s2 / np.maximum(s, 1e-300), 1.0)), 1.0)
            return pts * fac[..., None]

        def inv(pts):
            pts = as_points(pts)
            s2 = pts[..., 0] ** 2 + pts[..., 1] ** 2
            s = np.asarray(smap.inverse(np.clip(s2, *smap.codomain)), dtype=float)
            with np.errstate(invalid="ignore", divide="ignore"):
                fac = np.where(s2 > 0, np.sqrt(np.where(s2 > 0, s / np.maximum(s2, 1e-300), 1.0)), 1.0)
            return pts * fac[..., None]

        super().__init__(fwd, inv, name="radial_transport",
                         area_preserving=area_preserving)


def moser_separable_2d(w0, w1) -> Diffeo:
    """Planar volume normalization at separable or radial scope.

    Separable densities on a rectangle factor into two 1-D transports; radial
    densities on a disk reduce to one transport in s = r^2. Component
    (quantile) interfaces are preserved because monotone factor maps fix
    equal-mass cut lines.
    """
    if isinstance(w0, SeparableDensity2D) and isinstance(w1, SeparableDensity2D):
        if abs(w0.mass - w1.mass) > 1e-9 * max(w0.mass, w1.mass):
            raise MassError("total masses differ")
        # normalize factor masses so each 1-D pair matches exactly
        aq = w1.uq.mass / w0.uq.mass
        mq = mass_transport_1d(w0.uq, Density1D(lambda t: w1.uq(t) / aq,
                                                w1.uq.a, w1.uq.b, "uq_scaled"))
        ap = w1.vp.mass / w0.vp.mass
        mp = mass_transport_1d(w0.vp, Density1D(lambda t: w1.vp(t) / ap,
                                                w1.vp.a, w1.vp.b, "vp_scaled"))
        flat0 = _is_uniform(w0)
        flat1 = _is_uniform(w1)
        return Diffeo((_SeparableAtom(mq, mp, area_preserving=flat0 and flat1),))
    if isinstance(w0, RadialDensity2D) and isinstance(w1, RadialDensity2D):
        if abs(w0.mass - w1.mass) > 1e-9 * max(w0.mass, w1.mass):
            raise MassError("total masses differ")
        smap = mass_transport_1d(w0.s_density, w1.s_density)
        flat = _is_uniform(w0) and _is_uniform(w1)
        return Diffeo((_RadialAtom(smap, area_preserving=flat),))
    raise UnsupportedRegionError("separable-rectangle or radial-disk densities only")


def _is_uniform(w) -> bool:
    pts = None
    if isinstance(w, SeparableDensity2D):
        box = BBox(w.uq.a, w.uq.b, w.vp.a, w.vp.b)
        pts = box.grid(9, 9)
    elif isinstance(w, RadialDensity2D):
        pts = Disk(math.pi * w.radius ** 2).bbox.grid(9, 9)
    v = w(pts)
    return float(np.max(v) - np.min(v)) <= 1e-12 * float(np.max(np.abs(v)))


def pullback_residual_2d(psi: Diffeo, w0, w1, probe: Region, n: int = 128,
                         eps: float = 1e-5) -> float:
    """max |w1(psi(x)) det Dpsi(x) - w0(x)| over a probe grid."""
    pts = probe.bbox.grid(n, n)
    pts = pts[probe.contains(pts, margin=probe.bbox.diagonal * 5e-3)]
    J = psi.jacobian(pts, eps=eps)
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    return float(np.max(np.abs(w1(psi.forward(pts)) * det - w0(pts))))


# ---------------------------------------------------------------------------
# compactly supported transport
# ---------------------------------------------------------------------------

class TubeRegion(Region):
    """Neighborhood of a sampled path: dist(x, path) <= radius."""

    area_is_exact = False

    def __init__(self, path_samples: np.ndarray, radius: float):
        self.path = as_points(path_samples)
        self.radius = float(radius)

    @property
    def bbox(self) -> BBox:
        r = self.radius
        return BBox(self.path[:, 0].min() - r, self.path[:, 0].max() + r,
                    self.path[:, 1].min() - r, self.path[:, 1].max() + r)

    def contains(self, pts, margin: float = 0.0) -> np.ndarray:
        pts = as_points(pts)
        d = pts[..., None, :] - self.path[None, :, :]
        dist2 = np.min(np.einsum("...jk,...jk->...j", d, d), axis=-1)
        r = self.radius - margin
        return dist2 <= r * r

    def area(self) -> float:
        raise UnsupportedRegionError("tube area is not tracked")

    def boundary_points(self, n: int = 256) -> np.ndarray:
        raise UnsupportedRegionError("tube boundary is not sampled")


class MovingBumpHamiltonian(TimeDependentHamiltonian):
    """Cutoff translation generator following a moving point x(t).

    H(t, y) = rho(|y - x(t)|) * [vq(t) (p - xp(t)) - vp(t) (q - xq(t))]
    whose field equals xdot(t) exactly on the bump plateau, so the flow
    carries x(0) along the path exactly.
    """

    def __init__(self, path: Callable[[float], np.ndarray],
                 velocity: Callable[[float], np.ndarray], radius: float):
        self.path = path
        self.velocity = velocity
        self.radius = float(radius)
        samples = np.array([path(t) for t in np.linspace(0, 1, 65)])
        self.support = TubeRegion(samples, radius)

    def _parts(self, t, pts):
        pts = as_points(pts)
        c = np.asarray(self.path(float(t)), dtype=float)
        v = np.asarray(self.velocity(float(t)), dtype=float)
        rel = pts - c
        r = np.sqrt(np.sum(rel ** 2, axis=-1))
        u = (r - 0.5 * self.radius) / (0.45 * self.radius)
        rho = 1.0 - smoothstep(u)
        lin = v[0] * rel[..., 1] - v[1] * rel[..., 0]
        return rel, r, u, rho, lin, v

    def value(self, t, pts):
        _, _, _, rho, lin, _ = self._parts(t, pts)
        return rho * lin

    def grad(self, t, pts):
        rel, r, u, rho, lin, v = self._parts(t, pts)
        mag = -smoothstep_d(u) / (0.45 * self.radius)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[..., None] > 1e-300,
                            rel / np.maximum(r, 1e-300)[..., None], 0.0)
        grad_rho = mag[..., None] * unit
        grad_lin = np.stack([-v[1] * np.ones_like(lin), v[0] * np.ones_like(lin)],
                            axis=-1)
        return grad_rho * lin[..., None] + rho[..., None] * grad_lin


def point_transport(path: Callable[[float], np.ndarray],
                    velocity: Callable[[float], np.ndarray],
                    tube_radius: float,
                    cfg: FlowConfig = DEFAULT_CONFIG) -> Diffeo:
    """Compactly supported map carrying path(0) to path(1) along the path."""
    if tube_radius <= 0:
        raise GeometryError("tube radius must be positive")
    H = MovingBumpHamiltonian(path, velocity, tube_radius)
    return flow_map(H, 1.0, cfg)


def translation_generator(K: Region, v, pad_rel: float = 0.25,
                          sign: Optional[str] = None,
                          pad_abs: Optional[float] = None,
                          pad_qp: Optional[tuple[float, float]] = None,
                          anchor_margin_rel: float = 0.04,
                          ) -> tuple[TimeDependentHamiltonian, SmoothProfile]:
    """Cutoff linear generator translating K by v exactly.

    The plateau covers the hull of K and K+v, so the field equals v there at
    all times. With sign '+' or '-' the linear form's zero line (parallel to
    v) is placed just outside the support, making the generator one-signed.
    pad_qp gives anisotropic fringe widths (tight normal pads keep the
    oscillation small; wide tangential pads keep the fringe field mild).
    """
    v = np.asarray(v, dtype=float)
    box = K.bbox
    vq, vp = float(v[0]), float(v[1])
    hull = BBox(min(box.q0, box.q0 + vq), max(box.q1, box.q1 + vq),
                min(box.p0, box.p0 + vp), max(box.p1, box.p1 + vp))
    if vq != 0.0 and vp != 0.0:
        # slanted moves get a slab in the motion-aligned frame; an
        # axis-aligned plateau would make the one-signed form's range scale
        # with the whole bounding square instead of the slab width
        return _slanted_translation_generator(box, v, pad_rel, pad_abs, sign,
                                               anchor_margin_rel)
    if pad_qp is not None:
        pq, pp = pad_qp
        outer = BBox(hull.q0 - pq, hull.q1 + pq, hull.p0 - pp, hull.p1 + pp)
    else:
        pad = pad_abs if pad_abs is not None \
            else pad_rel * max(hull.width, hull.height, 1e-9)
        outer = hull.pad(pad)
    rho = BoxBump(hull, outer)
    speed = math.hypot(vq, vp)
    if speed == 0.0:
        return AutonomousHamiltonian(rho * Polynomial2D({})), rho
    out = outer
    if sign == "+":
        anchor = _line_anchor(out, v, side=-1, margin_rel=anchor_margin_rel)
    elif sign == "-":
        anchor = _line_anchor(out, v, side=+1, margin_rel=anchor_margin_rel)
    else:
        anchor = hull.center
    # vq*(p - pa) - vp*(q - qa) = |v| * <unit normal, x - anchor>
    lin = Polynomial2D({(0, 1): vq, (1, 0): -vp,
                        (0, 0): -vq * anchor[1] + vp * anchor[0]})
    H = AutonomousHamiltonian(rho * lin)
    return H, rho


def _slanted_translation_generator(box: BBox, v: np.ndarray, pad_rel: float,
                                   pad_abs: Optional[float],
                                   sign: Optional[str],
                                   anchor_margin_rel: float):
    from .profiles import RotatedBoxBump
    speed = math.hypot(*v)
    u = v / speed
    nvec = np.array([-u[1], u[0]])
    corners = np.array([[box.q0, box.p0], [box.q0, box.p1],
                        [box.q1, box.p0], [box.q1, box.p1]])
    center = box.center + v / 2
    rel = corners - box.center
    s_half = float(np.max(np.abs(rel @ u))) + speed / 2
    n_half = float(np.max(np.abs(rel @ nvec)))
    pad = pad_abs if pad_abs is not None else pad_rel * max(2 * s_half, 2 * n_half)
    rho = RotatedBoxBump(center, u, (s_half, n_half),
                         (s_half + pad, n_half + pad))
    n_out = n_half + pad
    margin = anchor_margin_rel * 2 * n_out
    if sign == "+":
        anchor = center - (n_out + margin) * nvec
    elif sign == "-":
        anchor = center + (n_out + margin) * nvec
    else:
        anchor = center
    lin = Polynomial2D({(0, 1): float(v[0]), (1, 0): float(-v[1]),
                        (0, 0): float(-v[0] * anchor[1] + v[1] * anchor[0])})
    H = AutonomousHamiltonian(rho * lin)
    return H, rho


def _line_anchor(box: BBox, v, side: int, margin_rel: float = 0.04) -> np.ndarray:
    """A point whose v-parallel line clears the box: side=-1 leaves the whole
    box at positive normal coordinate, side=+1 at negative."""
    v = np.asarray(v, dtype=float)
    n = np.array([-v[1], v[0]]) / math.hypot(*v)  # unit normal
    corners = np.array([[box.q0, box.p0], [box.q0, box.p1],
                        [box.q1, box.p0], [box.q1, box.p1]])
    proj = corners @ n
    margin = margin_rel * (proj.max() - proj.min())  # normal-direction span
    c = box.center
    if side < 0:
        return c + (proj.min() - margin - c @ n) * n
    return c + (proj.max() + margin - c @ n) * n


def compact_translation(K: Region, v, cfg: FlowConfig = DEFAULT_CONFIG,
                        pad_rel: float = 0.3) -> Diffeo:
    """Compactly supported area-preserving map equal to x + v on K."""
    v = np.asarray(v, dtype=float)
    if float(np.hypot(*v)) == 0.0:
        return Diffeo.identity()
    H, _ = translation_generator(K, v, pad_rel=pad_rel)
    return flow_map(H, 1.0, cfg)


# ---------------------------------------------------------------------------
# star-shaped boundary normalization
# ---------------------------------------------------------------------------

def radial_normalize(profile: Callable[[np.ndarray], np.ndarray]) -> Diffeo:
    """Compactly supported map sending the closed unit disk onto the star
    region {r * x : r <= profile(theta)} with the unit circle landing on the
    target curve exactly.

    Works in log-radius: u -> u + b(u) log f(theta) with a plateau bump b
    (b(0) = 1) wide enough that the map stays monotone in u for the given
    profile.
    """
    th_probe = np.linspace(0, 2 * math.pi, 721)
    f_probe = np.asarray(profile(th_probe), dtype=float)
    if np.any(f_probe <= 0):
        raise GeometryError("boundary profile must be positive")
    lmax = float(np.max(np.abs(np.log(f_probe))))
    W = 5.0 * max(1.0, lmax)  # keeps |b'(u) log f| <= ~0.45

    lo_o, lo_i, hi_i, hi_o = -0.2 - W, -0.2, 0.2, 0.2 + W

    def b(u):
        return window(u, lo_o, lo_i, hi_i, hi_o)

    def b_d(u):
        return window_d(u, lo_o, lo_i, hi_i, hi_o)

    def fwd(pts):
        pts = as_points(pts)
        r = np.sqrt(np.sum(pts ** 2, axis=-1))
        th = np.arctan2(pts[..., 1], pts[..., 0])
        L = np.log(np.asarray(profile(th), dtype=float))
        safe = r > math.exp(lo_o)
        out = pts.copy()
        if np.any(safe):
            u = np.log(r[safe])
            fac = np.exp(b(u) * L[safe])
            out[safe] = pts[safe] * fac[..., None]
        return out

    def inv(pts):
        pts = as_points(pts)
        r2 = np.sqrt(np.sum(pts ** 2, axis=-1))
        th = np.arctan2(pts[..., 1], pts[..., 0])
        L = np.log(np.asarray(profile(th), dtype=float))
        out = pts.copy()
        safe = r2 > math.exp(lo_o)
        if np.any(safe):
            w = np.log(r2[safe])
            Ls = L[safe]
            u = _monotone_inverse(
                lambda uu: uu + b(uu) * Ls, lambda uu: 1.0 + b_d(uu) * Ls,
                w, lo_o - lmax - 1.0, hi_o + lmax + 1.0)
            fac = np.exp(u - w)
            out[safe] = pts[safe] * fac[..., None]
        return out

    atom = ExplicitAtom(fwd, inv, name="radial_normalize", area_preserving=False)
    return Diffeo((atom,))


# ---------------------------------------------------------------------------
# explicit area-preserving gadgets
# ---------------------------------------------------------------------------

def vertical_shear(sigma: Callable, sigma_d: Callable,
                   label: str = "shear") -> Diffeo:
    """(q, p) -> (q, p + sigma(q)): area-preserving for any smooth sigma."""

    def fwd(pts):
        pts = as_points(pts)
        return np.stack([pts[..., 0], pts[..., 1]
                         + np.asarray(sigma(pts[..., 0]), dtype=float)], axis=-1)

    def inv(pts):
        pts = as_points(pts)
        return np.stack([pts[..., 0], pts[..., 1]
                         - np.asarray(sigma(pts[..., 0]), dtype=float)], axis=-1)

    return Diffeo((ExplicitAtom(fwd, inv, name=label, area_preserving=True),))


def fiberwise_squeeze(alpha: MonotoneMap1D, label: str = "squeeze") -> Diffeo:
    """(q, p) -> (alpha(q), p / alpha'(q)): an exact symplectomorphism."""

    def fwd(pts):
        pts = as_points(pts)
        q = pts[..., 0]
        return np.stack([alpha.value(q), pts[..., 1] / alpha.deriv(q)], axis=-1)

    def inv(pts):
        pts = as_points(pts)
        q = alpha.inverse(pts[..., 0])
        return np.stack([q, pts[..., 1] * alpha.deriv(q)], axis=-1)

    return Diffeo((ExplicitAtom(fwd, inv, name=label, area_preserving=True),))


# ---------------------------------------------------------------------------
# ball rearrangement
# ---------------------------------------------------------------------------

def _region_center(r: Region) -> np.ndarray:
    return r.bbox.center


def _translate_matches(src: Region, dst: Region, tol: float) -> np.ndarray:
    """The translation vector if dst is a translate of src, else raises."""
    v = _region_center(dst) - _region_center(src)
    a = src.boundary_points(128) + v
    b = dst.boundary_points(128)
    d = float(np.max(np.sqrt(np.sum((a - b) ** 2, axis=-1))))
    if d > tol:
        raise GeometryError(
            "ball rearrangement currently requires targets congruent to "
            f"sources by translation (mismatch {d:g})")
    return v


def _leg_support_box(src_box: BBox, v: np.ndarray, pad_rel: float) -> BBox:
    """Bounding box of the cutoff-translation generator's support."""
    hull = BBox(min(src_box.q0, src_box.q0 + v[0]),
                max(src_box.q1, src_box.q1 + v[0]),
                min(src_box.p0, src_box.p0 + v[1]),
                max(src_box.p1, src_box.p1 + v[1]))
    return hull.pad(pad_rel * max(hull.width, hull.height, 1e-9))


def _tube_clear(src: Region, v: np.ndarray, others: Sequence[Region],
                margin: float, pad_rel: float) -> bool:
    """No other region may touch the leg's full support (fringe included)."""
    box = _leg_support_box(src.bbox, v, pad_rel).pad(margin)
    for other in others:
        cloud = other.boundary_points(128)
        inside = (cloud[:, 0] >= box.q0) & (cloud[:, 0] <= box.q1) \
            & (cloud[:, 1] >= box.p0) & (cloud[:, 1] <= box.p1)
        if np.any(inside):
            return False
    return True


def _leg_orders(v: np.ndarray):
    """Axis-aligned leg decompositions of a move (q-first and p-first)."""
    vq = np.array([v[0], 0.0])
    vp = np.array([0.0, v[1]])
    orders = []
    for legs in ((vq, vp), (vp, vq)):
        orders.append([l for l in legs if float(np.hypot(*l)) > 1e-12])
    if not orders[0]:
        return [[]]
    return orders


def _legs_clear(src: Region, legs, others: Sequence[Region], margin: float,
                pad_rel: float) -> bool:
    cur = src
    for v in legs:
        if not _tube_clear(cur, v, others, margin, pad_rel):
            return False
        cur = cur.translate(v)
    return True


def ball_rearrange(sources: Sequence[Region], targets: Sequence[Region],
                   arena: Rectangle, density=None,
                   cfg: FlowConfig = DEFAULT_CONFIG,
                   area_rtol: float = 1e-9, pad_rel: float = 0.35) -> Diffeo:
    """Area-preserving map sending each source onto its target.

    Scope: uniform density, targets congruent to sources by translation,
    all regions inside a common rectangular arena. Moves are sequenced as
    axis-aligned cutoff-translation legs; when every direct L-path collides,
    a region is parked at a free arena spot first.
    """
    if density is not None:
        raise UnsupportedRegionError(
            "only the uniform density is supported; normalize first")
    if len(sources) != len(targets):
        raise GeometryError("sources and targets must pair up")
    for s, t in zip(sources, targets):
        if abs(s.area() - t.area()) > area_rtol * max(s.area(), t.area()):
            raise MassError(
                f"area mismatch: {s.area():.12g} vs {t.area():.12g}")
        _translate_matches(s, t, tol=1e-9 * arena.bbox.diagonal + 1e-12)

    current: list[Region] = list(sources)
    word = Diffeo.identity()
    margin = 0.02 * arena.bbox.diagonal
    pending = [i for i in range(len(sources))
               if float(np.hypot(*(_region_center(targets[i])
                                   - _region_center(current[i])))) > 1e-12]

    def execute(i, legs):
        nonlocal word
        for v in legs:
            step = compact_translation(current[i], v, cfg=cfg, pad_rel=pad_rel)
            word = word.then(step)
            current[i] = current[i].translate(v)

    def try_move_to(i, dst_center) -> bool:
        v = np.asarray(dst_center) - _region_center(current[i])
        others = [current[j] for j in range(len(current)) if j != i]
        for legs in _leg_orders(v):
            if _legs_clear(current[i], legs, others, margin, pad_rel):
                execute(i, legs)
                return True
        return False

    guard = 0
    while pending:
        guard += 1
        if guard > 6 * len(sources) + 10:
            raise GeometryError("could not sequence collision-free moves")
        progressed = False
        for i in list(pending):
            if try_move_to(i, _region_center(targets[i])):
                pending.remove(i)
                progressed = True
        if progressed:
            continue
        # deadlock: park the first pending region at a free arena spot,
        # preferring spots far from every other region and every target lane
        i = pending[0]
        if not _park(current, i, targets, arena, margin, try_move_to):
            raise GeometryError("no reachable parking spot in the arena")

    return word


def _park(current: Sequence[Region], i: int, targets: Sequence[Region],
          arena: Rectangle, margin: float, try_move_to) -> bool:
    src = current[i]
    hw, hh = src.bbox.width / 2, src.bbox.height / 2
    qs = np.linspace(arena.q0 + hw + 2 * margin, arena.q1 - hw - 2 * margin, 9)
    ps = np.linspace(arena.p0 + hh + 2 * margin, arena.p1 - hh - 2 * margin, 9)
    others = [current[j] for j in range(len(current)) if j != i]
    avoid = np.array([_region_center(r) for r in list(others) + list(targets)])
    ranked = []
    for p in ps:
        for q in qs:
            spot = np.array([q, p])
            score = float(np.min(np.sqrt(np.sum((avoid - spot) ** 2, axis=-1)))) \
                if len(avoid) else 1.0
            ranked.append((score, q, p))
    ranked.sort(reverse=True)
    for score, q, p in ranked:
        spot = np.array([q, p])
        cand = src.translate(spot - _region_center(src))
        clear = all(min_cloud_distance(cand.boundary_points(64),
                                       o.boundary_points(64)) > margin
                    for o in others)
        if clear and try_move_to(i, spot):
            return True
    return False
