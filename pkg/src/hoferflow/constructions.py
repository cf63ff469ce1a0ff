"""Explicit generator constructions: budgeted disk movers and the
block-and-fingers system with its shear maps.

The disk mover translates one embedded disk onto another inside a rectangle
or strip with a one-signed cutoff generator whose Hofer length stays below a
given budget. The nice-subsets system realizes a block (0,b)x(0,1) with 2N
fingers (-d,0]x((i-1)/2N, i/2N), equal-area embedded disks X_0,...,X_2N, and
shear symplectomorphisms chi_j that are the identity on every X_i while
pushing the block-side sets of different indices apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (DisjointnessError, EnergyBudgetError, FeasibilityError,
                     GeometryError, MassError)
from .flow import (AutonomousHamiltonian, DEFAULT_CONFIG, Diffeo, ExplicitAtom,
                   FlowConfig, ScaledHamiltonian, TimeDependentHamiltonian,
                   flow_map, map_sup_distance)
from .geometry import (BBox, Disk, ImageRegion, Rectangle, Region,
                       RoundedRectangle, Strip, UnionRegion, as_points,
                       hausdorff_distance, min_cloud_distance)
from .hofer import (NormCertificate, SignClass, check_disjoint, hofer_length,
                    restricted_certificate)
from .profiles import (BoxBump, ProfileOfQ, SmoothUnionBump, quintic_step,
                       quintic_step_int)
from .transport import translation_generator


# ---------------------------------------------------------------------------
# disk mover
# ---------------------------------------------------------------------------

@dataclass
class DiskMoverResult:
    hamiltonian: TimeDependentHamiltonian
    certificate: NormCertificate
    mapping: Diffeo
    hausdorff: float
    displacement: np.ndarray


def disk_mover(U: Region, X0: Region, X1: Region, c: float, nu: SignClass,
               cfg: FlowConfig = DEFAULT_CONFIG,
               pad_abs: Optional[float] = None,
               area_rtol: float = 1e-9) -> DiskMoverResult:
    """One-signed autonomous generator with phi_H^1(X0) = X1 and ||H|| < c.

    Scope: X1 congruent to X0 by a translation, the straight slab between
    them (plus its cutoff fringe) inside U. The generator is a cutoff linear
    form vanishing on a line parallel to the motion placed outside the slab,
    which fixes its sign class.
    """
    if nu.symbol not in ("+", "-"):
        raise GeometryError("disk mover requires a definite sign class")
    a0, a1 = X0.area(), X1.area()
    if abs(a0 - a1) > area_rtol * max(a0, a1):
        raise MassError(f"areas differ: {a0:.12g} vs {a1:.12g}")
    if a0 >= c:
        raise EnergyBudgetError(f"area {a0:g} exceeds the energy budget {c:g}")
    check_disjoint([X0, X1])

    v = X1.bbox.center - X0.bbox.center
    mism = float(np.max(np.abs(X0.boundary_points(128) + v
                               - X1.boundary_points(128))))
    if mism > 1e-9 * max(1.0, X0.bbox.diagonal):
        raise GeometryError(
            "mover scope: X1 must be a translate of X0 "
            f"(boundary mismatch {mism:g})")

    hull = X0.bbox.union(X1.bbox)
    if pad_abs is None:
        pad_abs = _clearance_inside(U, hull) * 0.8
        if pad_abs <= 0:
            raise GeometryError("no room for the cutoff fringe inside U")
    H = rho = None
    for _ in range(8):
        H, rho = translation_generator(X0, v, pad_abs=pad_abs, sign=nu.symbol,
                                       anchor_margin_rel=0.02)
        if bool(np.all(U.contains(rho.support.boundary_points(128)))):
            break
        pad_abs *= 0.5
    else:
        raise GeometryError("mover support leaves U; shrink the fringe")

    length = hofer_length(H)
    if length * (1 + 1e-3) >= c:
        raise EnergyBudgetError(
            f"constructed generator has length {length:g}, budget {c:g}")
    cert = restricted_certificate(H, U, nu, known_length=length)
    phi = flow_map(H, 1.0, cfg)
    dist = hausdorff_distance(ImageRegion(X0, phi), X1)
    return DiskMoverResult(H, cert, phi, dist, v)


def _clearance_inside(U: Region, box: BBox) -> float:
    """Largest uniform padding of `box` still inside U (bisected)."""
    corners = box
    lo, hi = 0.0, max(box.width, box.height)
    probe = lambda m: bool(np.all(U.contains(
        Rectangle(corners.q0 - m, corners.q1 + m,
                  corners.p0 - m, corners.p1 + m).boundary_points(64))))
    if not probe(0.0):
        return 0.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if probe(mid):
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# shear profile f: constant eps/2 left of -eps, -x right of 0
# ---------------------------------------------------------------------------

def shear_profile(eps: float) -> tuple[Callable, Callable]:
    """The 1-D profile f with f = eps/2 on (-inf, -eps], f = -x on [0, inf),
    and -1 <= f' <= 0 on the quintic transition band."""

    def f(x):
        x = np.asarray(x, dtype=float)
        u = (x + eps) / eps
        mid = eps / 2 - eps * quintic_step_int(u)
        return np.where(x <= -eps, eps / 2, np.where(x >= 0.0, -x, mid))

    def f_d(x):
        x = np.asarray(x, dtype=float)
        u = (x + eps) / eps
        mid = -quintic_step(u)
        return np.where(x <= -eps, 0.0, np.where(x >= 0.0, -1.0, mid))

    return f, f_d


# ---------------------------------------------------------------------------
# nice subset system
# ---------------------------------------------------------------------------

@dataclass
class NiceSubsetSystem:
    """The block-and-fingers configuration with its shear maps."""

    a: float
    N: int
    total_area: float
    b: float
    c: float
    d: float
    eps: float
    block: Rectangle
    fingers: list[Rectangle]          # index i-1 for i = 1..2N
    U0: UnionRegion
    U: list[UnionRegion]              # index i-1 for i = 1..2N
    X: list[Region]                   # index i for i = 0..2N
    chi: list[Diffeo]                 # index j-1 for j = 1..N (flow-backed)
    shear_hamiltonian: TimeDependentHamiltonian
    f: Callable
    f_d: Callable
    cfg: FlowConfig
    delta: float

    @property
    def band(self) -> float:
        return 1.0 / (2 * self.N)

    def shear_closed_form(self, j: int) -> Diffeo:
        """(q, p) -> (q, p - (j-1) f'(q)); exact wherever the cutoff is 1
        and the vertical trajectory stays inside the plateau (all of the
        comb's sets and their images qualify)."""
        k = float(j - 1)
        f_d = self.f_d

        def fwd(pts):
            pts = as_points(pts)
            return np.stack([pts[..., 0],
                             pts[..., 1] - k * np.asarray(f_d(pts[..., 0]))],
                            axis=-1)

        def inv(pts):
            pts = as_points(pts)
            return np.stack([pts[..., 0],
                             pts[..., 1] + k * np.asarray(f_d(pts[..., 0]))],
                            axis=-1)

        return Diffeo((ExplicitAtom(fwd, inv, name=f"shear_{j}",
                                    area_preserving=True),))

    def verify(self, flow_check_points: int = 60) -> dict:
        """Numerically check the five defining families; returns residuals."""
        rng = np.random.default_rng(5)
        out: dict = {"delta": self.delta}

        # (1) X0 and X_i inside U_i
        worst_out = 0
        for i in range(1, 2 * self.N + 1):
            for reg in (self.X[0], self.X[i]):
                bd = np.concatenate([reg.boundary_points(192),
                                     reg.sample_interior(64, rng)])
                worst_out = max(worst_out, int(np.sum(~self.U[i - 1].contains(bd))))
        out["containment_violations"] = worst_out

        # (2) exact areas
        out["area_error"] = max(abs(self.X[i].area() - self.a)
                                for i in range(2 * self.N + 1))

        # (3) X0 disjoint from every X_i, with margin
        dist0 = min(min_cloud_distance(self.X[0].boundary_points(128),
                                       self.X[i].boundary_points(128))
                    for i in range(1, 2 * self.N + 1))
        out["x0_xi_distance"] = dist0

        # (4) chi_j fixes every X_i (closed form exact; flows cross-checked)
        worst_fix = 0.0
        samples = np.concatenate([
            np.concatenate([self.X[i].boundary_points(64),
                            self.X[i].sample_interior(32, rng)])
            for i in range(1, 2 * self.N + 1)])
        for j in range(1, self.N + 1):
            moved = self.shear_closed_form(j).forward(samples)
            worst_fix = max(worst_fix, float(np.max(np.abs(moved - samples))))
        out["chi_fixes_X"] = worst_fix

        # flow vs closed form on a band sample
        probe_box = BBox(-self.eps * 1.5, min(self.b, 1.0), 0.05, 0.95)
        probe = probe_box.grid(8, 8)[:flow_check_points]
        worst_flow = 0.0
        for j in range(2, self.N + 1):
            worst_flow = max(worst_flow, map_sup_distance(
                self.chi[j - 1], self.shear_closed_form(j), probe))
        out["flow_vs_closed_form"] = worst_flow

        # (5) chi_j(U_i) disjoint from chi_j'(U_i') for i > i', j > j'
        clouds = {}
        for i in range(1, 2 * self.N + 1):
            base = self.U[i - 1].grid_inside(46, 46, margin=self.delta)
            clouds[i] = base
        min_pair = math.inf
        for j in range(1, self.N + 1):
            for jp in range(1, j):
                cj = {i: self.shear_closed_form(j).forward(clouds[i])
                      for i in clouds}
                cjp = {i: self.shear_closed_form(jp).forward(clouds[i])
                       for i in clouds}
                for i in range(1, 2 * self.N + 1):
                    for ip in range(1, i):
                        min_pair = min(min_pair,
                                       min_cloud_distance(cj[i], cjp[ip]))
        out["sheared_pair_distance"] = min_pair

        out["ok"] = (worst_out == 0
                     and out["area_error"] <= 1e-6
                     and dist0 > self.delta
                     and worst_fix <= 1e-9
                     and (self.N == 1 or min_pair > self.delta / 2))
        return out


def nice_subsets(total_area: float, a: float, N: int,
                 cfg: FlowConfig = DEFAULT_CONFIG) -> NiceSubsetSystem:
    """Build the block-and-fingers system for 2N equal-area embedded disks.

    Chooses c and b at the midpoints of their admissible intervals, places
    flat rounded rectangles of exact area a in the fingers and a tall one in
    the block, and realizes the shears as flows of (j-1) * rho(q,p) f(q).
    """
    if N < 1:
        raise FeasibilityError("N must be at least 1")
    if total_area <= 3 * N * a:
        raise FeasibilityError(
            f"need total area > 3Na = {3 * N * a:g}, got {total_area:g}")
    c = 0.5 * (3 * N * a + total_area)
    b_lo, b_hi = a, c / N - 2 * a
    b = 0.5 * (b_lo + b_hi)
    d = c - N * b
    band = 1.0 / (2 * N)

    block = Rectangle(0.0, b, 0.0, 1.0)
    tall_block = Rectangle(0.0, b, 0.0, float(N))
    fingers = [Rectangle(-d, 0.0, (i - 1) * band, i * band)
               for i in range(1, 2 * N + 1)]
    U0 = UnionRegion([tall_block, Rectangle(-d, 0.0, 0.0, 1.0)])
    U = [UnionRegion([block, fingers[i - 1]]) for i in range(1, 2 * N + 1)]
    diag = U0.bbox.diagonal
    delta = 1e-3 * diag

    # fingers: flat rounded rectangles of exact area a
    cl_p = max(0.55 * delta, 0.004 * band)
    h_x = band - 2 * cl_p
    r_c = min(0.2 * h_x, 0.05)
    cl_q = max(delta, 0.01)
    X = [None] * (2 * N + 1)
    for i in range(1, 2 * N + 1):
        probe = RoundedRectangle.with_area((0.0, 0.0), h_x, a, r_c)
        cq = -d + cl_q + probe.width / 2
        cp = (i - 1) * band + band / 2
        X[i] = RoundedRectangle((cq, cp), probe.width, h_x, r_c)
        if X[i].bbox.q1 >= -1e-9:
            raise FeasibilityError(
                "fingers too short for equal-area disks at these margins")
    right_edge = X[1].bbox.q1
    eps = min(d / 4, -right_edge / 1.1)
    if eps <= 0:
        raise FeasibilityError("no room for the shear transition band")

    # block: a tall rounded rectangle of exact area a
    cl_b = max(delta, 0.01)
    h0 = 1.0 - 2 * cl_b
    r0 = 0.05
    X0_probe = RoundedRectangle.with_area((0.0, 0.0), h0, a, r0)
    if X0_probe.width > b - 2 * cl_b:
        h0 = min(h0, (a + (4 - math.pi) * r0 ** 2) / (b - 2 * cl_b))
        X0_probe = RoundedRectangle.with_area((0.0, 0.0), h0, a, r0)
        if X0_probe.width > b - 2 * cl_b or h0 > 1.0 - 2 * cl_b:
            raise FeasibilityError("block cannot hold an area-a disk with margins")
    X[0] = RoundedRectangle((b / 2, 0.5), X0_probe.width, h0, r0)

    f, f_d = shear_profile(eps)
    kappa = 0.02 * max(1.0, b, d / 10)
    part_a = BBox(-d, 0.0, 0.0, 1.0).pad(kappa)
    part_b = BBox(-eps, b, 0.0, float(N)).pad(kappa)
    rho = SmoothUnionBump([
        BoxBump(part_a, part_a.pad(3 * kappa)),
        BoxBump(part_b, part_b.pad(3 * kappa)),
    ])
    H_shear = AutonomousHamiltonian(rho * ProfileOfQ(f, f_d))
    chi = [Diffeo.identity() if j == 1
           else flow_map(ScaledHamiltonian(float(j - 1), H_shear), 1.0, cfg)
           for j in range(1, N + 1)]

    return NiceSubsetSystem(
        a=a, N=N, total_area=total_area, b=b, c=c, d=d, eps=eps,
        block=block, fingers=fingers, U0=U0, U=U, X=X, chi=chi,
        shear_hamiltonian=H_shear, f=f, f_d=f_d, cfg=cfg, delta=delta)


# ---------------------------------------------------------------------------
# figure output
# ---------------------------------------------------------------------------

def render_system(sys: NiceSubsetSystem, path: str,
                  sheared: Optional[Sequence[tuple[int, int]]] = None) -> str:
    """Draw the system (block, fingers, disks, sheared images) to an SVG."""
    import matplotlib
    matplotlib.use("svg", force=False)
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "hoferflow"
    fig, ax = plt.subplots(figsize=(8, 4.2))

    def draw(points, gid, **kw):
        closed = np.vstack([points, points[:1]])
        (line,) = ax.plot(closed[:, 0], closed[:, 1], **kw)
        line.set_gid(gid)

    draw(sys.U0.parts[0].boundary_points(128), "U0-block", color="k", lw=2.0)
    draw(sys.U0.parts[1].boundary_points(128), "U0-base", color="k", lw=2.0)
    for i, fin in enumerate(sys.fingers, start=1):
        draw(fin.boundary_points(96), f"finger-{i}", color="0.45", lw=0.8)
    for i in range(0, 2 * sys.N + 1):
        draw(sys.X[i].boundary_points(128), f"X{i}", color="C0", lw=1.2)
        cx, cy = sys.X[i].bbox.center
        ax.annotate(f"X{i}", (cx, cy), ha="center", va="center", fontsize=7)
    if sheared is None:
        sheared = [(j, j) for j in range(2, sys.N + 1)]
    for (j, i) in sheared:
        cloud = sys.U[i - 1].grid_inside(60, 60, margin=sys.delta / 2)
        img = sys.shear_closed_form(j).forward(cloud)
        sc = ax.scatter(img[:, 0], img[:, 1], s=0.3, color="C3", alpha=0.5)
        sc.set_gid(f"chi{j}-U{i}")
    ax.set_aspect("equal")
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_title(f"block and fingers, N={sys.N}")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
