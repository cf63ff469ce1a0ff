"""Hofer-length accounting: oscillation, norms, and sign-restricted
certificates.

A certificate is an upper bound for a Hofer quantity that is valid by
construction: it names the generators, the support region they are confined
to, and the sign class. Restricted quantities carry the scale factors
c_plus = c_minus = 1, c_zero = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (CertificateRefusedError, DisjointnessError,
                     UnsupportedRegionError)
from .flow import (ConcatenatedHamiltonian, TimeDependentHamiltonian,
                   TimeWarpedHamiltonian, SumHamiltonian)
from .geometry import Region, UnionRegion, min_cloud_distance
from .profiles import quintic_step, quintic_step_d
from .quadrature import integrate_time
from .reparam import Diffeo01, SampledProfile, equalize
from . import reparam


# ---------------------------------------------------------------------------
# sign classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignClass:
    """nu in {+, -, 0} with the negation convention -+ = -, -- = +, -0 = 0."""

    symbol: str

    def __post_init__(self):
        if self.symbol not in ("+", "-", "0"):
            raise ValueError("sign class must be '+', '-' or '0'")

    @property
    def c_factor(self) -> float:
        return 2.0 if self.symbol == "0" else 1.0

    def negate(self) -> "SignClass":
        if self.symbol == "+":
            return SignClass("-")
        if self.symbol == "-":
            return SignClass("+")
        return self

    def __str__(self) -> str:
        return self.symbol


PLUS = SignClass("+")
MINUS = SignClass("-")
ZERO = SignClass("0")


# ---------------------------------------------------------------------------
# oscillation and Hofer length
# ---------------------------------------------------------------------------

def oscillation(H: TimeDependentHamiltonian, t: float,
                coarse: int = 64, refine: int = 2) -> float:
    """max - min of H^t over the plane, by two-stage sampling.

    Scans the declared support box and refines twice around each extreme;
    the exterior value 0 is always a candidate (compact support).
    """
    region = H.support
    if region is None:
        raise UnsupportedRegionError("oscillation needs a declared support region")
    box = region.bbox
    if not box.is_finite():
        raise UnsupportedRegionError("oscillation needs a bounded support")

    def scan(b, n):
        pts = b.grid(n, n)
        vals = H.value(t, pts)
        return pts, vals

    pts, vals = scan(box, coarse)
    hi = float(np.max(vals))
    lo = float(np.min(vals))
    hi_at = pts[int(np.argmax(vals))]
    lo_at = pts[int(np.argmin(vals))]
    cell = (box.width / coarse, box.height / coarse)
    for _ in range(refine):
        for which, anchor in (("hi", hi_at), ("lo", lo_at)):
            sub = _window_box(box, anchor, cell)
            spts, svals = scan(sub, 16)
            if which == "hi" and svals.size and float(np.max(svals)) > hi:
                hi = float(np.max(svals))
                hi_at = spts[int(np.argmax(svals))]
            if which == "lo" and svals.size and float(np.min(svals)) < lo:
                lo = float(np.min(svals))
                lo_at = spts[int(np.argmin(svals))]
        cell = (cell[0] / 8, cell[1] / 8)
    return max(hi, 0.0) - min(lo, 0.0)


def _window_box(box, anchor, cell):
    from .geometry import BBox
    return BBox(max(box.q0, anchor[0] - 2 * cell[0]),
                min(box.q1, anchor[0] + 2 * cell[0]),
                max(box.p0, anchor[1] - 2 * cell[1]),
                min(box.p1, anchor[1] + 2 * cell[1]))


def oscillation_profile(H: TimeDependentHamiltonian, n: int = 257,
                        coarse: int = 64) -> SampledProfile:
    """Sampled t -> oscillation(H, t) profile on a uniform grid."""
    ts = np.linspace(0.0, 1.0, n)
    vals = np.array([oscillation(H, float(t), coarse=coarse) for t in ts])
    return SampledProfile(ts, vals)


def hofer_length(H: TimeDependentHamiltonian, tol: float = 1e-9,
                 coarse: int = 64) -> float:
    """int_0^1 (max H^t - min H^t) dt; upper-bounds the Hofer norm of the
    time-1 map by definition."""
    return integrate_time(lambda t: oscillation(H, t, coarse=coarse),
                          0.0, 1.0, tol=max(tol, 1e-10))


# ---------------------------------------------------------------------------
# concatenation
# ---------------------------------------------------------------------------

def _seam_warp(H: TimeDependentHamiltonian) -> TimeDependentHamiltonian:
    # monotone quintic time warp; derivative vanishes at both ends, so the
    # concatenated generator vanishes near t in {0, 1/2, 1}
    return TimeWarpedHamiltonian(H, lambda t: float(quintic_step(t)),
                                 lambda t: float(quintic_step_d(t)))


def concat(H: TimeDependentHamiltonian,
           Hp: TimeDependentHamiltonian) -> TimeDependentHamiltonian:
    """Time-concatenation H # H': runs H at double speed, then H'.

    Both inputs are seam-smoothed first, which leaves their time-1 flows and
    Hofer lengths unchanged while making the concatenation vanish near
    t in {0, 1/2, 1}.
    """
    return ConcatenatedHamiltonian(_seam_warp(H), _seam_warp(Hp))


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormCertificate:
    """Proven-by-construction upper bound for a Hofer quantity."""

    value: float
    quantity: str
    sign_class: SignClass
    generator_bound: float
    support: Optional[Region]
    epsilon: float = 0.0
    margin: float = 0.0
    generators: tuple = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        expected = self.sign_class.c_factor * self.generator_bound
        if not math.isclose(self.value, expected, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError("certificate value must equal c_nu * generator bound")

    def conjugated(self, new_support: Region, note: str = "") -> "NormCertificate":
        """Transport under an area-preserving conjugation (value invariant)."""
        notes = self.notes + ((note,) if note else ("conjugated",))
        return NormCertificate(self.value, self.quantity, self.sign_class,
                               self.generator_bound, new_support, self.epsilon,
                               self.margin, self.generators, notes)


def check_sign(H: TimeDependentHamiltonian, nu: SignClass,
               n_times: int = 9, grid: int = 40, tol: float = 1e-9) -> float:
    """Sampled worst violation of nu*H >= 0 (0 for the unrestricted class)."""
    if nu.symbol == "0":
        return 0.0
    if H.support is None:
        raise CertificateRefusedError("sign check needs a declared support")
    box = H.support.bbox
    pts = box.grid(grid, grid)
    worst = 0.0
    sign = 1.0 if nu.symbol == "+" else -1.0
    for t in np.linspace(0.0, 1.0, n_times):
        v = sign * H.value(float(t), pts)
        worst = min(worst, float(np.min(v)))
    if worst < -tol * max(1.0, _value_scale(H, pts)):
        raise CertificateRefusedError(
            f"sign condition nu={nu} violated by {-worst:g}")
    return -worst


def _value_scale(H, pts) -> float:
    v = np.abs(H.value(0.5, pts))
    return float(np.max(v)) if v.size else 1.0


def check_support_in(H: TimeDependentHamiltonian, X: Region) -> None:
    """Declared support of H must sit inside X (sampled containment)."""
    if H.support is None:
        raise CertificateRefusedError("generator has no declared support")
    try:
        bd = H.support.boundary_points(128)
    except UnsupportedRegionError as exc:
        raise CertificateRefusedError(str(exc))
    inside = X.contains(bd)
    if not bool(np.all(inside)):
        raise CertificateRefusedError(
            f"{int(np.sum(~inside))}/128 support boundary samples outside the region")


def restricted_certificate(H: TimeDependentHamiltonian, X: Region,
                           nu: SignClass, margin_rel: float = 1e-3,
                           known_length: Optional[float] = None) -> NormCertificate:
    """Certificate for the nu-restricted norm of the time-1 flow of H.

    value = c_nu * (Hofer length of H, inflated by the sampling margin).
    """
    check_support_in(H, X)
    check_sign(H, nu)
    length = hofer_length(H) if known_length is None else float(known_length)
    bound = length * (1.0 + margin_rel)
    return NormCertificate(
        value=nu.c_factor * bound, quantity="restricted_norm", sign_class=nu,
        generator_bound=bound, support=X, margin=margin_rel, generators=(H,))


# ---------------------------------------------------------------------------
# disjoint-support composition
# ---------------------------------------------------------------------------

def check_disjoint(regions: Sequence[Region], delta: Optional[float] = None,
                   samples: int = 220, seed: int = 11) -> float:
    """Minimum pairwise sample-cloud distance; raises below the margin delta.

    Clouds combine interior samples with boundary samples so thin regions
    are represented.
    """
    rng = np.random.default_rng(seed)
    box = regions[0].bbox
    for r in regions[1:]:
        box = box.union(r.bbox)
    if delta is None:
        delta = 1e-3 * box.diagonal
    clouds = []
    for r in regions:
        pts = [r.boundary_points(128)]
        try:
            pts.append(r.sample_interior(samples, rng))
        except Exception:
            pass
        clouds.append(np.concatenate(pts))
    worst = math.inf
    for i in range(len(clouds)):
        for j in range(i + 1, len(clouds)):
            worst = min(worst, min_cloud_distance(clouds[i], clouds[j]))
    if worst <= delta:
        raise DisjointnessError(
            f"regions are {worst:g} apart, below the margin {delta:g}")
    return worst


def compose_disjoint(items: Sequence[tuple[TimeDependentHamiltonian, Region]],
                     nu: SignClass, eps: float,
                     osc_samples: int = 129,
                     delta: Optional[float] = None,
                     ) -> tuple[TimeDependentHamiltonian, NormCertificate]:
    """One generator for the ordered composition of disjointly supported flows.

    Returns H-tilde = sum_i (time-reparametrized H_i) whose time-1 flow is
    phi_1 o ... o phi_N, together with a certificate of value
    c_nu (max_i ||H_i|| + 2 eps).
    """
    if not items:
        raise ValueError("need at least one (H, region) pair")
    regions = [X for _, X in items]
    if len(regions) > 1:
        check_disjoint(regions, delta=delta)
    lengths = []
    profiles = []
    for H, X in items:
        check_support_in(H, X)
        check_sign(H, nu)
        prof = oscillation_profile(H, n=osc_samples)
        profiles.append(prof)
        lengths.append(prof.integral())
    phis = equalize(profiles, eps)
    warped = [TimeWarpedHamiltonian(H, phi.value, phi.deriv)
              for (H, _), phi in zip(items, phis)]
    H_tilde = warped[0] if len(warped) == 1 else SumHamiltonian(warped)
    bound = max(lengths) + 2 * eps
    support = UnionRegion(regions) if len(regions) > 1 else regions[0]
    cert = NormCertificate(
        value=nu.c_factor * bound, quantity="restricted_norm", sign_class=nu,
        generator_bound=bound, support=support, epsilon=eps,
        generators=tuple(H for H, _ in items),
        notes=(f"disjoint composition of {len(items)} flows",))
    return H_tilde, cert
