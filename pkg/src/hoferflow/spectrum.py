"""Fixed points, twisted actions, and the action spectrum of planar flows.

In the plane every loop is contractible and the capping term is the signed
loop area, so the twisted action of a 1-periodic point x0 is

    A_H(x0) = -(signed area of t -> phi_H^t(x0)) - int_0^1 H(t, phi_H^t(x0)) dt.

Fixed-point search is grid-seeded Newton refinement; completeness is not
claimed, and identity regions are reported as flagged representatives rather
than enumerated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import GeometryError, HypothesisError
from .flow import (DEFAULT_CONFIG, Diffeo, FlowConfig,
                   TimeDependentHamiltonian, flow_points, flow_trajectory)
from .geometry import Region, as_points, min_cloud_distance, shoelace_area


@dataclass
class PeriodicPoint:
    point: np.ndarray
    residual: float
    isolated: bool = True


@dataclass
class FixedPointSearch:
    points: list[PeriodicPoint]
    identity_map: bool
    seed_resolution: tuple[int, int]
    tolerance: float

    @property
    def locations(self) -> np.ndarray:
        if not self.points:
            return np.empty((0, 2))
        return np.stack([p.point for p in self.points])


@dataclass
class ActionValue:
    value: float
    loop_area_part: float     # minus the signed loop area
    integral_part: float      # minus the integral of H along the loop

    def __post_init__(self):
        s = self.loop_area_part + self.integral_part
        if abs(self.value - s) > 1e-12 * max(1.0, abs(s)):
            raise ValueError("action parts must sum to the value")


def fixed_points(H: TimeDependentHamiltonian, search_region: Region,
                 tol: float = 1e-9, grid: tuple[int, int] = (36, 36),
                 cluster: float = 1e-6,
                 cfg: FlowConfig = DEFAULT_CONFIG) -> FixedPointSearch:
    """Grid-seeded fixed points of phi_H^1 inside a bounded search region.

    Trivially fixed seeds (displacement below tolerance) are accepted
    directly; seeds with small displacement are polished by a damped Newton
    iteration on phi(x) - x. Results are deduplicated by cluster radius, and
    non-isolated fixed points (identity regions) are flagged.
    """
    box = search_region.bbox
    if not box.is_finite():
        raise GeometryError("search region must be bounded")
    seeds = box.grid(*grid)
    moved = flow_points(H, 0.0, 1.0, seeds, cfg)
    disp = np.sqrt(np.sum((moved - seeds) ** 2, axis=-1))
    scale = max(1.0, box.diagonal)

    if float(np.max(disp)) < tol * scale:
        return FixedPointSearch([], identity_map=True, seed_resolution=grid,
                                tolerance=tol)

    fixed = [seeds[disp < tol * scale]]
    small = seeds[(disp >= tol * scale) & (disp < 0.2 * float(np.max(disp)))]
    if len(small):
        refined, ok = _newton_polish(H, small, tol * scale, cfg)
        keep = ok & search_region.contains(refined)
        fixed.append(refined[keep])
    pts = np.concatenate(fixed) if fixed else np.empty((0, 2))
    reps = _dedup(pts, max(cluster, 1e-6 * scale))
    if not reps:
        return FixedPointSearch([], identity_map=False, seed_resolution=grid,
                                tolerance=tol)

    # batch residuals and isolation probes in two flow calls
    reps_arr = np.stack(reps)
    n = len(reps_arr)
    probe_radius = 1e-3 * scale
    th = np.linspace(0, 2 * math.pi, 8, endpoint=False)
    ring = probe_radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
    stacked = np.concatenate([reps_arr,
                              (reps_arr[:, None, :] + ring[None]).reshape(-1, 2)])
    img = flow_points(H, 0.0, 1.0, stacked, cfg)
    res = np.sqrt(np.sum((img[:n] - reps_arr) ** 2, axis=-1))
    ring_img = img[n:].reshape(n, 8, 2)
    ring_src = stacked[n:].reshape(n, 8, 2)
    ring_disp = np.max(np.sqrt(np.sum((ring_img - ring_src) ** 2, axis=-1)),
                       axis=1)
    out = [PeriodicPoint(reps_arr[k], float(res[k]),
                         isolated=bool(ring_disp[k] > tol * scale))
           for k in range(n)]
    return FixedPointSearch(out, identity_map=False, seed_resolution=grid,
                            tolerance=tol)


def _newton_polish(H, seeds: np.ndarray, tol: float, cfg: FlowConfig,
                   iters: int = 12) -> tuple[np.ndarray, np.ndarray]:
    x = seeds.copy()
    eps = 1e-6
    for _ in range(iters):
        stack = np.concatenate([x, x + [eps, 0], x - [eps, 0],
                                x + [0, eps], x - [0, eps]])
        img = flow_points(H, 0.0, 1.0, stack, cfg)
        n = len(x)
        F = img[:n] - x
        if float(np.max(np.abs(F))) < 0.3 * tol:
            break
        dq = (img[n:2 * n] - img[2 * n:3 * n]) / (2 * eps)
        dp = (img[3 * n:4 * n] - img[4 * n:]) / (2 * eps)
        # J = D(phi - id)
        J = np.stack([dq, dp], axis=-1) - np.eye(2)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        ok_det = np.abs(det) > 1e-12
        step = np.zeros_like(x)
        inv_det = np.where(ok_det, det, 1.0)
        step[:, 0] = (J[:, 1, 1] * F[:, 0] - J[:, 0, 1] * F[:, 1]) / inv_det
        step[:, 1] = (-J[:, 1, 0] * F[:, 0] + J[:, 0, 0] * F[:, 1]) / inv_det
        step = np.where(ok_det[:, None], step, 0.0)
        lim = 0.1
        step = np.clip(step, -lim, lim)
        x = x - step
    img = flow_points(H, 0.0, 1.0, x, cfg)
    res = np.sqrt(np.sum((img - x) ** 2, axis=-1))
    return x, res < tol


def _dedup(pts: np.ndarray, radius: float) -> list[np.ndarray]:
    reps: list[np.ndarray] = []
    for x in pts:
        if all(np.linalg.norm(x - r) > radius for r in reps):
            reps.append(x)
    return reps


def actions_for(H: TimeDependentHamiltonian, points, n_loop: int = 1024,
                loop_tol: float = 1e-5,
                cfg: FlowConfig = DEFAULT_CONFIG) -> list[ActionValue]:
    """Twisted actions for a batch of 1-periodic points (one flow pass)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(pts)
    times = np.linspace(0.0, 1.0, n_loop + 1)
    loops = np.empty((n_loop + 1, n, 2))
    loops[0] = pts
    cur = pts.copy()
    hv = np.empty((n_loop + 1, n))
    hv[0] = H.value(0.0, cur)
    for k in range(1, n_loop + 1):
        cur = flow_points(H, times[k - 1], times[k], cur, cfg)
        loops[k] = cur
        hv[k] = H.value(float(times[k]), cur)
    gaps = np.sqrt(np.sum((loops[-1] - loops[0]) ** 2, axis=-1))
    scale = max(1.0, float(np.max(np.abs(loops))))
    if float(np.max(gaps)) > loop_tol * scale:
        raise GeometryError(
            f"trajectory does not close (worst gap {float(np.max(gaps)):g})")
    out = []
    for i in range(n):
        area = shoelace_area(loops[:-1, i, :])
        integral = float(integrate.simpson(hv[:, i], x=times))
        out.append(ActionValue(value=-area - integral, loop_area_part=-area,
                               integral_part=-integral))
    return out


def action(H: TimeDependentHamiltonian, x0, n_loop: int = 1024,
           loop_tol: float = 1e-5,
           cfg: FlowConfig = DEFAULT_CONFIG) -> ActionValue:
    """Twisted action of a 1-periodic point (shoelace capping in the plane)."""
    return actions_for(H, np.asarray(x0, dtype=float)[None, :], n_loop,
                       loop_tol, cfg)[0]


def action_spectrum(H: TimeDependentHamiltonian, search_region: Region,
                    cluster: float = 1e-6,
                    cfg: FlowConfig = DEFAULT_CONFIG) -> dict:
    """Sorted, deduplicated actions of the found periodic points.

    Completeness is not claimed (the search is grid-seeded); the seed
    resolution is reported alongside the values.
    """
    found = fixed_points(H, search_region, cfg=cfg)
    if found.identity_map:
        return {"values": [0.0], "identity_map": True,
                "seed_resolution": found.seed_resolution}
    vals = sorted(a.value for a in actions_for(H, found.locations, cfg=cfg))
    dedup: list[float] = []
    for v in vals:
        if not dedup or abs(v - dedup[-1]) > cluster:
            dedup.append(v)
    return {"values": dedup, "identity_map": False,
            "seed_resolution": found.seed_resolution,
            "points": found.locations.tolist()}


def check_displacement(moved_by: TimeDependentHamiltonian, X: Region,
                       margin: Optional[float] = None,
                       cfg: FlowConfig = DEFAULT_CONFIG,
                       samples: int = 160, seed: int = 3) -> float:
    """Verify phi^1 of the generator displaces X; returns the clearance."""
    rng = np.random.default_rng(seed)
    cloud = np.concatenate([X.boundary_points(96),
                            X.sample_interior(samples, rng)])
    image = flow_points(moved_by, 0.0, 1.0, cloud, cfg)
    if margin is None:
        margin = 1e-3 * X.bbox.diagonal
    inside = X.contains(image)
    dist = min_cloud_distance(image, cloud)
    if np.any(inside) or dist <= margin:
        raise HypothesisError(
            f"displacement hypothesis fails: {int(np.sum(inside))} image "
            f"points inside, clearance {dist:g}")
    return dist


def check_concatenation(H: TimeDependentHamiltonian,
                        Hp: TimeDependentHamiltonian,
                        search_region: Region,
                        fp_tol: float = 1e-4, action_tol: float = 1e-5,
                        cfg: FlowConfig = DEFAULT_CONFIG) -> dict:
    """Compare periodic points and actions of H # H' against H' alone.

    Hypotheses: H' displaces the support of H (checked on sample clouds);
    the concatenation operator seam-smooths both inputs in time. Raises
    HypothesisError when the displacement fails, as the identity then has no
    reason to hold.
    """
    from .hofer import concat

    if H.support is None:
        raise GeometryError("H needs a declared support region")
    clearance = check_displacement(Hp, H.support, cfg=cfg)

    Hcat = concat(H, Hp)
    found_cat = fixed_points(Hcat, search_region, cfg=cfg)
    found_p = fixed_points(Hp, search_region, cfg=cfg)
    a = found_cat.locations
    b = found_p.locations
    if len(a) == 0 and len(b) == 0:
        set_dist = 0.0
    elif len(a) == 0 or len(b) == 0:
        set_dist = math.inf
    else:
        d = a[:, None, :] - b[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
        set_dist = max(float(np.max(np.min(dist, axis=1))),
                       float(np.max(np.min(dist, axis=0))))

    if len(b):
        av_cat = actions_for(Hcat, b, cfg=cfg)
        av_p = actions_for(Hp, b, cfg=cfg)
        worst_action = max(abs(u.value - v.value)
                           for u, v in zip(av_cat, av_p))
    else:
        worst_action = 0.0

    return {
        "displacement_clearance": clearance,
        "fixed_point_set_distance": set_dist,
        "n_points": (len(a), len(b)),
        "max_action_difference": worst_action,
        "fixed_points_match": set_dist <= fp_tol,
        "actions_match": worst_action <= action_tol,
    }


def spectral_diagnostic(H: TimeDependentHamiltonian, reference_area: float,
                        search_region: Region,
                        cfg: FlowConfig = DEFAULT_CONFIG) -> dict:
    """min of the found spectrum plus the mean term over a reference area.

    The closed-manifold hypotheses behind the corresponding lower bound do
    not hold in the plane; the output is labeled as a diagnostic only.
    """
    spec = action_spectrum(H, search_region, cfg=cfg)
    if not spec["values"]:
        raise GeometryError("diagnostic unavailable: empty spectrum")
    if H.support is None:
        raise GeometryError("H needs a declared support region")
    box = H.support.bbox

    def spatial(t: float) -> float:
        qs = np.linspace(box.q0, box.q1, 160)
        ps = np.linspace(box.p0, box.p1, 160)
        Q, P = np.meshgrid(qs, ps, indexing="ij")
        vals = H.value(float(t), np.stack([Q, P], axis=-1))
        inner = integrate.simpson(vals, x=ps, axis=1)
        return float(integrate.simpson(inner, x=qs))

    ts = np.linspace(0.0, 1.0, 41)
    mean_term = float(integrate.simpson([spatial(t) for t in ts], x=ts))
    return {
        "value": min(spec["values"]) + mean_term / reference_area,
        "min_spectrum": min(spec["values"]),
        "mean_term": mean_term / reference_area,
        "flag": "diagnostic only: closed-manifold hypotheses not satisfied "
                "in the planar model",
    }
