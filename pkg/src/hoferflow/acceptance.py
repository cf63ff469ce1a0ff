"""The acceptance suite: nine property-based criteria at fixed tolerances.

Each criterion is a named callable returning a CheckResult; the CLI's
verify-suite and the pytest acceptance module both run this registry.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import HypothesisError
from .flow import (AutonomousHamiltonian, Diffeo, FlowConfig,
                   flow_points, jacobian_determinant, map_sup_distance)
from .geometry import (Disk, ImageRegion, Rectangle, RoundedRectangle,
                       hausdorff_distance, winding_number)
from .hofer import (MINUS, PLUS, ZERO, compose_disjoint, hofer_length,
                    restricted_certificate)
from .profiles import Polynomial2D, RadialFunction, make_bump


@dataclass
class CheckResult:
    name: str
    passed: bool
    runtime: float
    summary: str
    details: dict = field(default_factory=dict)


def _result(name, t0, passed, summary, **details) -> CheckResult:
    return CheckResult(name, bool(passed), time.time() - t0, summary,
                       dict(details))


# ---------------------------------------------------------------------------
# 1. symplecticity and order
# ---------------------------------------------------------------------------

def criterion_symplecticity() -> CheckResult:
    t0 = time.time()
    rng = np.random.default_rng(42)
    worst_det = 0.0
    orders = []
    for _ in range(10):
        amp = rng.uniform(0.2, 0.5)
        cq, cp = rng.uniform(-0.3, 0.3, 2)
        a_in = rng.uniform(0.6, 1.2)
        a_out = a_in * rng.uniform(3.0, 4.5)
        rho = make_bump(Disk(a_in, (cq, cp)), Disk(a_out, (cq, cp)))
        poly = Polynomial2D({(0, 1): rng.uniform(-1, 1),
                             (1, 0): rng.uniform(-1, 1),
                             (2, 0): rng.uniform(-0.5, 0.5)})
        H = AutonomousHamiltonian(rho * (amp * poly))
        phi = Diffeo.from_flow(H, 1.0, FlowConfig(step=1e-3))
        pts = Disk(a_out * 1.2, (cq, cp)).bbox.random_points(100, rng)
        worst_det = max(worst_det, float(np.max(np.abs(
            jacobian_determinant(phi, pts, eps=5e-6) - 1.0))))
        p = pts[:15]
        sols = {h: flow_points(H, 0, 1, p, FlowConfig(step=h))
                for h in (1e-3, 5e-4, 2.5e-4)}
        e1 = float(np.max(np.abs(sols[1e-3] - sols[5e-4])))
        e2 = float(np.max(np.abs(sols[5e-4] - sols[2.5e-4])))
        orders.append(math.log2(e1 / e2))
    runtime = time.time() - t0
    passed = worst_det <= 1e-6 and min(orders) >= 1.9 and runtime <= 60
    return _result("1-symplecticity", t0, passed,
                   f"|det-1| max {worst_det:.2e}, order min {min(orders):.2f}",
                   worst_det=worst_det, orders=orders, runtime_limit=60)


# ---------------------------------------------------------------------------
# 2. reparametrization lemma
# ---------------------------------------------------------------------------

def criterion_reparametrization() -> CheckResult:
    from .reparam import (PiecewiseConstantProfile, equalize, equalize_report)
    t0 = time.time()
    rng = np.random.default_rng(7)
    eps = 0.05
    failures = 0
    worst_excess = -math.inf
    for _ in range(100):
        n = int(rng.integers(1, 6))
        profiles = []
        for _ in range(n):
            k = int(rng.integers(1, 6))
            breaks = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, k)), [1.0]])
            breaks = np.unique(breaks)
            vals = rng.uniform(0.0, 3.0, len(breaks) - 1)
            if rng.uniform() < 0.15:
                vals[:] = 0.0  # zero-profile reduction path
            profiles.append(PiecewiseConstantProfile(breaks, vals))
        phis = equalize(profiles, eps)
        rep = equalize_report(profiles, phis, eps)
        excess = rep["achieved"] - rep["bound"]
        worst_excess = max(worst_excess, excess)
        if excess > 1e-6:
            failures += 1
    # the two-indicator example: naive max integrates to 2, equalized <= 1+eps
    ind1 = PiecewiseConstantProfile(np.array([0.0, 0.5, 1.0]),
                                    np.array([2.0, 0.0]))
    ind2 = PiecewiseConstantProfile(np.array([0.0, 0.5, 1.0]),
                                    np.array([0.0, 2.0]))
    phis = equalize([ind1, ind2], eps)
    rep2 = equalize_report([ind1, ind2], phis, eps)
    runtime = time.time() - t0
    passed = (failures == 0 and rep2["achieved"] <= 1 + eps + 1e-6
              and abs(rep2["naive_bound"] - (2 + eps)) < 1e-9
              and runtime <= 120)
    return _result("2-reparametrization", t0, passed,
                   f"100 instances, worst excess {worst_excess:.2e}; "
                   f"indicators {rep2['achieved']:.4f} <= {1 + eps}",
                   failures=failures, indicator_bound=rep2["achieved"],
                   runtime_limit=120)


# ---------------------------------------------------------------------------
# 3. disjoint-support composition
# ---------------------------------------------------------------------------

def _strip_mover(p_lo: float, p_hi: float, amp: float, sign: str = "+"):
    from .transport import translation_generator
    K = Rectangle(-0.45, 0.45, p_lo + 0.12, p_hi - 0.12)
    H, _ = translation_generator(K, [amp, 0.0], pad_rel=0.18, sign=sign)
    return H


def criterion_disjoint_composition() -> CheckResult:
    t0 = time.time()
    eps = 0.01
    H1 = _strip_mover(0.0, 1.0, 0.5, "+")
    H2 = _strip_mover(1.5, 2.5, 0.5, "+")
    items = [(H1, Rectangle(-1.3, 1.3, -0.2, 1.2)),
             (H2, Rectangle(-1.3, 1.3, 1.3, 2.7))]
    H_tilde, cert = compose_disjoint(items, PLUS, eps)
    l1, l2 = hofer_length(H1), hofer_length(H2)
    # flow identity on a grid
    pts = Rectangle(-1.0, 1.0, 0.0, 2.6).bbox.grid(14, 14)
    rng = np.random.default_rng(3)
    pts = np.concatenate([pts, Rectangle(-1, 1, 0, 2.6).bbox.random_points(100, rng)])
    cfg = FlowConfig(step=5e-4)
    lhs = flow_points(H_tilde, 0, 1, pts, cfg)
    rhs = flow_points(H2, 0, 1, flow_points(H1, 0, 1, pts, cfg), cfg)
    flow_gap = float(np.max(np.sqrt(np.sum((lhs - rhs) ** 2, axis=-1))))
    cert_ok = cert.value <= max(l1, l2) + 2 * eps + 1e-9
    c_plus = cert.value / cert.generator_bound

    # c-table exactness across the three classes
    cert0 = restricted_certificate(H1, Rectangle(-1.3, 1.3, -0.2, 1.2), ZERO,
                                   known_length=l1)
    certm = restricted_certificate(-1.0 * H1, Rectangle(-1.3, 1.3, -0.2, 1.2),
                                   MINUS, known_length=l1)
    table_ok = (c_plus == 1.0
                and cert0.value / cert0.generator_bound == 2.0
                and certm.value / certm.generator_bound == 1.0)

    # Remark 2.2 pair: H2 = -H1 on a disjoint translate; the zero class
    # really needs the factor 2
    H1b = _strip_mover(0.0, 1.0, 0.5, "+")
    H2b = -1.0 * _strip_mover(1.5, 2.5, 0.5, "+")
    Hz, certz = compose_disjoint(
        [(H1b, Rectangle(-1.3, 1.3, -0.2, 1.2)),
         (H2b, Rectangle(-1.3, 1.3, 1.3, 2.7))], ZERO, eps)
    direct = hofer_length(Hz)
    base = max(hofer_length(H1b), hofer_length(H2b))
    factor = direct / base
    factor2_needed = direct > base + 2 * eps + 1e-6  # c=1 bound would fail
    factor2_holds = direct <= certz.value + 1e-9

    passed = (flow_gap <= 1e-4 and cert_ok and table_ok
              and factor2_needed and factor2_holds)
    return _result("3-disjoint-composition", t0, passed,
                   f"flow gap {flow_gap:.2e}, cert {cert.value:.4f} <= "
                   f"max+2eps, zero-class factor {factor:.3f}",
                   flow_gap=flow_gap, factor=factor,
                   cert_value=cert.value, zero_cert=certz.value)


# ---------------------------------------------------------------------------
# 4. disk mover
# ---------------------------------------------------------------------------

def criterion_disk_mover() -> CheckResult:
    from .constructions import disk_mover
    from .hofer import check_sign
    t0 = time.time()
    scenarios = []
    U = Rectangle(-1.05, 1.05, 0.0, 0.75)
    X0 = RoundedRectangle.with_area((-0.5, 0.36), 0.62, 0.5, 0.06)
    X1 = RoundedRectangle((0.5, 0.36), X0.width, X0.height, X0.corner_radius)
    scenarios.append((U, X0, X1, 1.0, PLUS))
    scenarios.append((U, X0, X1, 1.0, MINUS))
    Uv = Rectangle(-0.8, 0.8, -1.3, 1.3)
    Y0 = Disk(0.3, (0.0, -0.7))
    Y1 = Disk(0.3, (0.0, 0.7))
    scenarios.append((Uv, Y0, Y1, 2.3, PLUS))
    Ud = Rectangle(-1.75, 1.75, -1.75, 1.75)
    Z0 = Disk(0.25, (-0.6, -0.6))
    Z1 = Disk(0.25, (0.6, 0.6))
    scenarios.append((Ud, Z0, Z1, 3.2, MINUS))
    Us = Rectangle(-1.4, 1.4, 0.0, 0.5)
    W0 = RoundedRectangle.with_area((-0.85, 0.25), 0.4, 0.3, 0.05)
    W1 = RoundedRectangle((0.85, 0.25), W0.width, W0.height, W0.corner_radius)
    scenarios.append((Us, W0, W1, 1.0, PLUS))

    rows = []
    ok = True
    for k, (U_, A, B, c, nu) in enumerate(scenarios):
        res = disk_mover(U_, A, B, c, nu)
        sign_ok = True
        try:
            check_sign(res.hamiltonian, nu)
        except Exception:
            sign_ok = False
        good = (res.hausdorff <= 1e-4 and res.certificate.value < c and sign_ok)
        ok &= good
        rows.append({"scenario": k, "nu": str(nu),
                     "hausdorff": res.hausdorff,
                     "certificate": res.certificate.value, "budget": c,
                     "ok": good})
    worst_h = max(r["hausdorff"] for r in rows)
    return _result("4-disk-mover", t0, ok,
                   f"5 scenarios, worst Hausdorff {worst_h:.2e}, "
                   "all certificates under budget",
                   rows=rows)


# ---------------------------------------------------------------------------
# 5. nice subsets
# ---------------------------------------------------------------------------

def criterion_nice_subsets() -> CheckResult:
    from .constructions import nice_subsets, render_system
    t0 = time.time()
    ok = True
    details = {}
    for N, total in ((1, 7.0), (2, 7.0), (3, 14.0)):
        sys_ = nice_subsets(total, 1.0, N)
        rep = sys_.verify()
        good = (rep["ok"] and rep["flow_vs_closed_form"] <= 1e-5)
        ok &= good
        details[f"N={N}"] = {k: v for k, v in rep.items()}
        if N == 2:
            with tempfile.TemporaryDirectory() as td:
                path = render_system(sys_, os.path.join(td, "fig.svg"))
                svg = open(path).read()
            # topology of the reference layout: a block, 4 fingers, 5 disks
            gids = [f'id="X{i}"' for i in range(5)] \
                + [f'id="finger-{i}"' for i in range(1, 5)] \
                + ['id="U0-block"', 'id="chi2-U2"']
            svg_ok = all(g in svg for g in gids)
            ok &= svg_ok
            details["svg_topology"] = svg_ok
    return _result("5-nice-subsets", t0, ok,
                   "N in {1,2,3}: five families verified; shear matches "
                   "closed form; figure topology reproduced",
                   **details)


# ---------------------------------------------------------------------------
# 6. theorem pipeline
# ---------------------------------------------------------------------------

def reference_hamiltonian():
    rho = make_bump(Disk(0.35), Disk(0.72))
    return AutonomousHamiltonian(rho * Polynomial2D({(0, 0): 0.5}))


def criterion_theorem_pipeline() -> CheckResult:
    from .decomposition import decompose
    t0 = time.time()
    H = reference_hamiltonian()
    a = 1.0
    totals = []
    ok = True
    details = {}
    for N in (1, 2, 3):
        rep = decompose(H, a, 0.8, N, verification_points=60)
        budgets = all(f.within_budget for f in rep.factor_table)
        word = rep.residuals.get("word_vs_direct", math.inf)
        arithmetic = abs(rep.theorem_total
                         - (8 * a + 2 * rep.hofer_length_H / N))
        good = budgets and word <= 1e-3 and arithmetic <= 1e-12
        ok &= good
        totals.append(rep.theorem_total)
        details[f"N={N}"] = {"total": rep.theorem_total, "word": word,
                             "budgets": budgets,
                             "residuals": dict(rep.residuals)}
    decreasing = all(a1 > a2 for a1, a2 in zip(totals, totals[1:]))
    runtime = time.time() - t0
    ok = ok and decreasing and runtime <= 600
    return _result("6-theorem-pipeline", t0, ok,
                   f"totals {['%.4f' % v for v in totals]} decreasing, "
                   f"runtime {runtime:.0f}s <= 600s",
                   totals=totals, runtime_limit=600, **details)


# ---------------------------------------------------------------------------
# 7. transport
# ---------------------------------------------------------------------------

def criterion_transport() -> CheckResult:
    from .transport import (Density1D, RadialDensity2D, SeparableDensity2D,
                            ball_rearrange, mass_transport_1d,
                            moser_separable_2d, pullback_residual_1d,
                            pullback_residual_2d)
    from .flow import word_area_residual
    t0 = time.time()
    d0 = Density1D(lambda t: np.ones_like(t), 0, 1)
    d1 = Density1D(lambda t: 2 * np.ones_like(t), 0, 0.5)
    r_simple = pullback_residual_1d(mass_transport_1d(d0, d1), d0, d1)
    p0 = Density1D(lambda t: 1 + 0.5 * t + 0.25 * t ** 2, 0, 1)
    mass = p0.mass
    p1 = Density1D(lambda t: (1 + t) * (mass / 1.5), 0, 1)
    r_poly = pullback_residual_1d(mass_transport_1d(p0, p1), p0, p1)

    u0 = Density1D(lambda t: np.ones_like(t), 0, 1)
    v0 = Density1D(lambda t: np.ones_like(t), 0, 1)
    w0 = SeparableDensity2D(u0, v0)
    u1 = Density1D(lambda t: 1 + t, 0, 1)
    v1 = Density1D(lambda t: np.full_like(t, 1 / 1.5), 0, 1)
    w1 = SeparableDensity2D(u1, v1)
    psi2 = moser_separable_2d(w0, w1)
    r_sep = pullback_residual_2d(psi2, w0, w1, Rectangle(0, 1, 0, 1), n=128)

    g0 = RadialDensity2D(lambda s: np.ones_like(s), 1.0)
    g1 = RadialDensity2D(lambda s: (2 - s) * (g0.mass
                                              / (math.pi * 1.5)), 1.0)
    psir = moser_separable_2d(g0, g1)
    r_rad = pullback_residual_2d(psir, g0, g1, Disk(math.pi * 0.9 ** 2), n=128)

    A = Disk(0.3, (1.0, 1.0))
    B = Disk(0.3, (3.0, 1.0))
    arena = Rectangle(0, 4, 0, 4)
    word = ball_rearrange([A, B], [B, A], arena)
    h_swap = max(hausdorff_distance(ImageRegion(A, word), B),
                 hausdorff_distance(ImageRegion(B, word), A))
    wind = winding_number(word.forward(A.boundary_points(256)), B.bbox.center)
    area_res = word_area_residual(word, arena.bbox.grid(8, 8))

    passed = (max(r_simple, r_poly) <= 1e-7 and max(r_sep, r_rad) <= 1e-6
              and h_swap <= 1e-4 and wind == 1 and area_res <= 1e-5)
    return _result("7-transport", t0, passed,
                   f"1-D {max(r_simple, r_poly):.1e}, 2-D "
                   f"{max(r_sep, r_rad):.1e}, swap Hausdorff {h_swap:.1e}, "
                   f"winding {wind}",
                   r_1d=[r_simple, r_poly], r_2d=[r_sep, r_rad],
                   swap_hausdorff=h_swap, winding=wind,
                   area_residual=area_res)


# ---------------------------------------------------------------------------
# 8. spectrum
# ---------------------------------------------------------------------------

def spectrum_scenario():
    """A rotation bump in a seat displaced by a budgeted mover."""
    from .constructions import disk_mover
    seat = Disk(0.5, (-1.0, 0.0))
    rho = make_bump(Disk(0.18, (-1.0, 0.0)), Disk(0.45, (-1.0, 0.0)))
    H = AutonomousHamiltonian(rho * Polynomial2D({(0, 0): 0.3}))
    H.support = Disk(0.5, (-1.0, 0.0))
    U = Rectangle(-2.2, 2.2, -1.1, 1.1)
    target = Disk(0.5, (1.0, 0.0))
    mover = disk_mover(U, seat, target, 3.0, PLUS,
                       cfg=FlowConfig(step=5e-4), pad_abs=0.25)
    return H, mover.hamiltonian, Rectangle(-1.9, 1.9, -0.95, 0.95)


def criterion_spectrum() -> CheckResult:
    from .spectrum import actions_for, check_concatenation, fixed_points
    t0 = time.time()
    cfg = FlowConfig(step=5e-4)
    H, Hm, region = spectrum_scenario()
    rep = check_concatenation(H, Hm, region, cfg=cfg)
    ok = rep["fixed_points_match"] and rep["actions_match"]

    # negative control: a mover too weak to displace the support
    weak = 0.05 * Hm
    refused = False
    try:
        check_concatenation(H, weak, region, cfg=cfg)
    except HypothesisError:
        refused = True
    ok &= refused

    # equilibrium identity: action of any found equilibrium equals -H there
    rho = make_bump(Disk(0.3), Disk(1.2))
    g = RadialFunction(lambda s: 1.5 * s, lambda s: 1.5 + 0 * s)
    Hr = AutonomousHamiltonian(rho * g)
    found = fixed_points(Hr, Rectangle(-0.75, 0.75, -0.75, 0.75), cfg=cfg)
    eq_err = 0.0
    if len(found.points):
        locs = found.locations
        acts = actions_for(Hr, locs, cfg=cfg)
        vals = Hr.value(0.0, locs)
        eq_err = max(abs(a.value + float(v)) for a, v in zip(acts, vals))
    ok &= eq_err <= 1e-6
    return _result("8-spectrum", t0, ok,
                   f"sets within {rep['fixed_point_set_distance']:.1e}, "
                   f"actions within {rep['max_action_difference']:.1e}, "
                   f"refusal {refused}, equilibrium identity {eq_err:.1e}",
                   concat=rep, refusal=refused, equilibrium_error=eq_err)


# ---------------------------------------------------------------------------
# 9. determinism
# ---------------------------------------------------------------------------

def criterion_determinism() -> CheckResult:
    from .cli import run_scenario
    from .reporting import write_json_report
    from .scenarios import parse_scenario
    t0 = time.time()
    scenario = parse_scenario({
        "version": 1, "kind": "nice-subsets", "seed": 5,
        "name": "determinism-probe",
        "params": {"total_area": 7.0, "a": 1.0, "N": 2},
    })
    blobs = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as td:
            report, _ = run_scenario(scenario, td)
            path = write_json_report(os.path.join(td, "report.json"), report)
            with open(path, "rb") as fh:
                blobs.append(fh.read())
    identical = blobs[0] == blobs[1]
    return _result("9-determinism", t0, identical,
                   f"two runs, byte-identical reports: {identical}",
                   bytes=len(blobs[0]))


CRITERIA: dict[str, Callable[[], CheckResult]] = {
    "1-symplecticity": criterion_symplecticity,
    "2-reparametrization": criterion_reparametrization,
    "3-disjoint-composition": criterion_disjoint_composition,
    "4-disk-mover": criterion_disk_mover,
    "5-nice-subsets": criterion_nice_subsets,
    "6-theorem-pipeline": criterion_theorem_pipeline,
    "7-transport": criterion_transport,
    "8-spectrum": criterion_spectrum,
    "9-determinism": criterion_determinism,
}


def run_criteria(name_filter: Optional[str] = None) -> list[CheckResult]:
    out = []
    for name, fn in CRITERIA.items():
        if name_filter and name_filter not in name:
            continue
        out.append(fn())
    return out
