"""Batch front-end: scenario files in, verification reports and figures out.

    hoferflow run <scenario.json> [--out DIR] [--seed K] [--tol-scale X]
    hoferflow verify-suite [--filter NAME] [--out DIR]

Exit codes: 0 all checks pass, 1 a named check failed, 2 parse/validation
error. Reports are deterministic for a fixed scenario and seed.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import reporting
from .errors import HoferflowError, HypothesisError, ScenarioError
from .flow import (DEFAULT_CONFIG, Diffeo, FlowConfig, flow_trajectory,
                   jacobian_determinant)
from .geometry import Disk, Rectangle
from .hofer import MINUS, PLUS, SignClass, ZERO, hofer_length, oscillation
from .scenarios import (Scenario, build_hamiltonian, build_profile1d,
                        build_region, load_scenario)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="hoferflow",
                                 description="planar Hofer-geometry toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run a scenario file")
    runp.add_argument("scenario")
    runp.add_argument("--out", default="out")
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--tol-scale", type=float, default=1.0)

    ver = sub.add_parser("verify-suite", help="run the acceptance criteria")
    ver.add_argument("--filter", default=None)
    ver.add_argument("--out", default=None)

    args = ap.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_verify(args)


def _cmd_run(args) -> int:
    try:
        sc = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        sc.seed = int(args.seed)
    try:
        report, failures = run_scenario(sc, args.out, tol_scale=args.tol_scale)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except HoferflowError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    path = os.path.join(args.out, "report.json")
    reporting.write_json_report(path, report)
    print(f"report: {path}")
    if failures:
        for name in failures:
            print(f"FAILED check: {name}", file=sys.stderr)
        return 1
    return 0


def _cmd_verify(args) -> int:
    from .acceptance import run_criteria
    results = run_criteria(name_filter=args.filter)
    width = max(len(r.name) for r in results) if results else 10
    all_ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        all_ok &= r.passed
        print(f"{r.name:<{width}}  {status}  ({r.runtime:.1f}s)  {r.summary}")
    if args.out:
        reporting.write_json_report(
            os.path.join(args.out, "verify_suite.json"),
            {r.name: {"passed": r.passed, "details": r.details}
             for r in results})
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# scenario runners
# ---------------------------------------------------------------------------

def run_scenario(sc: Scenario, out_dir: str, tol_scale: float = 1.0
                 ) -> tuple[dict, list[str]]:
    os.makedirs(out_dir, exist_ok=True)
    runner = _RUNNERS.get(sc.kind)
    if runner is None:
        raise ScenarioError(f"no runner for kind {sc.kind!r}")
    checks, artifacts = runner(sc, out_dir, tol_scale)
    failures = [name for name, ok, _ in checks if not ok]
    report = {
        "schema_version": 1,
        "scenario": {"kind": sc.kind, "name": sc.name, "seed": sc.seed,
                     "params": sc.params, "tolerances": sc.tolerances},
        "checks": [{"name": n, "passed": bool(ok), "value": v}
                   for n, ok, v in checks],
        "artifacts": sorted(os.path.relpath(a, out_dir) for a in artifacts),
        "passed": not failures,
    }
    return report, failures


def _run_flow(sc: Scenario, out: str, ts: float):
    H = build_hamiltonian(sc.params["hamiltonian"])
    cfg = FlowConfig(step=float(sc.params.get("step", 1e-3)))
    points = np.asarray(sc.params.get("points", [[0.5, 0.0]]), dtype=float)
    n_samples = int(sc.params.get("samples", 201))
    times = np.linspace(0.0, 1.0, n_samples)
    artifacts = []
    trajs = []
    for k, x0 in enumerate(points):
        traj = flow_trajectory(H, x0, times, cfg)
        trajs.append(traj)
        artifacts.append(reporting.write_trajectory_csv(
            os.path.join(out, f"trajectory_{k:03d}.csv"), times, traj))
    artifacts.append(reporting.phase_plot(
        os.path.join(out, "phase.svg"), trajs, title=sc.name))
    tol = sc.tol("det", 1e-5, ts)
    phi = Diffeo.from_flow(H, 1.0, cfg)
    dev = float(np.max(np.abs(jacobian_determinant(phi, points, eps=1e-5) - 1)))
    checks = [("symplectic_det", dev <= tol, dev)]
    return checks, artifacts


def _run_norm(sc: Scenario, out: str, ts: float):
    H = build_hamiltonian(sc.params["hamiltonian"])
    ts_grid = np.linspace(0.0, 1.0, int(sc.params.get("samples", 65)))
    osc = [oscillation(H, float(t)) for t in ts_grid]
    length = hofer_length(H)
    artifacts = [reporting.write_curve_csv(
        os.path.join(out, "oscillation.csv"), ["t", "oscillation"],
        list(zip(ts_grid, osc)))]
    artifacts.append(reporting.curve_plot(
        os.path.join(out, "oscillation.svg"), ts_grid, osc, "t",
        "oscillation", sc.name))
    quad_gap = abs(length - float(np.trapezoid(osc, ts_grid)))
    tol = sc.tol("quadrature_consistency", 5e-3, ts) * max(1.0, length)
    checks = [("hofer_length", True, length),
              ("quadrature_consistency", quad_gap <= tol, quad_gap)]
    if "certificate" in sc.params:
        from .hofer import restricted_certificate
        spec = sc.params["certificate"]
        nu = _sign(spec.get("nu", "0"))
        cert = restricted_certificate(H, build_region(spec["region"]), nu,
                                      known_length=length)
        ratio = cert.value / cert.generator_bound
        checks.append(("c_factor_exact", ratio == nu.c_factor, ratio))
    return checks, artifacts


def _sign(s: str) -> SignClass:
    return {"+": PLUS, "-": MINUS, "0": ZERO}[s]


def _run_reparam(sc: Scenario, out: str, ts: float):
    from .reparam import equalize, equalize_report, pushforward_grid
    profiles = [build_profile1d(p) for p in sc.params["profiles"]]
    eps = float(sc.params.get("eps", 0.05))
    phis = equalize(profiles, eps)
    rep = equalize_report(profiles, phis, eps)
    grid, rows = pushforward_grid(profiles, phis, n=2048)
    artifacts = [reporting.write_curve_csv(
        os.path.join(out, "pushforwards.csv"),
        ["t"] + [f"f{k}" for k in range(len(rows))],
        np.column_stack([grid] + list(rows)))]
    checks = [("equalized_bound", rep["achieved"] <= rep["bound"] + 1e-9,
               rep["achieved"]),
              ("below_naive", rep["achieved"] <= rep["naive_bound"],
               rep["naive_bound"])]
    return checks, artifacts


def _run_nice_subsets(sc: Scenario, out: str, ts: float):
    from .constructions import nice_subsets, render_system
    sys_ = nice_subsets(float(sc.params["total_area"]),
                        float(sc.params["a"]), int(sc.params["N"]))
    rep = sys_.verify()
    artifacts = [render_system(sys_, os.path.join(out, "system.svg"))]
    checks = [
        ("containment", rep["containment_violations"] == 0,
         rep["containment_violations"]),
        ("areas_exact", rep["area_error"] <= sc.tol("area", 1e-6, ts),
         rep["area_error"]),
        ("x0_separated", rep["x0_xi_distance"] > sys_.delta,
         rep["x0_xi_distance"]),
        ("shear_fixes_disks", rep["chi_fixes_X"] <= 1e-9, rep["chi_fixes_X"]),
        ("flow_matches_closed_form",
         rep["flow_vs_closed_form"] <= sc.tol("shear", 1e-5, ts),
         rep["flow_vs_closed_form"]),
        ("sheared_pairs_disjoint",
         sys_.N == 1 or rep["sheared_pair_distance"] > sys_.delta / 2,
         rep["sheared_pair_distance"]),
    ]
    return checks, artifacts


def _run_disk_mover(sc: Scenario, out: str, ts: float):
    from .constructions import disk_mover
    U = build_region(sc.params["region"])
    X0 = build_region(sc.params["source"])
    X1 = build_region(sc.params["target"])
    nu = _sign(sc.params.get("nu", "+"))
    c = float(sc.params["budget"])
    res = disk_mover(U, X0, X1, c, nu)
    checks = [
        ("hausdorff", res.hausdorff <= sc.tol("hausdorff", 1e-4, ts),
         res.hausdorff),
        ("certificate_below_budget", res.certificate.value < c,
         res.certificate.value),
    ]
    return checks, []


def _run_decompose(sc: Scenario, out: str, ts: float):
    from .decomposition import decompose
    H = build_hamiltonian(sc.params["hamiltonian"])
    rep = decompose(H, float(sc.params["a"]),
                    sc.params.get("a_prime"), int(sc.params["N"]),
                    verification_points=int(sc.params.get("points", 60)))
    data = rep.as_dict()
    reporting.write_json_report(os.path.join(out, "decomposition.json"), data)
    budgets_ok = all(f.within_budget for f in rep.factor_table)
    word_tol = sc.tol("word", 1e-3, ts)
    checks = [
        ("factor_budgets", budgets_ok,
         max((f.cert_value / f.budget for f in rep.factor_table
              if f.budget > 0), default=0.0)),
        ("word_reproduces_flow",
         rep.residuals.get("word_vs_direct", 0.0) <= word_tol,
         rep.residuals.get("word_vs_direct", 0.0)),
        ("total_bound", True, rep.theorem_total),
    ]
    return checks, [os.path.join(out, "decomposition.json")]


def _run_spectrum(sc: Scenario, out: str, ts: float):
    from .spectrum import action_spectrum
    H = build_hamiltonian(sc.params["hamiltonian"])
    region = build_region(sc.params["region"])
    spec = action_spectrum(H, region)
    artifacts = [reporting.write_curve_csv(
        os.path.join(out, "spectrum.csv"), ["value"],
        [[v] for v in spec["values"]])]
    checks = [("spectrum_nonempty", len(spec["values"]) > 0,
               len(spec["values"]))]
    return checks, artifacts


def _run_concat_check(sc: Scenario, out: str, ts: float):
    from .spectrum import check_concatenation
    H = build_hamiltonian(sc.params["hamiltonian"])
    Hp = build_hamiltonian(sc.params["displacing"])
    region = build_region(sc.params["region"])
    expect_refusal = bool(sc.params.get("expect_hypothesis_error", False))
    try:
        rep = check_concatenation(H, Hp, region,
                                  fp_tol=sc.tol("fixed_points", 1e-4, ts),
                                  action_tol=sc.tol("actions", 1e-5, ts))
    except HypothesisError as exc:
        if expect_refusal:
            return [("hypothesis_refused", True, str(exc))], []
        raise
    if expect_refusal:
        return [("hypothesis_refused", False, "check unexpectedly ran")], []
    checks = [
        ("fixed_point_sets_match", rep["fixed_points_match"],
         rep["fixed_point_set_distance"]),
        ("actions_match", rep["actions_match"],
         rep["max_action_difference"]),
    ]
    return checks, []


_RUNNERS = {
    "flow": _run_flow,
    "norm": _run_norm,
    "reparam": _run_reparam,
    "nice-subsets": _run_nice_subsets,
    "disk-mover": _run_disk_mover,
    "decompose": _run_decompose,
    "spectrum": _run_spectrum,
    "concat-check": _run_concat_check,
}


if __name__ == "__main__":
    sys.exit(main())
