"""Scenario file schema (versioned JSON) and object builders.

A scenario names a command kind, a random seed, tolerances, and the
geometric/Hamiltonian parameters as nested tagged objects, e.g.

    {"version": 1, "kind": "decompose", "seed": 0,
     "params": {"a": 1.0, "a_prime": 0.8, "N": 2,
                "hamiltonian": {"type": "scaled_bump", "inner_area": 0.35,
                                 "outer_area": 0.72, "amplitude": 0.5}}}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

from .errors import ScenarioError
from .flow import AutonomousHamiltonian, TimeDependentHamiltonian, TimeScaledHamiltonian
from .geometry import Disk, Rectangle, Region, RoundedRectangle, Strip
from .profiles import Polynomial2D, RadialFunction, SmoothProfile, make_bump

SCHEMA_VERSION = 1
KINDS = ("flow", "norm", "reparam", "nice-subsets", "disk-mover",
         "decompose", "spectrum", "concat-check")


@dataclass
class Scenario:
    kind: str
    seed: int
    params: dict
    tolerances: dict = field(default_factory=dict)
    name: str = "scenario"

    def tol(self, key: str, default: float, scale: float = 1.0) -> float:
        return float(self.tolerances.get(key, default)) * scale


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot parse scenario file: {exc}")
    return parse_scenario(raw)


def parse_scenario(raw: Any) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    if raw.get("version") != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema version {raw.get('version')!r}")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ScenarioError(f"unknown scenario kind {kind!r}")
    params = raw.get("params")
    if not isinstance(params, dict):
        raise ScenarioError("missing params object")
    return Scenario(kind=kind, seed=int(raw.get("seed", 0)), params=params,
                    tolerances=dict(raw.get("tolerances", {})),
                    name=str(raw.get("name", kind)))


# ---------------------------------------------------------------------------
# tagged-object builders
# ---------------------------------------------------------------------------

def build_region(obj: Any) -> Region:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ScenarioError(f"bad region object: {obj!r}")
    t = obj["type"]
    try:
        if t == "disk":
            return Disk(float(obj["area"]), tuple(obj.get("center", (0.0, 0.0))))
        if t == "rectangle":
            return Rectangle(float(obj["q0"]), float(obj["q1"]),
                             float(obj["p0"]), float(obj["p1"]))
        if t == "rounded_rectangle":
            if "area" in obj:
                return RoundedRectangle.with_area(
                    tuple(obj.get("center", (0.0, 0.0))), float(obj["height"]),
                    float(obj["area"]), float(obj.get("corner_radius", 0.05)))
            return RoundedRectangle(tuple(obj["center"]), float(obj["width"]),
                                    float(obj["height"]),
                                    float(obj.get("corner_radius", 0.05)))
        if t == "strip":
            return Strip(float(obj["p0"]), float(obj["p1"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad region parameters: {exc}")
    raise ScenarioError(f"unknown region type {t!r}")


def build_profile(obj: Any) -> SmoothProfile:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ScenarioError(f"bad profile object: {obj!r}")
    t = obj["type"]
    try:
        if t == "polynomial":
            coeffs = {}
            for key, c in obj["coeffs"].items():
                i, j = (int(s) for s in key.split(","))
                coeffs[(i, j)] = float(c)
            return Polynomial2D(coeffs)
        if t == "bump":
            return make_bump(build_region(obj["inner"]), build_region(obj["outer"]))
        if t == "harmonic":
            w = float(obj.get("rate", 1.0))
            return RadialFunction(lambda s: math.pi * w * s,
                                  lambda s: math.pi * w + 0 * s,
                                  tuple(obj.get("center", (0.0, 0.0))))
        if t == "product":
            factors = [build_profile(f) for f in obj["factors"]]
            out = factors[0]
            for f in factors[1:]:
                out = out * f
            return out
        if t == "sum":
            from .profiles import SumProfile
            return SumProfile([build_profile(f) for f in obj["terms"]])
        if t == "scaled":
            return float(obj["scale"]) * build_profile(obj["of"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad profile parameters: {exc}")
    raise ScenarioError(f"unknown profile type {t!r}")


def build_hamiltonian(obj: Any) -> TimeDependentHamiltonian:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ScenarioError(f"bad hamiltonian object: {obj!r}")
    t = obj["type"]
    try:
        if t == "scaled_bump":
            rho = make_bump(Disk(float(obj["inner_area"]),
                                 tuple(obj.get("center", (0.0, 0.0)))),
                            Disk(float(obj["outer_area"]),
                                 tuple(obj.get("center", (0.0, 0.0)))))
            return AutonomousHamiltonian(rho * Polynomial2D(
                {(0, 0): float(obj.get("amplitude", 1.0))}))
        if t == "autonomous":
            H = AutonomousHamiltonian(build_profile(obj["profile"]))
            if "support" in obj:
                H.support = build_region(obj["support"])
            return H
        if t == "time_scaled":
            base = build_hamiltonian(obj["of"])
            c0 = float(obj.get("constant", 0.0))
            c1 = float(obj.get("linear", 0.0))
            return TimeScaledHamiltonian(base, lambda t_: c0 + c1 * t_)
        if t == "bump_translation":
            # cutoff translation mover over a region
            from .transport import translation_generator
            K = build_region(obj["region"])
            H, _ = translation_generator(
                K, obj["vector"], pad_rel=float(obj.get("pad_rel", 0.25)),
                sign=obj.get("sign"))
            return H
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad hamiltonian parameters: {exc}")
    raise ScenarioError(f"unknown hamiltonian type {t!r}")


def build_profile1d(obj: Any):
    from .reparam import (CallableProfile, PiecewiseConstantProfile,
                          SampledProfile)
    import numpy as np
    if not isinstance(obj, dict) or "type" not in obj:
        raise ScenarioError(f"bad 1-D profile object: {obj!r}")
    t = obj["type"]
    try:
        if t == "piecewise_constant":
            return PiecewiseConstantProfile(np.asarray(obj["breaks"], float),
                                            np.asarray(obj["values"], float))
        if t == "samples":
            return SampledProfile(np.asarray(obj["ts"], float),
                                  np.asarray(obj["values"], float))
        if t == "constant":
            c = float(obj["value"])
            return CallableProfile(lambda s: np.full_like(s, c), name="constant")
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad 1-D profile parameters: {exc}")
    raise ScenarioError(f"unknown 1-D profile type {t!r}")
