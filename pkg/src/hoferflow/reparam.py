"""Time-reparametrization machinery for equalizing Hofer-mass profiles.

Given nonnegative integrable speed profiles f_i on [0, 1], builds orientation
preserving diffeomorphisms phi_i of [0, 1] such that

    int_0^1 max_i (f_i o phi_i)(t) phi_i'(t) dt  <=  max_i int_0^1 f_i + eps.

Each phi_i is the inverse of the normalized epsilon-floored cumulative of a
smoothing g of f_i,

    psi(t) = int_0^t (g + eps') / (int_0^1 g + eps'),

so the pushed profile (f o phi) phi' is nearly flat at height int f except on
a set whose contribution is controlled by the floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ToleranceError
from .profiles import quintic_step, quintic_step_d, quintic_step_int
from .quadrature import CumulativeIntegral


# ---------------------------------------------------------------------------
# 1-D profiles
# ---------------------------------------------------------------------------

class Profile1D:
    """Nonnegative integrable function on [0, 1]."""

    #: discontinuity / kink locations, used to align quadrature cells
    knots: tuple[float, ...] = ()
    #: True when the profile is continuous on [0, 1]
    continuous: bool = True

    def __call__(self, t) -> np.ndarray:
        raise NotImplementedError

    def integral(self) -> float:
        raise NotImplementedError

    def max_value(self) -> float:
        t = _refined_grid(self.knots, 4096)
        return float(np.max(self(t)))


@dataclass
class PiecewiseConstantProfile(Profile1D):
    """Right-continuous step function on a partition of [0, 1]."""

    breaks: np.ndarray  # length n+1, 0 = b0 < ... < bn = 1
    values: np.ndarray  # length n, >= 0

    continuous = False

    def __post_init__(self):
        b = np.asarray(self.breaks, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise ValueError("breaks must partition [0, 1]")
        if np.any(v < 0):
            raise ValueError("profile values must be nonnegative")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "knots", tuple(b[1:-1]))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.breaks, t, side="right") - 1,
                      0, len(self.values) - 1)
        return self.values[idx]

    def integral(self) -> float:
        return float(np.sum(self.values * np.diff(self.breaks)))

    def max_value(self) -> float:
        return float(np.max(self.values)) if len(self.values) else 0.0


@dataclass
class SampledProfile(Profile1D):
    """Linear interpolation through nonnegative samples on [0, 1]."""

    ts: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.ts, dtype=float)
        v = np.maximum(np.asarray(self.vals, dtype=float), 0.0)
        if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
            raise ValueError("sample times must increase from 0 to 1")
        object.__setattr__(self, "ts", t)
        object.__setattr__(self, "vals", v)
        object.__setattr__(self, "knots", tuple(t[1:-1]) if len(t) <= 600 else ())

    def __call__(self, t) -> np.ndarray:
        return np.interp(np.asarray(t, dtype=float), self.ts, self.vals)

    def integral(self) -> float:
        return float(np.trapezoid(self.vals, self.ts))


@dataclass
class CallableProfile(Profile1D):
    """Closed-form nonnegative profile."""

    fn: Callable[[np.ndarray], np.ndarray]
    name: str = "profile"

    def __call__(self, t) -> np.ndarray:
        return np.maximum(np.asarray(self.fn(np.asarray(t, dtype=float)),
                                     dtype=float), 0.0)

    def integral(self) -> float:
        grid = _refined_grid(self.knots, 1 << 15)
        return float(np.trapezoid(self(grid), grid))


def _refined_grid(knots: Sequence[float], n: int) -> np.ndarray:
    """Uniform grid refined geometrically around each knot."""
    base = np.linspace(0.0, 1.0, n)
    if not knots:
        return base
    offs = np.array([0.0] + [10.0 ** -k for k in range(3, 13)])
    offs = np.concatenate([offs, -offs])
    extra = np.clip(np.add.outer(np.asarray(knots, dtype=float), offs).ravel(), 0.0, 1.0)
    return np.unique(np.concatenate([base, extra]))


# ---------------------------------------------------------------------------
# diffeomorphisms of [0, 1]
# ---------------------------------------------------------------------------

class Diffeo01:
    """Strictly increasing smooth map of [0, 1] onto itself.

    `value`/`deriv` evaluate the map phi used in pushforwards
    (f o phi) phi'; `inverse_value` evaluates psi = phi^{-1}.
    """

    def __init__(self, psi: Callable, psi_d: Callable,
                 knots: Sequence[float] = (), label: str = "diffeo01"):
        self._psi = psi
        self._psi_d = psi_d
        self.knots = tuple(knots)
        self.label = label

    @classmethod
    def identity(cls) -> "Diffeo01":
        return _IdentityDiffeo01()

    def inverse_value(self, t) -> np.ndarray:
        return np.asarray(self._psi(np.asarray(t, dtype=float)), dtype=float)

    def inverse_deriv(self, t) -> np.ndarray:
        return np.asarray(self._psi_d(np.asarray(t, dtype=float)), dtype=float)

    def value(self, s) -> np.ndarray:
        """phi(s) = psi^{-1}(s), by safeguarded vectorized Newton."""
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        y = np.atleast_1d(np.clip(s, 0.0, 1.0)).astype(float)
        lo = np.zeros_like(y)
        hi = np.ones_like(y)
        t = y.copy()  # identity initial guess
        for _ in range(200):
            r = self.inverse_value(t) - y
            lo = np.where(r < 0, t, lo)
            hi = np.where(r > 0, t, hi)
            d = self.inverse_deriv(t)
            step = np.where(d > 0, r / np.where(d > 0, d, 1.0), 0.0)
            t_new = t - step
            bad = (t_new <= lo) | (t_new >= hi) | ~np.isfinite(t_new)
            t_new = np.where(bad, 0.5 * (lo + hi), t_new)
            if float(np.max(np.abs(t_new - t))) < 1e-14:
                t = t_new
                break
            t = t_new
        t = np.where(y <= 0.0, 0.0, np.where(y >= 1.0, 1.0, t))
        return float(t[0]) if scalar else t

    def deriv(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        t = self.value(s)
        d = self.inverse_deriv(t)
        return 1.0 / d

    def min_deriv(self, n: int = 10000) -> float:
        grid = np.linspace(0.0, 1.0, n)
        return float(np.min(self.deriv(grid)))


class _IdentityDiffeo01(Diffeo01):
    def __init__(self):
        super().__init__(lambda t: t, lambda t: np.ones_like(np.asarray(t, float)),
                         label="identity")

    def value(self, s):
        return np.asarray(s, dtype=float)

    def deriv(self, s):
        return np.ones_like(np.asarray(s, dtype=float))


# ---------------------------------------------------------------------------
# smoothing
# ---------------------------------------------------------------------------

class _RampSmoothed:
    """Piecewise-constant profile with each jump replaced by a quintic ramp
    of half-width w; exact cumulative in closed form."""

    def __init__(self, pwc: PiecewiseConstantProfile, w: float):
        self.base = pwc
        self.w = float(w)
        inner = pwc.breaks[1:-1]
        self.jumps = np.diff(pwc.values)
        self.locs = inner
        self.v0 = float(pwc.values[0])
        self.knots = tuple(np.concatenate([inner - w, inner + w]))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.v0)
        for loc, jump in zip(self.locs, self.jumps):
            out = out + jump * quintic_step((t - loc + self.w) / (2 * self.w))
        return out

    def integral_to(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = self.v0 * t
        for loc, jump in zip(self.locs, self.jumps):
            u = (t - loc + self.w) / (2 * self.w)
            out = out + jump * 2 * self.w * quintic_step_int(u)
        return out

    def l1_distance_to_base(self) -> float:
        # each ramp contributes |jump| * 2w * int_0^1 |S(u) - [u > 1/2]| du
        c = _QUINTIC_ABS_DEFECT
        return float(np.sum(np.abs(self.jumps)) * 2 * self.w * c)


def _quintic_abs_defect() -> float:
    u = np.linspace(0.0, 1.0, 200001)
    s = quintic_step(u)
    step = (u > 0.5).astype(float)
    return float(np.trapezoid(np.abs(s - step), u))


_QUINTIC_ABS_DEFECT = _quintic_abs_defect()


# ---------------------------------------------------------------------------
# the three lemma operations
# ---------------------------------------------------------------------------

def tail_threshold(f: Profile1D, eps: float) -> float:
    """A delta > 0 such that |X| <= delta implies int_X f < eps.

    Bisects the smallest level C with int_{f > C} f < eps/2 and returns
    eps / (2 C), capped at 1.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    total = f.integral()
    if total <= 1e-15 and f.max_value() <= 1e-12:
        return 1.0
    grid = _refined_grid(f.knots, 1 << 15)
    vals = f(grid)

    def tail(level: float) -> float:
        keep = np.where(vals > level, vals, 0.0)
        return float(np.trapezoid(keep, grid))

    hi = float(np.max(vals))
    if tail(hi) >= eps / 2:
        raise ToleranceError("profile tail cannot be controlled at this eps")
    lo = 0.0
    if tail(lo) < eps / 2:
        hi = max(eps / 2, 1e-12)
    else:
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if tail(mid) < eps / 2:
                hi = mid
            else:
                lo = mid
    level = hi
    return min(1.0, eps / (2 * level))


def tame(f: Profile1D, eps: float) -> Diffeo01:
    """Reparametrize so the pushed profile has an eps-small heavy tail.

    Returns phi with (f o phi) phi' exceeding int f + 2 eps only on a set
    whose f-mass is at most eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    total = f.integral()
    if total <= 1e-15 and f.max_value() <= 1e-12:
        return Diffeo01.identity()

    delta = min(tail_threshold(f, eps), 1.0, eps)

    # smoothing g with ||f - g||_1 < delta * eps
    target = delta * eps
    if isinstance(f, PiecewiseConstantProfile) and len(f.values) > 1:
        jumps = float(np.sum(np.abs(np.diff(f.values))))
        gaps = np.diff(f.breaks)
        w_max = 0.45 * float(np.min(gaps))
        w = min(w_max, 0.9 * target / max(jumps * 2 * _QUINTIC_ABS_DEFECT, 1e-300))
        if w <= 0:
            raise ToleranceError("cannot smooth profile to the required L1 distance")
        g = _RampSmoothed(f, w)
        g_knots = g.knots
        g_cum = g.integral_to
        g_total = float(g.integral_to(1.0))
    else:
        # continuous profiles are already admissible smoothings of themselves
        g = f
        g_knots = f.knots
        cum = CumulativeIntegral(lambda t: np.asarray(f(t), dtype=float),
                                 0.0, 1.0, cells=_cells_for(f.knots))
        g_cum = cum
        g_total = cum.total

    denom = g_total + eps

    def psi(t):
        t = np.asarray(t, dtype=float)
        return (np.asarray(g_cum(t), dtype=float) + eps * t) / denom

    def psi_d(t):
        t = np.asarray(t, dtype=float)
        return (np.asarray(g(t), dtype=float) + eps) / denom

    return Diffeo01(psi, psi_d, knots=g_knots, label=f"tame(eps={eps:g})")


def _cells_for(knots: Sequence[float]) -> int:
    return 1024 if len(knots) <= 64 else 4096


def pushforward_values(f: Profile1D, phi: Diffeo01, t: np.ndarray) -> np.ndarray:
    """(f o phi)(t) * phi'(t) on the given grid."""
    x = phi.value(t)
    return np.asarray(f(x), dtype=float) * phi.deriv(t)


def _mapped_knots(f: Profile1D, phi: Diffeo01) -> list[float]:
    """t-locations where (f o phi) phi' can kink: psi-images of x-space knots."""
    ks = sorted(set(f.knots) | set(phi.knots))
    if not ks:
        return []
    mapped = np.atleast_1d(phi.inverse_value(np.asarray(ks, dtype=float)))
    return [float(v) for v in mapped]


def pushforward_grid(fs: Sequence[Profile1D], phis: Sequence[Diffeo01],
                     n: int = 1 << 14) -> tuple[np.ndarray, np.ndarray]:
    """Shared evaluation grid (refined at mapped knots) and stacked pushforwards."""
    knots: list[float] = []
    for f, phi in zip(fs, phis):
        knots.extend(_mapped_knots(f, phi))
    grid = _refined_grid(sorted(set(np.round(knots, 15))), n)
    rows = np.stack([pushforward_values(f, phi, grid) for f, phi in zip(fs, phis)])
    return grid, rows


def pushforward_integral(f: Profile1D, phi: Diffeo01) -> float:
    """High-order quadrature of (f o phi) phi' with knot-aligned cells.

    The change of variables makes this equal int f for any diffeomorphism;
    the aligned cells keep the numerical defect near machine precision.
    """
    knots = _mapped_knots(f, phi)
    base = np.linspace(0.0, 1.0, 257)
    edges = np.unique(np.concatenate([base, np.asarray(knots, dtype=float)])) \
        if knots else base
    cum = CumulativeIntegral(lambda t: pushforward_values(f, phi, t),
                             0.0, 1.0, edges=edges, order=16)
    return cum.total


def tame_report(f: Profile1D, phi: Diffeo01, eps: float) -> dict:
    """Quadrature check of the taming contract for diagnostics and tests."""
    grid, rows = pushforward_grid([f], [phi])
    ft = rows[0]
    total = f.integral()
    heavy = ft > total + 2 * eps
    mass = float(np.trapezoid(np.where(heavy, ft, 0.0), grid))
    pushed_total = float(np.trapezoid(ft, grid))
    return {"integral": total, "pushed_integral": pushed_total,
            "tail_mass": mass, "eps": eps}


def equalize(profiles: Sequence[Profile1D], eps: float) -> list[Diffeo01]:
    """Reparametrizations making max_i of the pushed profiles integrate to at
    most max_i int f_i + eps.

    Zero-integral profiles get the identity and are excluded from the
    bookkeeping. The internal floor eps' is shrunk geometrically until
    2 eps' + C_{eps'} <= eps, with
    C_e = e (N + (max_i c_i + 2e) sum_i 1/c_i).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    cs = [p.integral() for p in profiles]
    active = [i for i, c in enumerate(cs) if c > 1e-13]
    if not active:
        return [Diffeo01.identity() for _ in profiles]
    c_act = [cs[i] for i in active]
    n_act = len(active)
    cmax = max(c_act)
    inv_sum = sum(1.0 / c for c in c_act)

    eps_inner = eps / 4
    for _ in range(60):
        overhead = eps_inner * (n_act + (cmax + 2 * eps_inner) * inv_sum)
        if 2 * eps_inner + overhead <= eps:
            break
        eps_inner /= 2
    else:
        raise ToleranceError("could not split eps between floor and overhead")

    out: list[Diffeo01] = []
    for i, p in enumerate(profiles):
        out.append(tame(p, eps_inner) if i in set(active) else Diffeo01.identity())
    return out


def equalize_report(profiles: Sequence[Profile1D], phis: Sequence[Diffeo01],
                    eps: float) -> dict:
    """Verify the equalized-max bound by quadrature."""
    grid, rows = pushforward_grid(list(profiles), list(phis))
    env = np.max(rows, axis=0) if len(rows) else np.zeros_like(grid)
    achieved = float(np.trapezoid(env, grid))
    cs = [p.integral() for p in profiles]
    bound = (max(cs) if cs else 0.0) + eps
    naive = float(sum(cs)) + eps
    return {"achieved": achieved, "bound": bound, "naive_bound": naive,
            "integrals": cs, "ok": achieved <= bound + 1e-6}
