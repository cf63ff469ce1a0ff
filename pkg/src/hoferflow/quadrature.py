"""Time quadrature and monotone-inversion utilities."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import ToleranceError


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times spanning [0, 1]."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) < 2 or t[0] != 0.0 or t[-1] != 1.0:
            raise ValueError("time grid must run from 0.0 to 1.0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        object.__setattr__(self, "times", t)

    @classmethod
    def uniform(cls, n: int) -> "TimeGrid":
        return cls(np.linspace(0.0, 1.0, n))


def integrate_time(f, a: float = 0.0, b: float = 1.0, tol: float = 1e-9) -> float:
    """Adaptive quadrature of a scalar function with an error-estimate gate."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=tol, limit=400)
    if not np.isfinite(val):
        raise ToleranceError("quadrature returned a non-finite value")
    if err > max(1e3 * tol, 1e-7 * max(1.0, abs(val))):
        raise ToleranceError(f"quadrature error estimate {err:g} above tolerance")
    return float(val)


class CumulativeIntegral:
    """High-order cumulative integral of a smooth density on [a, b].

    Composite Gauss-Legendre per cell; partial cells evaluated on demand, so
    F is smooth, strictly increasing for positive densities, and cheap to
    invert with bracketed root finding.
    """

    def __init__(self, fn, a: float, b: float, cells: int = 512, order: int = 12,
                 edges=None):
        self.fn = fn
        self.a = float(a)
        self.b = float(b)
        if edges is not None:
            e = np.unique(np.clip(np.asarray(edges, dtype=float), a, b))
            if e[0] != a:
                e = np.concatenate([[a], e])
            if e[-1] != b:
                e = np.concatenate([e, [b]])
            self.edges = e
        else:
            self.edges = np.linspace(a, b, cells + 1)
        nodes, weights = np.polynomial.legendre.leggauss(order)
        self._nodes = nodes
        self._weights = weights
        mids = (self.edges[:-1] + self.edges[1:]) / 2
        half = np.diff(self.edges) / 2
        samples = mids[:, None] + half[:, None] * nodes[None, :]
        vals = np.asarray(fn(samples.ravel())).reshape(samples.shape)
        cellints = half * (vals @ weights)
        self._cum = np.concatenate([[0.0], np.cumsum(cellints)])

    @property
    def total(self) -> float:
        return float(self._cum[-1])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(np.clip(t, self.a, self.b))
        idx = np.clip(np.searchsorted(self.edges, t, side="right") - 1,
                      0, len(self.edges) - 2)
        lo = self.edges[idx]
        half = (t - lo) / 2
        mid = lo + half
        samples = mid[:, None] + half[:, None] * self._nodes[None, :]
        vals = np.asarray(self.fn(samples.ravel())).reshape(samples.shape)
        part = half * (vals @ self._weights)
        out = self._cum[idx] + part
        return float(out[0]) if scalar else out

    def invert(self, target: float, tol: float = 1e-13) -> float:
        """Solve F(t) = target on [a, b] (F must be nondecreasing)."""
        target = float(target)
        if target <= 0:
            return self.a
        if target >= self.total:
            return self.b
        return float(optimize.brentq(lambda t: self(t) - target,
                                     self.a, self.b, xtol=tol, rtol=8.9e-16))


def invert_monotone(fn, target: float, lo: float, hi: float,
                    tol: float = 1e-13) -> float:
    """Bracketed inversion of a continuous nondecreasing function."""
    flo, fhi = fn(lo) - target, fn(hi) - target
    if flo >= 0:
        return lo
    if fhi <= 0:
        return hi
    return float(optimize.brentq(lambda t: fn(t) - target, lo, hi,
                                 xtol=tol, rtol=8.9e-16))
