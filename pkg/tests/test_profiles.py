import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hoferflow.errors import GeometryError
from hoferflow.geometry import Disk, Rectangle
from hoferflow.profiles import (Polynomial2D, RadialFunction, make_bump,
                                quintic_step, quintic_step_int, smoothstep,
                                smoothstep_d, window, window_vd)


def fd_gradient(profile, pts, eps=1e-6):
    pts = np.asarray(pts, dtype=float)
    eq = np.array([eps, 0.0])
    ep = np.array([0.0, eps])
    gq = (profile.value(pts + eq) - profile.value(pts - eq)) / (2 * eps)
    gp = (profile.value(pts + ep) - profile.value(pts - ep)) / (2 * eps)
    return np.stack([gq, gp], axis=-1)


def test_bump_is_one_on_inner_zero_outside():
    rho = make_bump(Disk(1.0), Disk(4.0))
    assert rho.value([0.0, 0.0]) == pytest.approx(1.0)
    assert rho.value([0.3, 0.2]) == pytest.approx(1.0)
    assert rho.value([2.0, 2.0]) == 0.0


def test_bump_transition_value_and_gradient():
    rho = make_bump(Disk(1.0), Disk(4.0))
    # midpoint of the transition annulus
    r_mid = 0.5 * (Disk(1.0).radius + rho.support.radius)
    x = np.array([r_mid, 0.0])
    v = float(rho.value(x))
    assert 0.0 < v < 1.0
    g = rho.grad(x)
    g_fd = fd_gradient(rho, x)
    assert np.max(np.abs(g - g_fd)) <= 1e-6 * max(1.0, np.max(np.abs(g_fd)))


def test_bump_requires_strict_containment():
    with pytest.raises(GeometryError):
        make_bump(Disk(4.0), Disk(1.0))
    with pytest.raises(GeometryError):
        make_bump(Disk(1.0), Disk(1.0))


def test_bump_range_is_unit_interval():
    rho = make_bump(Rectangle(-0.5, 0.5, -0.3, 0.3), Rectangle(-1, 1, -1, 1))
    rng = np.random.default_rng(0)
    pts = Rectangle(-1.2, 1.2, -1.2, 1.2).bbox.random_points(500, rng)
    vals = rho.value(pts)
    assert np.all(vals >= 0.0) and np.all(vals <= 1.0)


def test_gradients_match_finite_differences_at_random_points(rng):
    profiles = [
        make_bump(Disk(1.0), Disk(4.0)),
        make_bump(Rectangle(-0.5, 0.5, -0.3, 0.3), Rectangle(-1, 1, -1, 1)),
        make_bump(Disk(0.5), Rectangle(-1, 1, -1, 1)),
        Polynomial2D({(2, 0): 1.0, (0, 2): 1.0, (1, 1): 0.5}),
        RadialFunction(lambda s: np.exp(-s), lambda s: -np.exp(-s)),
        make_bump(Disk(1.0), Disk(4.0)) * Polynomial2D({(0, 1): 1.0}),
    ]
    for prof in profiles:
        box = prof.support.bbox if prof.support is not None \
            else Rectangle(-1, 1, -1, 1).bbox
        pts = box.pad(0.1).random_points(1000, rng)
        g = prof.grad(pts)
        g_fd = fd_gradient(prof, pts)
        scale = np.maximum(np.max(np.abs(g_fd)), 1.0)
        assert np.max(np.abs(g - g_fd)) / scale <= 1e-5


def test_difference_quotients_converge_second_order():
    # C1 verification of the bump: central quotients converge at order >= 2
    rho = make_bump(Disk(1.0), Disk(4.0))
    x = np.array([0.9, 0.35])
    exact = rho.grad(x)[0]
    errs = []
    for eps in (1e-3, 5e-4, 2.5e-4):
        fd = (rho.value(x + [eps, 0]) - rho.value(x - [eps, 0])) / (2 * eps)
        errs.append(abs(fd - exact))
    order = np.log2(errs[0] / errs[1])
    assert order >= 1.9


@given(st.floats(min_value=-0.5, max_value=1.5))
@settings(max_examples=200, deadline=None)
def test_smoothstep_bounds(u):
    v = float(smoothstep(u))
    assert 0.0 <= v <= 1.0
    if u <= 0:
        assert v == 0.0
    if u >= 1:
        assert v == 1.0


@given(st.floats(min_value=0.001, max_value=0.999),
       st.floats(min_value=0.001, max_value=0.999))
@settings(max_examples=100, deadline=None)
def test_smoothstep_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert smoothstep(hi) >= smoothstep(lo)


def test_smoothstep_symmetric():
    u = np.linspace(0, 1, 101)
    assert np.allclose(smoothstep(u) + smoothstep(1 - u), 1.0, atol=1e-12)


def test_quintic_antiderivative():
    u = np.linspace(0, 1, 1001)
    numeric = np.concatenate([[0], np.cumsum((quintic_step(u)[1:] + quintic_step(u)[:-1]) / 2 * np.diff(u))])
    assert np.max(np.abs(numeric - quintic_step_int(u))) <= 1e-6


def test_window_vd_consistency():
    x = np.linspace(-1, 3, 500)
    args = (0.0, 0.5, 1.5, 2.0)
    w, dw = window_vd(x, *args)
    assert np.allclose(w, window(x, *args), atol=1e-14)
    fd = np.gradient(window(x, *args), x)
    inner = slice(5, -5)
    assert np.max(np.abs(dw[inner] - fd[inner])) <= 2e-2
