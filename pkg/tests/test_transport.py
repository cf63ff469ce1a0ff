import math

import numpy as np
import pytest

from hoferflow.errors import GeometryError, MassError, UnsupportedRegionError
from hoferflow.flow import word_area_residual
from hoferflow.geometry import (Disk, ImageRegion, Rectangle,
                                hausdorff_distance, winding_number)
from hoferflow.transport import (Density1D, RadialDensity2D,
                                 SeparableDensity2D, ball_rearrange,
                                 compact_translation, mass_transport_1d,
                                 moser_separable_2d, point_transport,
                                 pullback_residual_1d, pullback_residual_2d,
                                 radial_normalize)


def test_mass_transport_identity():
    d = Density1D(lambda t: 1.0 + 0.3 * t, 0, 1)
    psi = mass_transport_1d(d, d)
    ts = np.linspace(0, 1, 21)
    assert np.max(np.abs(psi.value(ts) - ts)) <= 1e-10


def test_mass_transport_uniform_to_double():
    d0 = Density1D(lambda t: np.ones_like(t), 0, 1)
    d1 = Density1D(lambda t: 2 * np.ones_like(t), 0, 0.5)
    psi = mass_transport_1d(d0, d1)
    ts = np.linspace(0, 1, 21)
    assert np.max(np.abs(psi.value(ts) - ts / 2)) <= 1e-10
    assert pullback_residual_1d(psi, d0, d1) <= 1e-7


def test_mass_transport_polynomial_densities():
    d0 = Density1D(lambda t: 1 + 0.5 * t + 0.25 * t ** 2, 0, 1)
    m = d0.mass
    d1 = Density1D(lambda t: (1 + t) * (m / 1.5), 0, 1)
    psi = mass_transport_1d(d0, d1)
    assert pullback_residual_1d(psi, d0, d1) <= 1e-7
    # monotone: positive derivative on a grid
    ts = np.linspace(0.01, 0.99, 101)
    assert float(np.min(psi.deriv(ts))) > 0


def test_mass_transport_mass_mismatch():
    d0 = Density1D(lambda t: np.ones_like(t), 0, 1)
    d1 = Density1D(lambda t: np.ones_like(t), 0, 0.9)
    with pytest.raises(MassError):
        mass_transport_1d(d0, d1)


def test_separable_2d_identity():
    u = Density1D(lambda t: np.ones_like(t), 0, 1)
    w = SeparableDensity2D(u, u)
    psi = moser_separable_2d(w, w)
    pts = Rectangle(0, 1, 0, 1).bbox.grid(9, 9)
    assert np.max(np.abs(psi.forward(pts) - pts)) <= 1e-10


def test_separable_2d_pullback():
    u0 = Density1D(lambda t: np.ones_like(t), 0, 1)
    w0 = SeparableDensity2D(u0, u0)
    u1 = Density1D(lambda t: 1 + t, 0, 1)
    v1 = Density1D(lambda t: np.full_like(t, 1 / 1.5), 0, 1)
    w1 = SeparableDensity2D(u1, v1)
    psi = moser_separable_2d(w0, w1)
    assert pullback_residual_2d(psi, w0, w1, Rectangle(0, 1, 0, 1)) <= 1e-6


def test_separable_2d_component_preserved():
    # equal factor masses on each side of q = 1/2 keep the cut line fixed,
    # so a sample cloud in the left component stays in it
    u0 = Density1D(lambda t: np.ones_like(t), 0, 1)
    w0 = SeparableDensity2D(u0, u0)
    u1 = Density1D(lambda t: 1.0 + 0.8 * (t - 0.5) * np.sign(t - 0.5) ** 2
                   * 0 + 0.8 * (4 * (t - 0.5) ** 2 - 1 / 3 + 1 / 3), 0, 1)
    # symmetric density about t = 1/2 with mass 1 per half after scaling
    u1 = Density1D(lambda t: (1.0 + 0.6 * np.cos(2 * math.pi * t))
                   / 1.0, 0, 1)
    w1 = SeparableDensity2D(u1, Density1D(lambda t: np.ones_like(t) *
                                          (w0.mass / u1.mass), 0, 1))
    psi = moser_separable_2d(w0, w1)
    cut = psi.forward(np.stack([np.full(9, 0.5), np.linspace(0.1, 0.9, 9)], -1))
    assert np.max(np.abs(cut[:, 0] - 0.5)) <= 1e-9
    rng = np.random.default_rng(0)
    cloud = Rectangle(0.0, 0.5, 0.0, 1.0).sample_interior(60, rng)
    assert bool(np.all(psi.forward(cloud)[:, 0] <= 0.5 + 1e-9))


def test_radial_2d_pullback():
    g0 = RadialDensity2D(lambda s: np.ones_like(s), 1.0)
    g1 = RadialDensity2D(lambda s: (2 - s) * (g0.mass / (math.pi * 1.5)), 1.0)
    psi = moser_separable_2d(g0, g1)
    res = pullback_residual_2d(psi, g0, g1, Disk(math.pi * 0.9 ** 2), n=96)
    assert res <= 1e-6


def test_point_transport_segment():
    path = lambda t: np.array([t, 0.0])
    vel = lambda t: np.array([1.0, 0.0])
    psi = point_transport(path, vel, 0.5)
    assert np.max(np.abs(psi.forward([0.0, 0.0]) - [1.0, 0.0])) <= 1e-6
    # outside the tube nothing moves
    assert np.max(np.abs(psi.forward([0.5, 5.0]) - [0.5, 5.0])) <= 1e-9


def test_point_transport_constant_path():
    path = lambda t: np.array([0.3, 0.3])
    vel = lambda t: np.array([0.0, 0.0])
    psi = point_transport(path, vel, 0.4)
    pts = Rectangle(-1, 1, -1, 1).bbox.grid(7, 7)
    assert np.max(np.abs(psi.forward(pts) - pts)) <= 1e-12


def test_compact_translation_exact_on_square():
    K = Rectangle(0, 1, 0, 1)
    tr = compact_translation(K, [2.0, 0.0])
    corners = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)
    assert np.max(np.abs(tr.forward(corners) - (corners + [2, 0]))) <= 1e-9
    far = np.array([[30.0, -10.0]])
    assert np.max(np.abs(tr.forward(far) - far)) == 0.0


def test_compact_translation_zero_vector():
    assert compact_translation(Disk(1.0), [0.0, 0.0]).is_identity_word


def test_radial_normalize_identity_profile():
    psi = radial_normalize(lambda th: np.ones_like(th))
    pts = Disk(math.pi * 0.8 ** 2).bbox.grid(9, 9)
    assert np.max(np.abs(psi.forward(pts) - pts)) <= 1e-12


def test_radial_normalize_scaling_and_star():
    th = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    circle = np.stack([np.cos(th), np.sin(th)], axis=-1)
    psi2 = radial_normalize(lambda t: 2.0 + 0 * t)
    assert np.max(np.abs(psi2.forward(circle) - 2 * circle)) <= 1e-6
    f = lambda t: 1 + 0.3 * np.cos(t)
    psi = radial_normalize(f)
    target = circle * f(th)[:, None]
    assert np.max(np.abs(psi.forward(circle) - target)) <= 1e-5
    assert np.max(np.abs(psi.inverse(psi.forward(circle)) - circle)) <= 1e-9


def test_radial_normalize_rejects_nonpositive():
    with pytest.raises(GeometryError):
        radial_normalize(lambda th: np.cos(th))


def test_ball_rearrange_identity_case():
    A = Disk(0.4, (1.0, 1.0))
    arena = Rectangle(0, 3, 0, 3)
    word = ball_rearrange([A], [A], arena)
    assert word.is_identity_word


def test_ball_rearrange_single_translate():
    A = Disk(1.0, (1.0, 2.0))
    B = Disk(1.0, (2.0, 2.0))
    arena = Rectangle(0, 4, 0, 4)
    word = ball_rearrange([A], [B], arena)
    assert hausdorff_distance(ImageRegion(A, word), B) <= 1e-4


def test_ball_rearrange_swap_with_winding_and_area():
    A = Disk(0.3, (1.0, 1.0))
    B = Disk(0.3, (3.0, 1.0))
    arena = Rectangle(0, 4, 0, 4)
    word = ball_rearrange([A, B], [B, A], arena)
    assert hausdorff_distance(ImageRegion(A, word), B) <= 1e-4
    assert hausdorff_distance(ImageRegion(B, word), A) <= 1e-4
    bd = word.forward(A.boundary_points(256))
    assert winding_number(bd, B.bbox.center) == 1
    assert word_area_residual(word, arena.bbox.grid(6, 6)) <= 1e-5


def test_ball_rearrange_area_mismatch():
    with pytest.raises(MassError):
        ball_rearrange([Disk(0.3, (1, 1))], [Disk(0.4, (2, 1))],
                       Rectangle(0, 4, 0, 4))


def test_ball_rearrange_density_unsupported():
    with pytest.raises(UnsupportedRegionError):
        ball_rearrange([Disk(0.3, (1, 1))], [Disk(0.3, (2, 1))],
                       Rectangle(0, 4, 0, 4), density="nonuniform")
