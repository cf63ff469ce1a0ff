import math

import numpy as np
import pytest

from hoferflow.errors import GeometryError, UnsupportedRegionError
from hoferflow.geometry import (BBox, Disk, EmptyRegion, Rectangle,
                                RotatedRect, RoundedRectangle, Strip,
                                UnionRegion, hausdorff_distance,
                                min_cloud_distance, shoelace_area,
                                winding_number)
from hoferflow.quadrature import CumulativeIntegral, TimeGrid, integrate_time


def test_disk_is_parameterized_by_area():
    d = Disk(2.0)
    assert d.area() == 2.0
    assert d.radius == pytest.approx(math.sqrt(2.0 / math.pi))


def test_rectangle_area():
    assert Rectangle(0, 1.5, 0, 2.0).area() == pytest.approx(3.0)


def test_union_area_matches_lemma_constant():
    # block (0,b)x(0,N) plus tail (-d,0]x(0,1) has area Nb + d = c
    b, N, d = 1.5, 2, 0.8
    U0 = UnionRegion([Rectangle(0, b, 0, N), Rectangle(-d, 0, 0, 1)])
    assert U0.area() == pytest.approx(N * b + d)


def test_area_additive_over_rectangle_dissection():
    parts = [Rectangle(0, 0.5, 0, 1), Rectangle(0.5, 2, 0, 0.25),
             Rectangle(0.5, 2, 0.25, 1)]
    assert sum(p.area() for p in parts) == pytest.approx(Rectangle(0, 2, 0, 1).area())


def test_rounded_rectangle_exact_area():
    r = RoundedRectangle.with_area((0, 0), 0.5, 1.0, 0.05)
    assert r.area() == pytest.approx(1.0, abs=1e-12)
    bd = r.boundary_points(512)
    assert abs(shoelace_area(bd)) == pytest.approx(1.0, abs=1e-4)


def test_rounded_rectangle_membership():
    r = RoundedRectangle((0, 0), 1.0, 0.5, 0.1)
    assert r.contains([0.0, 0.0])
    assert not r.contains([0.49, 0.24])  # corner notch
    assert r.contains([0.0, 0.24])


def test_strip_unbounded():
    s = Strip(0.0, 0.75)
    assert s.contains([100.0, 0.5])
    with pytest.raises(UnsupportedRegionError):
        s.area()


def test_rotated_rect_contains_and_boundary():
    r = RotatedRect((0, 0), (1, 1), 1.0, 0.2)
    u = np.array([1, 1]) / math.sqrt(2)
    assert r.contains(0.9 * u)
    assert not r.contains(1.2 * u)
    bd = r.boundary_points(128)
    assert abs(shoelace_area(bd)) == pytest.approx(r.area(), rel=1e-3)


def test_empty_region():
    e = EmptyRegion()
    assert e.area() == 0.0
    assert not e.contains([0.0, 0.0])


def test_translate_region():
    d = Disk(1.0).translate([2.0, 0.0])
    assert d.contains([2.0, 0.0])
    assert d.area() == pytest.approx(1.0)


def test_winding_number():
    th = np.linspace(0, 2 * math.pi, 100, endpoint=False)
    circle = np.stack([np.cos(th), np.sin(th)], axis=-1)
    assert winding_number(circle, (0, 0)) == 1
    assert winding_number(circle[::-1], (0, 0)) == -1
    assert winding_number(circle, (5, 0)) == 0


def test_hausdorff_of_translates():
    a = Disk(1.0)
    b = Disk(1.0, (0.5, 0.0))
    d = hausdorff_distance(a, b)
    assert d == pytest.approx(0.5, abs=1e-3)


def test_min_cloud_distance():
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    b = np.array([[3.0, 4.0]])
    assert min_cloud_distance(a, b) == pytest.approx(math.hypot(2, 4))


def test_degenerate_bbox_rejected():
    with pytest.raises(GeometryError):
        BBox(1.0, 0.0, 0.0, 1.0)


# quadrature -----------------------------------------------------------------

def test_integrate_time_constant():
    assert integrate_time(lambda t: 1.0) == pytest.approx(1.0, abs=1e-12)


def test_integrate_time_linear():
    assert integrate_time(lambda t: t) == pytest.approx(0.5, abs=1e-12)


def test_integrate_time_matches_fine_riemann_sum():
    # oscillation-style sampled integrand vs a 10x resolution Riemann oracle
    def f(t):
        return 1.0 + 0.5 * math.sin(7 * t) ** 2

    grid = np.linspace(0, 1, 200001)
    riemann = float(np.trapezoid([f(t) for t in grid], grid))
    assert integrate_time(f) == pytest.approx(riemann, abs=1e-8)


def test_time_grid_validation():
    TimeGrid.uniform(11)
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.0, 0.5, 0.4, 1.0]))


def test_cumulative_integral_inversion():
    cum = CumulativeIntegral(lambda t: 1.0 + t, 0.0, 1.0)
    assert cum.total == pytest.approx(1.5, abs=1e-12)
    t_half = cum.invert(0.75)
    assert t_half == pytest.approx(math.sqrt(2.5) - 1, abs=1e-10)
