import os

import numpy as np
import pytest

from hoferflow.errors import (DisjointnessError, EnergyBudgetError,
                              FeasibilityError, GeometryError, MassError)
from hoferflow.flow import FlowConfig, flow_points, map_sup_distance
from hoferflow.geometry import Disk, ImageRegion, Rectangle, RoundedRectangle
from hoferflow.hofer import MINUS, PLUS, check_sign
from hoferflow.constructions import (disk_mover, nice_subsets, render_system,
                                     shear_profile)


# disk mover -----------------------------------------------------------------

def _strip_scenario():
    U = Rectangle(-1.05, 1.05, 0.0, 0.75)
    X0 = RoundedRectangle.with_area((-0.5, 0.36), 0.62, 0.5, 0.06)
    X1 = RoundedRectangle((0.5, 0.36), X0.width, X0.height, X0.corner_radius)
    return U, X0, X1


def test_disk_mover_budget_example():
    # area 0.5 disk in a height-0.75 strip, budget 1.0
    U, X0, X1 = _strip_scenario()
    res = disk_mover(U, X0, X1, 1.0, PLUS)
    assert res.certificate.value < 1.0
    assert res.certificate.value == pytest.approx(0.75, abs=0.1)
    assert res.hausdorff <= 1e-4


def test_disk_mover_negative_sign():
    U, X0, X1 = _strip_scenario()
    res = disk_mover(U, X0, X1, 1.0, MINUS)
    check_sign(res.hamiltonian, MINUS)
    assert res.hausdorff <= 1e-4


def test_disk_mover_rejects_equal_sets():
    U, X0, _ = _strip_scenario()
    with pytest.raises(DisjointnessError):
        disk_mover(U, X0, X0, 1.0, PLUS)


def test_disk_mover_rejects_area_mismatch():
    U, X0, _ = _strip_scenario()
    other = RoundedRectangle.with_area((0.5, 0.36), 0.6, 0.4, 0.05)
    with pytest.raises(MassError):
        disk_mover(U, X0, other, 1.0, PLUS)


def test_disk_mover_budget_error():
    U, X0, X1 = _strip_scenario()
    with pytest.raises(EnergyBudgetError):
        disk_mover(U, X0, X1, 0.5, PLUS)  # area 0.5 needs budget above 0.5


def test_disk_mover_non_translate_rejected():
    U = Rectangle(-2, 2, -2, 2)
    X0 = Disk(0.3, (-1, 0))
    X1 = RoundedRectangle.with_area((1, 0), 0.5, 0.3, 0.05)
    with pytest.raises(GeometryError):
        disk_mover(U, X0, X1, 2.0, PLUS)


# shear profile ---------------------------------------------------------------

def test_shear_profile_pieces():
    eps = 0.1
    f, f_d = shear_profile(eps)
    assert f(-0.5) == pytest.approx(eps / 2)
    assert f(0.3) == pytest.approx(-0.3)
    assert f(0.0) == pytest.approx(0.0, abs=1e-14)
    xs = np.linspace(-eps, 0, 101)
    d = f_d(xs)
    assert np.all(d <= 0.0) and np.all(d >= -1.0)
    # derivative matches finite differences on the transition
    fd = np.gradient(f(xs), xs)
    assert np.max(np.abs(fd[2:-2] - f_d(xs)[2:-2])) <= 2e-3


# nice subsets ----------------------------------------------------------------

def test_nice_subsets_reference_instance():
    sys2 = nice_subsets(7.0, 1.0, 2)
    assert sys2.c == pytest.approx(6.5)
    assert 1.0 < sys2.b < 1.25
    rep = sys2.verify()
    assert rep["ok"]
    assert rep["area_error"] <= 1e-6
    assert rep["flow_vs_closed_form"] <= 1e-5


def test_nice_subsets_chi1_is_identity():
    sys1 = nice_subsets(7.0, 1.0, 1)
    assert sys1.chi[0].is_identity_word
    pts = sys1.U[0].grid_inside(10, 10, margin=sys1.delta)
    img = sys1.shear_closed_form(1).forward(pts)
    assert np.max(np.abs(img - pts)) == 0.0


def test_nice_subsets_invariants_all_N():
    for N, total in ((1, 7.0), (3, 14.0)):
        s = nice_subsets(total, 1.0, N)
        rep = s.verify()
        assert rep["ok"], (N, rep)


def test_nice_subsets_feasibility():
    with pytest.raises(FeasibilityError):
        nice_subsets(5.9, 1.0, 2)  # needs > 3Na = 6


def test_shear_band_clear_of_disks():
    s = nice_subsets(7.0, 1.0, 2)
    assert s.eps <= s.d / 4
    for i in range(1, 2 * s.N + 1):
        assert s.X[i].bbox.q1 <= -1.1 * s.eps + 1e-12


def test_sheared_comb_parallelogram_band():
    # chi_2 distorts only the band q in [-eps, 0]; left of it nothing moves
    s = nice_subsets(7.0, 1.0, 2)
    chi2 = s.shear_closed_form(2)
    left = np.array([[-s.eps - 0.05, 0.3], [-s.d / 2, 0.6]])
    assert np.max(np.abs(chi2.forward(left) - left)) == 0.0
    band = np.array([[-s.eps / 2, 0.3]])
    moved = chi2.forward(band)
    assert moved[0, 1] > band[0, 1]  # pushed upward inside the band
    block = np.array([[0.5, 0.3]])
    assert chi2.forward(block)[0, 1] == pytest.approx(1.3)  # shifted up by j-1


def test_flow_backed_chi_matches_formula_on_band():
    s = nice_subsets(7.0, 1.0, 2)
    probe = Rectangle(-s.eps, min(s.b, 1.0), 0.05, 0.95).bbox.grid(7, 7)
    assert map_sup_distance(s.chi[1], s.shear_closed_form(2), probe) <= 1e-5


def test_render_system_svg(tmp_path):
    s = nice_subsets(7.0, 1.0, 2)
    path = render_system(s, os.path.join(tmp_path, "fig.svg"))
    svg = open(path).read()
    assert svg.startswith("<?xml")
    for gid in ["U0-block", "X0", "X4", "finger-4", "chi2-U2"]:
        assert f'id="{gid}"' in svg
