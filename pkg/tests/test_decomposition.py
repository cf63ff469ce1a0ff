import math

import numpy as np
import pytest

from hoferflow.decomposition import (decompose, plan_movers, time_slice,
                                     verify_word, _check_wtilde_disjoint)
from hoferflow.errors import DisjointnessError, SupportViolationError
from hoferflow.flow import (AutonomousHamiltonian, TimeScaledHamiltonian,
                            ZeroHamiltonian)
from hoferflow.geometry import Disk, ImageRegion
from hoferflow.profiles import Polynomial2D, make_bump


def reference_H(length=0.5):
    rho = make_bump(Disk(0.35), Disk(0.72))
    return AutonomousHamiltonian(rho * Polynomial2D({(0, 0): length}))


# time slicing ----------------------------------------------------------------

def test_time_slice_autonomous_uniform():
    sd = time_slice(reference_H(), 2)
    assert np.allclose(sd.times, np.linspace(0, 1, 5), atol=1e-9)
    assert sd.mass_residual <= 1e-9


def test_time_slice_linear_ramp():
    # oscillation proportional to (1 + t): the half-mass time solves
    # int_0^t (1+s) ds = (1/2) int_0^1 (1+s) ds, i.e. t = sqrt(2.5) - 1
    H = TimeScaledHamiltonian(reference_H(1.0), lambda t: 1.0 + t)
    sd = time_slice(H, 1)
    assert sd.times[1] == pytest.approx(math.sqrt(2.5) - 1, abs=1e-5)


def test_time_slice_masses_equal_random_profile():
    H = TimeScaledHamiltonian(reference_H(1.0),
                              lambda t: 1.0 + 0.7 * math.sin(3.1 * t) ** 2)
    sd = time_slice(H, 3)
    assert sd.mass_residual <= 1e-6


def test_time_slice_degenerate():
    sd = time_slice(ZeroHamiltonian(), 2)
    assert sd.degenerate
    assert np.allclose(sd.times, np.linspace(0, 1, 5))


# plans -----------------------------------------------------------------------

@pytest.mark.parametrize("N", [1, 2, 3])
def test_plan_movers_within_budget(N):
    plan = plan_movers(1.0, 0.8, N)
    est = plan.displacement * ((plan.core_p_hi - plan.core_p_lo)
                               + 2 * plan.pad_p)
    assert est < 1.0
    assert plan.eps_shear <= plan.d / 4
    assert plan.b > plan.a_prime


# pipeline --------------------------------------------------------------------

def test_decompose_degenerate_zero_hamiltonian():
    rep = decompose(ZeroHamiltonian(), 1.0, 0.8, 2)
    assert rep.degenerate
    assert rep.theorem_total == pytest.approx(8.0)
    assert rep.residuals["word_vs_direct"] == 0.0


def test_decompose_requires_support_inside_disk():
    rho = make_bump(Disk(1.2), Disk(2.2))
    H = AutonomousHamiltonian(rho * Polynomial2D({(0, 0): 0.5}))
    with pytest.raises(SupportViolationError):
        decompose(H, 1.0, 0.8, 1)


def test_decompose_n1_full_contract():
    H = reference_H()
    rep = decompose(H, 1.0, 0.8, 1, verification_points=50)
    assert rep.theorem_total == pytest.approx(9.0, abs=1e-9)
    assert all(f.within_budget for f in rep.factor_table)
    assert rep.residuals["word_vs_direct"] <= 1e-3
    # budget ledger: groups sum to (a + 2a + ||H||/N + a) each
    a, N, L = rep.a, rep.N, rep.hofer_length_H
    assert rep.theorem_total == pytest.approx(2 * (4 * a + L / N), abs=1e-12)
    # sign discipline: Psi^1 carries nu_{m-2j}, Psi^4 its negation
    for f in rep.factor_table:
        if f.k == 1:
            expected = "+" if f.group_m % 2 == 0 else "-"
            assert str(f.sign) == expected
        if f.k == 4:
            expected = "+" if f.group_m % 2 == 0 else "-"
            assert str(f.sign) == expected
        if f.k == 3:
            assert str(f.sign) == "0"
            assert f.cert_value == pytest.approx(L / N, abs=1e-9)
    # X_i landed inside the fingers, identity zone of the shears
    for i, mv in enumerate(rep.movers, start=1):
        bd = mv.seat_image.boundary_points(64)
        assert bool(np.all(rep.system.U[i - 1].contains(bd)))
        assert float(np.max(bd[:, 0])) <= -rep.plan.eps_shear


def test_verify_word_reruns(decomposition_n1):
    out = verify_word(decomposition_n1, n_points=40)
    assert out["word_vs_direct"] <= 1e-3


@pytest.fixture(scope="module")
def decomposition_n1():
    return decompose(reference_H(), 1.0, 0.8, 1, verification_points=40)


def test_corrupted_shear_fails_disjointness():
    # skipping one shear makes the W~ regions overlap; the check reports it
    rep = decompose(reference_H(), 1.0, 0.8, 2, verification_points=40,
                    verify=False)
    group = rep.groups[0]
    sys_ = rep.system
    corrupted = [ImageRegion(W.base, sys_.shear_closed_form(1))
                 for W in group.wtilde]  # all factors get the identity shear
    with pytest.raises(DisjointnessError):
        _check_wtilde_disjoint(corrupted, margin=rep.plan.band * 0.01)
