import math

import numpy as np
import pytest

from hoferflow.errors import SupportViolationError
from hoferflow.flow import (AutonomousHamiltonian, Diffeo, FlowConfig,
                            ZeroHamiltonian, compose, conjugate,
                            conjugate_hamiltonian, estimate_support, flow_map,
                            flow_point, flow_points, hamiltonian_vector_field,
                            inverse_hamiltonian, jacobian_determinant,
                            map_sup_distance, verification_points)
from hoferflow.geometry import Disk, EmptyRegion, Rectangle
from hoferflow.profiles import Polynomial2D, make_bump
from hoferflow.transport import compact_translation


def test_field_of_momentum_coordinate():
    H = AutonomousHamiltonian(Polynomial2D({(0, 1): 1.0}))
    v = hamiltonian_vector_field(H, 0.0, [0.0, 0.0])
    assert np.allclose(v, [1.0, 0.0])


def test_field_of_constant_vanishes():
    H = AutonomousHamiltonian(Polynomial2D({(0, 0): 3.0}))
    assert np.allclose(hamiltonian_vector_field(H, 0.0, [0.3, -0.2]), 0.0)


def test_rotation_field_and_unit_period():
    H = AutonomousHamiltonian(Polynomial2D({(2, 0): math.pi, (0, 2): math.pi}))
    v = hamiltonian_vector_field(H, 0.0, [0.0, 1.0])
    assert np.allclose(v, [2 * math.pi, 0.0])
    x = flow_point(H, 0.0, 1.0, [1.0, 0.0], FlowConfig(step=2e-4))
    assert np.max(np.abs(x - [1.0, 0.0])) <= 1e-6


def test_zero_hamiltonian_fixes_everything():
    x = flow_point(ZeroHamiltonian(), 0.0, 1.0, [0.2, -0.4])
    assert np.allclose(x, [0.2, -0.4])


def test_linear_hamiltonian_exact_translation():
    H = AutonomousHamiltonian(Polynomial2D({(0, 1): 1.0}))
    x = flow_point(H, 0.0, 1.0, [0.0, 0.0])
    assert np.allclose(x, [1.0, 0.0], atol=1e-13)


def test_flow_map_identity_at_time_zero(gentle_bump):
    phi = flow_map(gentle_bump, 0.0)
    pts = verification_points(Rectangle(-2, 2, -2, 2), 20, 100)
    assert map_sup_distance(phi, Diffeo.identity(), pts) == 0.0


def test_jacobian_determinant_near_one(gentle_bump, rng):
    phi = flow_map(gentle_bump, 1.0, FlowConfig(step=1e-3))
    pts = Rectangle(-2, 2, -2, 2).bbox.random_points(100, rng)
    det = jacobian_determinant(phi, pts, eps=5e-6)
    assert np.max(np.abs(det - 1.0)) <= 1e-6


def test_inverse_contract(gentle_bump, rng):
    phi = flow_map(gentle_bump, 1.0)
    pts = Rectangle(-2, 2, -2, 2).bbox.random_points(60, rng)
    roundtrip = phi.inverse(phi.forward(pts))
    assert np.max(np.abs(roundtrip - pts)) <= 1e-6


def test_group_law_autonomous(gentle_bump, rng):
    pts = Rectangle(-1.5, 1.5, -1.5, 1.5).bbox.random_points(40, rng)
    a = flow_points(gentle_bump, 0.0, 0.3, pts)
    ab = flow_points(gentle_bump, 0.3, 0.75, a)
    direct = flow_points(gentle_bump, 0.0, 0.75, pts)
    assert np.max(np.abs(ab - direct)) <= 1e-5


def test_energy_conservation(gentle_bump, rng):
    pts = Rectangle(-1.5, 1.5, -1.5, 1.5).bbox.random_points(50, rng)
    before = gentle_bump.value(0.0, pts)
    after = gentle_bump.value(0.0, flow_points(gentle_bump, 0.0, 1.0, pts))
    assert np.max(np.abs(after - before)) <= 1e-6


def test_inverse_hamiltonian_zero():
    Hbar = inverse_hamiltonian(ZeroHamiltonian())
    assert float(np.max(np.abs(Hbar.value(0.5, np.zeros((3, 2)))))) == 0.0


def test_inverse_hamiltonian_composed_flow_is_identity(gentle_bump, rng):
    Hbar = inverse_hamiltonian(gentle_bump)
    pts = Rectangle(-1.5, 1.5, -1.5, 1.5).bbox.random_points(40, rng)
    fwd = flow_points(gentle_bump, 0.0, 1.0, pts)
    back = flow_points(Hbar, 0.0, 1.0, fwd)
    assert np.max(np.abs(back - pts)) <= 1e-5


def test_inverse_hamiltonian_autonomous_is_negation(gentle_bump):
    # for autonomous H the reversal -H^{1-t} collapses to -H = -H o phi^t
    Hbar = inverse_hamiltonian(gentle_bump)
    pts = np.array([[0.3, 0.1], [1.0, -0.4]])
    assert np.allclose(Hbar.value(0.3, pts), -gentle_bump.value(0.3, pts))


def test_conjugation_by_identity(gentle_bump):
    K = conjugate_hamiltonian(gentle_bump, Diffeo.identity())
    pts = np.array([[0.2, 0.4]])
    assert np.allclose(K.value(0.2, pts), gentle_bump.value(0.2, pts))


def test_conjugated_flow_is_translated_flow(gentle_bump, rng):
    psi = compact_translation(Disk(3.5), [2.5, 0.0])
    K = conjugate_hamiltonian(gentle_bump, psi)
    pts = Rectangle(-1.2, 1.2, -1.2, 1.2).bbox.random_points(25, rng)
    lhs = flow_points(K, 0.0, 1.0, pts + [2.5, 0.0])
    rhs = flow_points(gentle_bump, 0.0, 1.0, pts) + [2.5, 0.0]
    assert np.max(np.abs(lhs - rhs)) <= 1e-5


def test_estimate_support_identity():
    reg = estimate_support(Diffeo.identity(), Rectangle(-1, 1, -1, 1))
    assert isinstance(reg, EmptyRegion)


def test_estimate_support_of_bump_flow(bump_shift):
    phi = flow_map(bump_shift, 1.0)
    outer = bump_shift.support
    reg = estimate_support(phi, Rectangle(-2.5, 2.5, -2.5, 2.5), grid=(40, 40))
    bd = reg.boundary_points(64)
    assert bool(np.all(outer.bbox.pad(0.2).contains(bd)))


def test_estimate_support_violation_raises(bump_shift):
    phi = flow_map(bump_shift, 1.0)
    small = Rectangle(-0.2, 0.2, -0.2, 0.2)
    with pytest.raises(SupportViolationError):
        estimate_support(phi, small)


def test_symplecticity_order_under_refinement(gentle_bump, rng):
    pts = Rectangle(-1.5, 1.5, -1.5, 1.5).bbox.random_points(20, rng)
    sols = {h: flow_points(gentle_bump, 0, 1, pts, FlowConfig(step=h))
            for h in (2e-3, 1e-3, 5e-4)}
    e1 = np.max(np.abs(sols[2e-3] - sols[1e-3]))
    e2 = np.max(np.abs(sols[1e-3] - sols[5e-4]))
    assert math.log2(e1 / e2) >= 1.9


def test_compose_and_conjugate_orders():
    t1 = compact_translation(Disk(0.5), [1.0, 0.0])
    t2 = compact_translation(Disk(0.5, (1.0, 0.0)), [0.0, 1.0])
    x = np.array([[0.0, 0.0]])
    y = compose(t2, t1).forward(x)  # t1 first
    assert np.allclose(y, [[1.0, 1.0]], atol=1e-9)
    ad = conjugate(t1, Diffeo.identity())
    assert np.allclose(ad.forward(x), x, atol=1e-9)
