import numpy as np
import pytest

from hoferflow.flow import FlowConfig
from hoferflow.geometry import Disk, Rectangle
from hoferflow.profiles import Polynomial2D, make_bump
from hoferflow.flow import AutonomousHamiltonian


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fast_cfg():
    return FlowConfig(step=1e-3)


@pytest.fixture
def tight_cfg():
    return FlowConfig(step=2.5e-4)


@pytest.fixture
def bump_shift():
    """Compactly supported H whose flow shifts the inner disk rightward."""
    rho = make_bump(Disk(1.0), Disk(4.0))
    return AutonomousHamiltonian(rho * Polynomial2D({(0, 1): 1.0}))


@pytest.fixture
def gentle_bump():
    """Small-amplitude bump (mild derivatives at every order)."""
    rho = make_bump(Disk(0.8), Disk(3.0))
    return AutonomousHamiltonian(rho * (0.3 * Polynomial2D({(0, 1): 1.0,
                                                            (1, 0): 0.5})))
