import numpy as np
import pytest

from susyinv.kinematics import k_from_elab
from susyinv.poles import PoleSet

S_WAVE_POLES = (-0.0401, -0.7540, 0.6152, 2.0424, 4.1650, 4.6)
D_WAVE_POLES = (-0.4294, -0.8827, -8.7653, 0.7750, 0.4376)
S_WAVE_TAYLOR = (0.04219, 1.30386, 0.06883)
S_WAVE_PADE = ((0.0422, 1.3793, 2.0105, -0.058), (1.0, 1.5986, -0.6164))
# printed D-wave (a, r, P); a is given with the sign convention K(0) = +1/a
D_WAVE_ERE = (0.88762, 15.33061, -0.00246)


@pytest.fixture(scope="session")
def s_poles():
    return PoleSet(0, S_WAVE_POLES)


@pytest.fixture(scope="session")
def d_poles():
    return PoleSet(2, D_WAVE_POLES)


@pytest.fixture(scope="session")
def s_potential(s_poles):
    from susyinv.susy import build_potential

    return build_potential(s_poles)


@pytest.fixture(scope="session")
def d_potential(d_poles):
    from susyinv.susy import build_potential

    return build_potential(d_poles)


@pytest.fixture(scope="session")
def elab_grid():
    return np.linspace(1.0, 350.0, 50)


@pytest.fixture(scope="session")
def k_grid(elab_grid):
    return k_from_elab(elab_grid)
