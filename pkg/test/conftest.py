import os
import sys

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import pytest

from hybridq.model import SystemParams, discretize_gaussian


@pytest.fixture
def small_params():
    """Slow, moderately dissipative system used by the propagation oracles."""
    return SystemParams(
        delta_c=5.0, omega_coll=4.0, eta=0.0, kappa=1.0, gamma_h=0.5, gamma_p=0.25,
        delta_width=3.0, n_spins=2, mean_spin_detuning=5.0,
    )


@pytest.fixture
def small_classes(small_params):
    return discretize_gaussian(small_params, 2)
