"""Shared fixtures: ground states are expensive, solve them once per session."""

import numpy as np
import pytest

from nlsmass.grid import make_grid
from nlsmass.limit_problem import solve_ground_state


@pytest.fixture(scope="session")
def gs_1d_p8():
    return solve_ground_state(1, 8.0, make_grid(1, "radial", 20.0, 4096))


@pytest.fixture(scope="session")
def gs_3d_p4():
    return solve_ground_state(3, 4.0, make_grid(3, "radial", 25.0, 4096))


@pytest.fixture(scope="session")
def gs_3d_q3():
    # subcritical power, used only for the interpolation constant
    return solve_ground_state(3, 3.0, make_grid(3, "radial", 25.0, 4096))


def random_radial_profile(grid, rng, rho=None, bumps=4):
    """Smooth random profile: sum of gaussian shells, decayed at rmax."""
    r = np.abs(grid.nodes)
    vals = np.zeros(grid.n)
    for _ in range(bumps):
        center = rng.uniform(0.0, 0.4 * grid.rmax)
        width = rng.uniform(0.3, 0.1 * grid.rmax)
        amp = rng.uniform(-1.0, 1.0)
        vals += amp * np.exp(-((r - center) / width) ** 2)
    vals *= np.exp(-((r / (0.6 * grid.rmax)) ** 4))
    from nlsmass.grid import GridFunction, lp_norm

    u = GridFunction(grid, vals)
    if rho is not None:
        mass = lp_norm(u, 2.0)
        if mass == 0.0:
            raise ValueError("degenerate random draw")
        u = GridFunction(grid, vals * (rho / mass))
    return u
