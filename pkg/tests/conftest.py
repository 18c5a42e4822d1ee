import numpy as np
import pytest

from projeikonal.geometry import Circle, Disc, Ellipse, grid_from_mask, make_tube, rasterize


def square_grid(n, h=None, half=1.0, hole=None):
    """``n x n`` cells on ``[-half, half]^2`` with an optional round hole, and
    optionally restricted to the inscribed disc when ``hole`` is given."""
    h = 2 * half / n if h is None else h
    x = -half + (np.arange(n) + 0.5) * h
    X, Y = np.meshgrid(x, x)
    mask = np.ones((n, n), dtype=bool)
    if hole is not None:
        R = np.hypot(X, Y)
        mask = (R < half) & (R > hole)
    return grid_from_mask(mask, h, origin=(-half, -half))


@pytest.fixture(scope="session")
def annulus():
    return make_tube(Circle(1.5), 0.5)


@pytest.fixture(scope="session")
def ellipse_tube():
    return make_tube(Ellipse(2.0, 1.0), 0.2)


@pytest.fixture(scope="session")
def disc():
    return Disc(1.0)


@pytest.fixture(scope="session")
def annulus_grid_32(annulus):
    return rasterize(annulus, 1 / 32)
