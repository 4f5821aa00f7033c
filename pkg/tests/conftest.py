import numpy as np
import pytest

from warpcheck.spaces import basicex_geometry, ejiri_space, expwarp_space


@pytest.fixture(scope="session")
def ejiri():
    return ejiri_space()


@pytest.fixture(scope="session")
def basicex52():
    return basicex_geometry(5, 2)


@pytest.fixture(scope="session")
def basicex41():
    return basicex_geometry(4, 1)


@pytest.fixture(scope="session")
def expwarp4():
    return expwarp_space(4)


def central_diff(fn, x, order, step):
    """Central finite differences for derivative orders 1..4 of a 1-d callable."""
    if order == 0:
        return fn(x)
    if order == 1:
        return (fn(x + step) - fn(x - step)) / (2 * step)
    if order == 2:
        return (fn(x + step) - 2 * fn(x) + fn(x - step)) / step**2
    if order == 3:
        return (fn(x + 2 * step) - 2 * fn(x + step) + 2 * fn(x - step) - fn(x - 2 * step)) / (
            2 * step**3
        )
    if order == 4:
        return (
            fn(x + 2 * step) - 4 * fn(x + step) + 6 * fn(x) - 4 * fn(x - step) + fn(x - 2 * step)
        ) / step**4
    raise ValueError(order)


@pytest.fixture
def fd():
    return central_diff
