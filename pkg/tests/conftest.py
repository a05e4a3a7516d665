"""Shared fixtures: benchmark-field operator runs and the bundled image.

The expensive artifacts (operator outputs for the two benchmark fields at
four orders each) are computed once per session and shared by the module
tests and the acceptance tests.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from kanops.imaging import example_field
from kanops.io import load_pgm, sample_image_path
from kanops.kernels import make_kernel
from kanops.operator import GridFunction, kantorovich_apply_grid

GRID = 128
ORDERS = (10, 20, 30, 40)


def field_on_grid(fld, shape) -> GridFunction:
    """Sample a scalar field on the inclusive uniform grid of its domain."""
    domain = fld.domain
    r = domain.ndim
    axes = [
        np.linspace(domain.lower[j], domain.upper[j], shape[r - 1 - j])
        for j in range(r)
    ]
    mesh = np.meshgrid(*axes[::-1], indexing="ij", sparse=True)
    values = np.broadcast_to(fld(*mesh[::-1]), tuple(shape)).copy()
    return GridFunction(domain, values)


@pytest.fixture(scope="session")
def example1_runs():
    """Example-1 field (tanh kernel): reference grid and K_n grids, n=10..40."""
    fld = example_field("example1")
    kern = make_kernel("tanh")
    start = time.perf_counter()
    reference = field_on_grid(fld, (GRID, GRID))
    approx = {
        n: kantorovich_apply_grid(fld, kern, n, 4, (GRID, GRID))
        for n in ORDERS
    }
    elapsed = time.perf_counter() - start
    return {"reference": reference, "approx": approx, "elapsed": elapsed}


@pytest.fixture(scope="session")
def example2_runs():
    """Example-2 field (logistic kernel): reference and K_n grids, n=10..40."""
    fld = example_field("example2")
    kern = make_kernel("logistic")
    start = time.perf_counter()
    reference = field_on_grid(fld, (GRID, GRID))
    approx = {
        n: kantorovich_apply_grid(fld, kern, n, 4, (GRID, GRID))
        for n in ORDERS
    }
    elapsed = time.perf_counter() - start
    return {"reference": reference, "approx": approx, "elapsed": elapsed}


@pytest.fixture(scope="session")
def sample_image():
    """The bundled 128x128 grayscale test image."""
    return load_pgm(sample_image_path())
