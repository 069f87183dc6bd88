import numpy as np
import pytest

from spin7.geometry_fields import (
    fixture_conformal,
    fixture_flat,
    fixture_perturbed,
    sample_points,
    structure_jet,
)

N_POINTS = 32


@pytest.fixture(scope="session")
def points():
    return sample_points(N_POINTS, seed=0)


@pytest.fixture(scope="session")
def fields():
    return {
        "flat": fixture_flat(),
        "conformal": fixture_conformal(),
        "perturbed": fixture_perturbed(),
    }


@pytest.fixture(scope="session")
def jets(fields, points):
    """Structure jets of every fixture at the shared sample points."""
    return {name: [structure_jet(f, x) for x in points] for name, f in fields.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
