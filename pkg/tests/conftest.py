import math
from pathlib import Path

import numpy as np
import pytest

from lemni.core import Instance

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def lemniscate():
    """f(z) = z**2 - 1."""
    return Instance.from_pairs([-1, 1])


@pytest.fixture
def cube():
    """f(z) = z**3."""
    return Instance.from_pairs([(0, 3)])


@pytest.fixture
def three_on_line():
    """f(z) = z (z - 1) (z - 2): two critical points with equal modulus."""
    return Instance.from_pairs([0, 1, 2])


def random_instance(rng, degree, spread=1.0):
    r = rng.uniform(0, spread, degree)
    t = rng.uniform(0, 2 * math.pi, degree)
    return Instance.from_pairs(r * np.exp(1j * t))


def circle_polyline(center, radius, n=128, level=0.0):
    from lemni.levelset import ContourPolyline

    t = 2 * np.pi * np.arange(n) / n
    return ContourPolyline(center + radius * np.exp(1j * t), True, level)
