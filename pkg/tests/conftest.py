from __future__ import annotations

import numpy as np
import pytest

from cantor.config import TestingConfig
from cantor.core.catalog import build_example
from cantor.core.group_action import GeneratedAction
from cantor.core.automorphism import identity_element
from cantor.core.tree import Geometric, constant_index


@pytest.fixture
def config():
    return TestingConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def binary():
    return constant_index(2)


@pytest.fixture
def geometric():
    return Geometric(prefix=[3], ratio=3)


@pytest.fixture
def odometer(config):
    return build_example("odometer", config, d=2)


@pytest.fixture
def dihedral(config):
    return build_example("dihedral", config, d=2)


@pytest.fixture
def grigorchuk(config):
    return build_example("grigorchuk", config)


@pytest.fixture
def thm61(config):
    return build_example("thm61_b", config)


@pytest.fixture
def ex44(config):
    return build_example("ex44_c", config)


@pytest.fixture
def ex45(config):
    return build_example("ex45_c", config, d=2)


@pytest.fixture
def trivial_action(binary, config):
    """One generator acting as the identity."""
    return GeneratedAction(binary, {"i": identity_element(binary)}, config=config, name="trivial")
