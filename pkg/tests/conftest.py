"""Shared fixtures for the toposforge tests"""
import os
import sys

import pytest

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from toposforge.core.loaders import BUILTIN_SPACES, register_nuclei
from toposforge.services.corpus import vee
from toposforge.services.finring import zmod
from toposforge.services.sheaf import Environment, check_sheaf, constant_sheaf, from_tables


@pytest.fixture
def sierpinski():
    """Points eta (open) and sigma (closed); the open {eta} is named U"""
    return BUILTIN_SPACES["sierpinski"]()


@pytest.fixture
def sierpinski_env(sierpinski):
    env = Environment(sierpinski)
    env.add_sheaf("F", constant_sheaf(sierpinski, (0, 1), "F"))
    return register_nuclei(env)


@pytest.fixture
def vee_sheaf():
    """Inhabited at every point, yet without global sections"""
    X = vee()
    g, ga, gb = X.open_of(["g"]), X.open_of(["g", "a"]), X.open_of(["g", "b"])
    F = from_tables(
        "F",
        X,
        {X.empty: ["*"], g: ["0", "1"], ga: ["0"], gb: ["1"], X.full: []},
        {(ga, g): {"0": "0"}, (gb, g): {"1": "1"}},
    )
    return check_sheaf(F)


@pytest.fixture
def vee_env(vee_sheaf):
    env = Environment(vee_sheaf.space)
    env.add_sheaf("F", vee_sheaf)
    return env


@pytest.fixture(scope="session")
def zmod12():
    return zmod(12)
