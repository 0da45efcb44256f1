# conftest.py
"""
Shared pytest fixtures: small example fixtures and test bases
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from utils.singular_flux.examples_corpus import build  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def transfer_1d():
    """Example 7.1 with a small stratified ensemble"""
    return build("7.1", 20)


@pytest.fixture(scope="session")
def transfer_basis(transfer_1d):
    return transfer_1d.basis(12)


@pytest.fixture(scope="session")
def circle_flux():
    """Example 7.2: rotating flux at one instant, no representing ensemble"""
    return build("7.2")


@pytest.fixture(scope="session")
def circle_basis(circle_flux):
    return circle_flux.basis(10)
