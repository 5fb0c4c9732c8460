"""
Shared fixtures for the LOPC test suite.
"""

from fractions import Fraction
from pathlib import Path

import pytest

from lopc.core.dist import SecrecySpectrum, pure_state

DATA_DIR = Path(__file__).resolve().parent.parent.parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def trit() -> SecrecySpectrum:
    return SecrecySpectrum.uniform(3)


@pytest.fixture
def bit() -> SecrecySpectrum:
    return SecrecySpectrum.uniform(2)


@pytest.fixture
def trit_state(trit):
    return pure_state(trit)


@pytest.fixture
def half() -> Fraction:
    return Fraction(1, 2)

