# -*- coding: utf-8 -*-
"""
Shared test fixtures, the repository root is put on sys.path by pytest
"""

import pytest

from model import SpinModel


@pytest.fixture(params=[1, -1, 2, -2], ids=["n=+1", "n=-1", "n=+2", "n=-2"])
def model(request):
    return SpinModel(request.param)


@pytest.fixture
def spin_half():
    return SpinModel(1)


@pytest.fixture
def spin_one():
    return SpinModel(2)
