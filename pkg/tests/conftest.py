from __future__ import annotations

import numpy as np
import pytest

from hoferlab import standard_structure


@pytest.fixture
def struct2():
    return standard_structure(1)


@pytest.fixture
def struct4():
    return standard_structure(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
