from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from behavkernel import IrregularSignal, StateSpaceModel

settings.register_profile(
    "default",
    max_examples=100,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# two annihilators of the ramp 1..8: w(t) - 2w(t-1) + w(t-2) = 0 at depth 4
RAMP_KERNEL = np.array([[1.0, -1.5, 0.0, 0.5], [1.0, 0.0, -3.0, 2.0]])


@pytest.fixture
def ramp_gapped() -> IrregularSignal:
    return IrregularSignal.from_array([1, 2, np.nan, 4, 5, np.nan, 7, 8])


@pytest.fixture
def ramp_model() -> StateSpaceModel:
    # w(t) = 2 w(t-1) - w(t-2)
    return StateSpaceModel([[2.0, -1.0], [1.0, 0.0]], np.zeros((2, 0)), [[1.0, 0.0]], np.zeros((1, 0)))
