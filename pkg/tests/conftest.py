import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fracmax.fracops import Grid1D, SampledFn

settings.register_profile(
    "fracmax", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("fracmax")


@pytest.fixture
def unit_grid():
    return Grid1D(0.0, 1.0, 2048)


def sample(grid: Grid1D, fn, label: str = "") -> SampledFn:
    return SampledFn(grid, np.asarray(fn(grid.nodes), dtype=np.float64), label)
