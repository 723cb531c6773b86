import numpy as np
import pytest

from pipemap import IntervalMapping, PipelineSpec, Platform


def uniform_bandwidth(p: int, value: float = 2.0) -> np.ndarray:
    b = np.full((p + 2, p + 2), value)
    np.fill_diagonal(b, 0.0)
    return b


@pytest.fixture
def tiny_spec() -> PipelineSpec:
    """Three stages with costs (4, 6, 2) and all boundary volumes 2."""
    return PipelineSpec(stage_names=("a", "b", "c"), w=[4, 6, 2], delta=[2, 2, 2, 2])


@pytest.fixture
def tiny_platform() -> Platform:
    """Two processors with speeds (2, 1), every link bandwidth 2."""
    return Platform(s=[2, 1], b=uniform_bandwidth(2))


@pytest.fixture
def tiny3_platform() -> Platform:
    """Three processors with speeds (2, 1, 1), every link bandwidth 2."""
    return Platform(s=[2, 1, 1], b=uniform_bandwidth(3))


@pytest.fixture
def tiny_all_on_p1() -> IntervalMapping:
    return IntervalMapping.single_interval(3, 1)


@pytest.fixture
def tiny_two_intervals() -> IntervalMapping:
    return IntervalMapping.from_signature("1-2@p1;3-3@p2")
