import numpy as np
import pytest

from rabisim.experiment import tied_rate_table
from rabisim.model import PhysicalParams, RateTable, build_dressed_ladder


@pytest.fixture
def params():
    """Reference microwave-cavity constants."""
    return PhysicalParams()


@pytest.fixture
def desk_params():
    """Order-one scales; keeps random-rate numerics easy to read."""
    return PhysicalParams(omega0=5.0, g=0.7, temperature=0.8)


@pytest.fixture
def tied_rates(params):
    return tied_rate_table(params)


@pytest.fixture
def ladder2(params):
    return build_dressed_ladder(params, 2)


def make_random_table(rng, params, low=0.2, high=1.0):
    return RateTable(*rng.uniform(low, high, size=12), params=params)


@pytest.fixture
def random_tables(desk_params):
    rng = np.random.default_rng(20260811)

    def factory(count, low=0.2, high=1.0):
        return [make_random_table(rng, desk_params, low, high) for _ in range(count)]

    return factory
