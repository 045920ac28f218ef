import pytest

from cowlab.params import ExperimentalParams


@pytest.fixture(scope="session")
def rows():
    """The two reference experimental parameter sets with four-state priors."""
    return [
        ExperimentalParams(0.06, 0.155, 0.9, 0.22, 0.1625, f_d=0.1, f_v=0.055),
        ExperimentalParams(0.1, 0.155, 0.9, 0.27, 0.168, f_d=0.1, f_v=0.055),
    ]
