import pytest

from eulerfit.cli import generate_truth
from eulerfit.dynamics import FhnParams


@pytest.fixture(scope="session")
def fhn_truth():
    """Clean default-parameter trajectory at dt=0.01 over 20 time units."""
    return generate_truth(FhnParams(), dt=0.01, t_final=20.0)
