import pytest

from tipbeam.model import validate_params


@pytest.fixture(scope="session")
def params_generic():
    """Damped set with k1 != k3; both eigenvalue families are separated."""
    return validate_params(a=1.0, b=2.0, k1=1.0, k2=2.0, k3=3.0, k4=2.0)


@pytest.fixture(scope="session")
def params_degenerate():
    """k1 = k3 and sqrt(b) = 2*pi: the families collide at leading order."""
    import math

    return validate_params(a=1.0, b=4.0 * math.pi**2, k1=2.0, k2=1.0, k3=2.0, k4=5.0)


@pytest.fixture(scope="session")
def params_conservative():
    return validate_params(a=1.0, b=2.0, k1=1.0, k2=0.0, k3=3.0, k4=0.0)
