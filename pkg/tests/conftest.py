import pytest

from flagforge.circuitgen import stab_meas_d7


@pytest.fixture(scope="session")
def d7_w17():
    # order-3 table derivation takes about a minute; share one generation
    # between the structural tests and the acceptance checks
    return stab_meas_d7(17)
