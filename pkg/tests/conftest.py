import pytest

from coopgrid.scenario import reference_scenario


@pytest.fixture(scope="session")
def ref_scenario():
    return reference_scenario()
