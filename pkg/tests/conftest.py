import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lunarcomm.scenario import bundled_scenario, run_access_study, run_chain_study  # noqa: E402


@pytest.fixture(scope="session")
def scenario():
    return bundled_scenario()


@pytest.fixture(scope="session")
def access_results(scenario):
    return run_access_study(scenario)


@pytest.fixture(scope="session")
def chain_study(scenario, access_results):
    own = next(r for r in access_results if (r.planes, r.sats_per_plane) == (4, 4))
    return run_chain_study(scenario, own)
