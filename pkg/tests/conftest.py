import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fitted():
    return json.loads((FIXTURES / "fitted_constants.json").read_text())


@pytest.fixture(scope="session")
def tables_1e4():
    from powerstrips.arith import build_tables

    return build_tables(10 ** 4)
