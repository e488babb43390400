import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from modricci.models import ModelSpec, build_model, catalog_spec, KINDS

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def model_of(kind, **kw):
    if kw:
        base = catalog_spec(kind, kw.get("dimension")).to_dict()
        base.update(kw)
        return build_model(ModelSpec.from_dict(base))
    return build_model(catalog_spec(kind))


@pytest.fixture(params=KINDS)
def catalog_model(request):
    return build_model(catalog_spec(request.param))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
