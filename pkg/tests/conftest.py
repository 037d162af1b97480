import textwrap

import pytest
import yaml

from anisofield.kernel import AngularSpec, KernelContext
from anisofield.params import ModelParams


INCONGRUOUS_B = ((1.0, 0.5), (0.7, 1.0))
CONGRUOUS_B = ((1.0, 0.5), (0.0, 1.0))
IDENTITY_B = ((1.0, 0.0), (0.0, 1.0))


def pytest_addoption(parser):
    parser.addoption("--run-acceptance", action="store_true")


def pytest_collection_modifyitems(items):
    items_new = []

    for item in items:
        has_mark = bool(list(item.iter_markers(name="acceptance")))

        if item.config.getoption("--run-acceptance") or not has_mark:
            items_new.append(item)

    items[:] = items_new


@pytest.fixture(scope="function")
def config_fragment():
    def config_fragment(fragment):
        return yaml.safe_load(textwrap.dedent(fragment))

    return config_fragment


@pytest.fixture(scope="function")
def make_params():
    def make_params(q1=1.2, q2=1.6, B=INCONGRUOUS_B, angular=None, **kwargs):
        return ModelParams(
            q1=q1,
            q2=q2,
            B=B,
            angular=AngularSpec.constant(1.0) if angular is None else angular,
            **kwargs
        )

    return make_params


@pytest.fixture(scope="function")
def make_ctx(make_params):
    def make_ctx(M=8, **kwargs):
        return KernelContext.from_params(make_params(**kwargs), M=M)

    return make_ctx
