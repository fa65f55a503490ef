import pytest

from fpouter.catalog import SIG_Z222, SIG_Z23, SIG_Z221, SIG_Z31, build_catalog
from fpouter.checks import Instance


@pytest.fixture(scope="session")
def catalog():
    return build_catalog()


@pytest.fixture(scope="session")
def instances():
    """Catalog entries with their basepoint morphisms and fold paths."""
    return [Instance(name, g) for name, g in build_catalog()]


@pytest.fixture(scope="session")
def star_instance(instances):
    return next(inst for inst in instances if inst.name == "z222_path")


@pytest.fixture(scope="session")
def sig222():
    return SIG_Z222


@pytest.fixture(scope="session")
def sig23():
    return SIG_Z23


@pytest.fixture(scope="session")
def sig221():
    return SIG_Z221


@pytest.fixture(scope="session")
def sig31():
    return SIG_Z31
