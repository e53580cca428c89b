import pytest
from hypothesis import settings

from fsupport.chains import ChainConfig
from fsupport.fmodule import FRoot
from fsupport.groebner import ideal
from fsupport.ring import RingSpec
from fsupport.support import same_support

# fixed example streams keep the suite reproducible run to run
settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")


def ring(p, names, order="grevlex"):
    return RingSpec(p, tuple(names.split()) if isinstance(names, str) else tuple(names), order)


def polys(R, *texts):
    return [R.parse(t) for t in texts]


def supported_on(result, R, *gens):
    """Vanishing locus of result equals that of the ideal generated by gens."""
    target = ideal(R, list(gens) or ["1"])
    return same_support(result, target)


@pytest.fixture
def cfg():
    return ChainConfig()


@pytest.fixture
def R2xy():
    return ring(2, "x y")


@pytest.fixture
def R2xyzw():
    return ring(2, "x y z w")


@pytest.fixture
def R2xyz():
    return ring(2, "x y z")


def root(R, A, U):
    return FRoot.parse(R, A, U)
