import pytest

from distress_nonce import profiles

from oracle import ToyOracle


@pytest.fixture(scope="session")
def toy():
    return profiles.load("toy")


@pytest.fixture(scope="session")
def prod():
    return profiles.load("production")


@pytest.fixture(scope="session")
def oracle(toy):
    c = toy.curve
    return ToyOracle(c.q, c.a, c.b)


@pytest.fixture(scope="session")
def gen_orbit(toy, oracle):
    return oracle.orbit(toy.curve.gen)
