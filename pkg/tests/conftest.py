import random

import pytest

from abeshare import cpabe


@pytest.fixture(scope="session")
def gp():
    return cpabe.global_setup()


@pytest.fixture()
def rng():
    return random.Random(0xABE5)


@pytest.fixture(scope="session")
def authorities(gp):
    rng = random.Random(1001)
    return {theta: cpabe.auth_setup(gp, theta, rng)
            for theta in ("AUTH1", "AUTH2", "AUTH3")}


@pytest.fixture(scope="session")
def pks(authorities):
    return {theta: a.pk for theta, a in authorities.items()}


@pytest.fixture(scope="session")
def user(gp):
    return cpabe.user_keygen(gp, random.Random(2002))
