import pytest

from crossdock.instance_io import (
    load_fixture_instance,
    load_fixture_solution,
)
from crossdock.model import Instance


@pytest.fixture(scope="session")
def nine_truck() -> Instance:
    """The bundled 9-truck/6-dock reference instance."""
    return load_fixture_instance()


@pytest.fixture(scope="session")
def s_star(nine_truck):
    return load_fixture_solution("s_star.json", n=nine_truck.n, m=nine_truck.m)


@pytest.fixture(scope="session")
def s_prime_star(nine_truck):
    return load_fixture_solution(
        "s_prime_star.json", n=nine_truck.n, m=nine_truck.m
    )


def tiny_two_truck(t11=0.0, c11=1.0, f12=5.0, p12=2.0, capacity=None) -> Instance:
    """Two trucks, one dock: truck 1 then truck 2, a single forward flow."""
    return Instance(
        n=2,
        m=1,
        arrival=(0.0, 2.0),
        departure=(1.0, 3.0),
        transfer_time=((t11,),),
        transfer_cost=((c11,),),
        flow=((0.0, f12), (0.0, 0.0)),
        penalty=((0.0, p12), (0.0, 0.0)),
        capacity=capacity,
        name="tiny",
    )
