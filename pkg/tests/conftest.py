import pytest

from platoonplan.instance import three_truck_demo


@pytest.fixture
def demo():
    return three_truck_demo()
