from pytest import fixture


@fixture
def test_sixteen():
    return True
