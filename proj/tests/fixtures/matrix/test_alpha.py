import pytest


def test_one():
    assert True


class Alpha:
    def test_two(self):
        assert True


def helper():
    return 1
