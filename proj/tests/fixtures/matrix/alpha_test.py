import pytest


def test_three():
    assert True
