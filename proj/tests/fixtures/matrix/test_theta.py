import os


def test_fifteen():
    assert os.sep
