import unittest


class BetaCase(unittest.TestCase):
    def test_five(self):
        self.assertTrue(True)


def test_six():
    assert True
