import unittest


class ChecksCase(unittest.TestCase):
    def test_four(self):
        self.assertTrue(True)
