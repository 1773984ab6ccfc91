from unittest import TestCase

import pytest


class EpsCase(TestCase):
    def test_eleven(self):
        self.assertTrue(True)


def test_twelve():
    assert True
