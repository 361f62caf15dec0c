"""
Unit tests for the dimension grids and SVG plots.
"""
import os
import sys
import tempfile
import unittest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from sympy import Rational

from core.errors import InputError
from core.manifest import Manifest
from core.persistence import build
from core.plotting import dims_grid, grid_values, plot_dims

MANIFESTS = os.path.join(os.path.dirname(__file__), '..', 'manifests')


class TestPlotting(unittest.TestCase):
    """Dimensions of the interval module over a grid."""

    @classmethod
    def setUpClass(cls):
        cls.module = build(Manifest.load(os.path.join(MANIFESTS, 'interval.json')).to_input())

    def test_grid_values(self):
        self.assertEqual(grid_values(-1, 1, 3), [Rational(-1), Rational(0), Rational(1)])
        with self.assertRaises(InputError):
            grid_values(0, 1, 1)

    def test_dims_grid(self):
        grid = dims_grid(self.module, 5, (-1, 1))
        self.assertEqual(grid.shape, (1, 5))
        self.assertEqual(grid[0].tolist(), [0, 0, 1, 1, 1])

    def test_svg_is_reproducible(self):
        with tempfile.TemporaryDirectory() as tmp:
            first = os.path.join(tmp, 'a.svg')
            second = os.path.join(tmp, 'b.svg')
            self.assertTrue(plot_dims(self.module, first, 5, (-1, 1)))
            self.assertTrue(plot_dims(self.module, second, 5, (-1, 1)))
            with open(first, encoding='utf-8') as a, open(second, encoding='utf-8') as b:
                text = a.read()
                self.assertIn('<svg', text)
                self.assertEqual(text, b.read())


if __name__ == '__main__':
    unittest.main()
