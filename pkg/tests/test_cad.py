"""
Unit tests for cylindrical algebraic decomposition: projection, lifting,
point location, cell closure and connected components of sign conditions.
"""
import os
import sys
import unittest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from sympy import Poly, QQ, Rational, Symbol

from core.algebra import RationalPoint, main_variable_index
from core.cad import (Shear, cc_partition, closure_faces, component_count, decompose, is_quasi_monic, project,
                      projection_levels, shear_candidates)
from core.errors import CapsExceededError, InputError
from core.speed import optm_bound

X1, X2, X3 = Symbol('X1'), Symbol('X2'), Symbol('X3')
VARS = (X1, X2)


def P(expr, gens=VARS):
    return Poly(expr, *gens, domain=QQ)


class TestProjection(unittest.TestCase):
    """Tests for projection factors."""

    def test_circle_projects_to_discriminant(self):
        """The circle projects onto x1 = -1 and x1 = 1."""
        factors = project([P(X1 ** 2 + X2 ** 2 - 1)], X2)
        exprs = {f.as_expr() for f in factors}
        self.assertEqual(exprs, {X1 - 1, X1 + 1})

    def test_levels_by_main_variable(self):
        levels = projection_levels([P(X1 ** 2 + X2 ** 2 - 1)], VARS)
        self.assertEqual(len(levels), 2)
        self.assertEqual(len(levels[0]), 2)
        self.assertEqual([f.as_expr() for f in levels[1]], [X1 ** 2 + X2 ** 2 - 1])

    def test_shear(self):
        """X1 -> X1 + c*X2 makes x1*x2 - 1 quasi-monic in X2 for c != 0."""
        poly = P(X1 * X2 - 1)
        self.assertFalse(is_quasi_monic([poly], X2))
        sheared = Shear(VARS, 1).apply(poly)
        self.assertTrue(is_quasi_monic([sheared], X2))

    def test_shear_candidates_are_seeded(self):
        first = list(shear_candidates(seed=3, retries=4))
        self.assertEqual(first[0], 0)
        self.assertEqual(first, list(shear_candidates(seed=3, retries=4)))


class TestDecomposition(unittest.TestCase):
    """Tests for eager and anchored decompositions."""

    def test_circle_cell_count(self):
        """The unit circle gives 1 + 3 + 5 + 3 + 1 = 13 cells."""
        decomposition = decompose([P(X1 ** 2 + X2 ** 2 - 1)], VARS)
        self.assertEqual(len(decomposition.cells), 13)
        self.assertEqual(sum(1 for c in decomposition.cells if c.dim == 2), 5)

    def test_factors_in_fewer_generators(self):
        """Projection factors that drop the later variables still get a level."""
        self.assertEqual(main_variable_index(Poly(X1 - 1, X1, domain=QQ), VARS), 0)
        self.assertEqual(main_variable_index(Poly(X2 + 1, X2, domain=QQ), VARS), 1)
        self.assertEqual(main_variable_index(Poly(Rational(3), X1, domain=QQ), VARS), -1)
        levels = projection_levels([P(X2 - X1 ** 2), P(X2 - 1)], VARS)
        self.assertEqual({f.as_expr() for f in levels[0]}, {X1, X1 - 1, X1 + 1})
        x = Symbol('X')
        line = decompose([Poly(x ** 2 - 2, x, domain=QQ)], (x,))
        self.assertEqual(len(line.cells), 5)
        # 4 sectors x 5, x1 = 0 gives 5, x1 = +-1 give 3 each
        self.assertEqual(len(decompose([P(X2 - X1 ** 2), P(X2 - 1)], VARS).cells), 31)

    def test_signs_are_invariant_on_samples(self):
        circle = P(X1 ** 2 + X2 ** 2 - 1)
        decomposition = decompose([circle], VARS)
        for cell in decomposition.cells:
            self.assertEqual(cell.signs, (cell.sample.sign(circle),))

    def test_locate(self):
        """The origin lies in the open cell inside the circle."""
        decomposition = decompose([P(X1 ** 2 + X2 ** 2 - 1)], VARS)
        cell = decomposition.locate(RationalPoint((Rational(0), Rational(0))))
        self.assertEqual(cell.dim, 2)
        self.assertEqual(cell.signs, (-1,))
        on = decomposition.locate(RationalPoint((Rational(0), Rational(1))))
        self.assertEqual(on.signs, (0,))
        self.assertEqual(on.dim, 1)

    def test_lazy_sample_matches_eager(self):
        circle = P(X1 ** 2 + X2 ** 2 - 1)
        eager = decompose([circle], VARS)
        lazy = decompose([circle], VARS, lazy=True)
        self.assertIsNone(lazy.cells)
        for cell in eager.cells:
            self.assertEqual(lazy.sample_at(cell.index), cell.sample)

    def test_anchored_fiber(self):
        """Over x1 = 0 the line x2 meets the circle twice."""
        circle = P(X1 ** 2 + X2 ** 2 - 1)
        levels = projection_levels([circle], VARS)
        fiber = decompose([circle], VARS, anchor=RationalPoint((Rational(0),)), n_fixed=1, levels=levels)
        self.assertEqual(len(fiber.cells), 5)
        self.assertEqual([c.signs[0] for c in fiber.cells], [1, 0, -1, 0, 1])


class TestComponents(unittest.TestCase):
    """Tests for connected components of realizable sign conditions."""

    def test_coordinate_axes(self):
        """{X1, X2}: nine sign conditions, each connected."""
        decomposition = cc_partition([P(X1), P(X2)], VARS)
        self.assertEqual(component_count(decomposition), 9)

    def test_circle(self):
        """Inside, on and outside the circle."""
        decomposition = cc_partition([P(X1 ** 2 + X2 ** 2 - 1)], VARS)
        self.assertEqual(component_count(decomposition), 3)

    def test_two_roots_on_the_line(self):
        """X(X - 1) splits the line into five pieces."""
        x = Symbol('X')
        decomposition = cc_partition([Poly(x * (x - 1), x, domain=QQ)], (x,))
        self.assertEqual(component_count(decomposition), 5)

    def test_within_sign_condition_bound(self):
        """Enumerated component counts never exceed the bound."""
        cases = [
            ([P(X1), P(X2)], 2, 1),
            ([P(X1 ** 2 + X2 ** 2 - 1)], 1, 2),
            ([P(X1 ** 2 + X2 ** 2 - 1), P(X1 - X2)], 2, 2),
            ([P(X2 - X1 ** 2), P(X2 - 1)], 2, 2),
        ]
        for polys, s, d in cases:
            count = component_count(cc_partition(polys, VARS))
            self.assertLessEqual(count, optm_bound(s, d, 2))

    def test_closure_of_open_disk_cell(self):
        """The inner 2-cell has the two arcs and the two tangency points in its closure."""
        decomposition = decompose([P(X1 ** 2 + X2 ** 2 - 1)], VARS)
        inside = decomposition.locate(RationalPoint((Rational(0), Rational(0))))
        faces = closure_faces(decomposition, [inside.id])[inside.id]
        self.assertEqual(sorted(decomposition.cells[f].dim for f in faces), [0, 0, 1, 1])

    def test_too_many_variables(self):
        with self.assertRaises(CapsExceededError):
            cc_partition([Poly(X1 + X2 + X3, X1, X2, X3, domain=QQ)], (X1, X2, X3))

    def test_zero_polynomial(self):
        with self.assertRaises(InputError):
            cc_partition([P(0)], VARS)


if __name__ == '__main__':
    unittest.main()
