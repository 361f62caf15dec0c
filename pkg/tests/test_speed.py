"""
Unit tests for the counting bounds and the class-count experiments.
"""
import os
import sys
import unittest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

import numpy as np
from sympy import Poly, QQ, Symbol

from core.errors import CapsExceededError, InputError
from core.manifest import Manifest
from core.persistence import build
from core.speed import SpeedReport, count_classes, enumerated_components, optm_bound, speed_bound

MANIFESTS = os.path.join(os.path.dirname(__file__), '..', 'manifests')


class TestBounds(unittest.TestCase):
    """Tests for the closed-form bounds."""

    def test_optm_bound(self):
        self.assertEqual(optm_bound(2, 1, 1), 8)
        self.assertEqual(optm_bound(1, 1, 1), 4)
        self.assertEqual(optm_bound(2, 2, 2), 144)

    def test_speed_bound(self):
        self.assertEqual(speed_bound(2, 1, 1), 4)
        self.assertEqual(speed_bound(1, 1, 1), 1)
        self.assertEqual(speed_bound(2, 1, 2), 144)

    def test_bounds_grow(self):
        self.assertLess(speed_bound(3, 1, 2), speed_bound(3, 1, 3))
        self.assertLess(optm_bound(2, 2, 1), optm_bound(3, 2, 1))

    def test_invalid_arguments(self):
        with self.assertRaises(InputError):
            optm_bound(0, 1, 1)
        with self.assertRaises(InputError):
            speed_bound(1, 0, 1)

    def test_report_within_bound(self):
        report = SpeedReport(N=2, p=1, observed_classes=3, bound_value=4, method="enumeration", samples=5)
        self.assertTrue(report.within_bound)
        self.assertEqual(report.to_dict()["bound_value"], "4")
        self.assertIn("within bound", report.table())
        self.assertFalse(SpeedReport(2, 1, 5, 4, "sampling", 5).within_bound)


class TestCountClasses(unittest.TestCase):
    """Class counts for the unit interval filtered by x."""

    @classmethod
    def setUpClass(cls):
        manifest = Manifest.load(os.path.join(MANIFESTS, 'interval.json'))
        cls.module = build(manifest.to_input())

    def test_pairs_in_the_unit_box(self):
        """Inside [0, 1] every point carries k; only the order of the two points matters."""
        report = count_classes(self.module, 2, box=(0, 1))
        self.assertEqual(report.observed_classes, 2)
        self.assertTrue(report.within_bound)
        self.assertEqual(len(report.witnesses), 2)

    def test_triples_in_the_unit_box(self):
        report = count_classes(self.module, 3, box=(0, 1))
        self.assertEqual(report.observed_classes, 6)
        self.assertTrue(report.within_bound)

    def test_sampling(self):
        report = count_classes(self.module, 2, strategy="sample", samples=10, seed=7)
        self.assertEqual(report.method, "sampling")
        self.assertEqual(report.samples, 10)
        self.assertGreaterEqual(report.observed_classes, 1)
        self.assertTrue(report.within_bound)

    def test_sampling_is_seeded(self):
        first = count_classes(self.module, 2, strategy="sample", samples=6, seed=3)
        second = count_classes(self.module, 2, strategy="sample", samples=6, seed=3)
        self.assertEqual(first.witnesses, second.witnesses)

    def test_unbounded_enumeration_sees_negative_parameters(self):
        """Without a box, pairs with negative coordinates add the zero and partial classes."""
        report = count_classes(self.module, 2)
        self.assertIsNone(report.box)
        self.assertGreater(report.observed_classes, 2)
        self.assertTrue(report.within_bound)

    def test_sampling_never_exceeds_enumeration(self):
        for box in ((0, 1), (-2, 2)):
            exact = count_classes(self.module, 2, box=box).observed_classes
            for seed in range(3):
                sampled = count_classes(self.module, 2, strategy="sample", samples=15, seed=seed, box=box)
                self.assertLessEqual(sampled.observed_classes, exact, f"box {box}, seed {seed}")

    def test_exact_cap(self):
        with self.assertRaises(CapsExceededError):
            count_classes(self.module, 5)

    def test_unknown_strategy(self):
        with self.assertRaises(InputError):
            count_classes(self.module, 2, strategy="guess")

    def test_empty_box(self):
        with self.assertRaises(InputError):
            count_classes(self.module, 2, box=(1, 0))


def random_poly(rng, variables, degree, monic_in_last=False):
    """Random integer polynomial of total degree <= ``degree`` (coefficients in [-3, 3])."""
    expr = 0
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            if monic_in_last and (i, j) == (0, degree):
                continue
            term = variables[0] ** i * (variables[1] ** j if len(variables) > 1 else (1 if j == 0 else 0))
            expr += int(rng.integers(-3, 4)) * term
    if monic_in_last:
        expr += variables[-1] ** degree
    return Poly(expr, *variables, domain=QQ)


class TestComponentBoundRandomized(unittest.TestCase):
    """Enumerated sign-condition components never exceed optm_bound."""

    def check(self, polys, variables):
        polys = [q for q in polys if not q.is_ground]
        if not polys:
            return
        d = max(q.total_degree() for q in polys)
        count = enumerated_components(polys, variables)
        self.assertLessEqual(count, optm_bound(len(polys), d, len(variables)),
                             f"{[q.as_expr() for q in polys]}")

    def test_on_the_line(self):
        rng = np.random.default_rng(21)
        x = Symbol('X')
        for _ in range(12):
            s = int(rng.integers(1, 4))
            self.check([random_poly(rng, (x,), int(rng.integers(1, 4))) for _ in range(s)], (x,))

    def test_in_the_plane(self):
        rng = np.random.default_rng(22)
        variables = (Symbol('X1'), Symbol('X2'))
        for _ in range(4):
            s = int(rng.integers(1, 3))
            self.check([random_poly(rng, variables, int(rng.integers(1, 3)), monic_in_last=True)
                        for _ in range(s)], variables)


class TestSquareClasses(unittest.TestCase):
    """The unit square filtered by both coordinates."""

    def test_weak_classes_of_pairs(self):
        module = build(Manifest.load(os.path.join(MANIFESTS, 'square.json')).to_input())
        report = count_classes(module, 2, box=(0, 1), equivalence="weak")
        self.assertGreaterEqual(report.observed_classes, 2)
        self.assertTrue(report.within_bound)
        self.assertEqual(report.equivalence, "weak")


if __name__ == '__main__':
    unittest.main()
