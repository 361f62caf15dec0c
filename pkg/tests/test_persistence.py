"""
Unit tests for the constructible persistence module: dimensions per
parameter cell, inclusion maps, restriction to finite posets, the
complexity witness and the JSON round trip.
"""
import os
import sys
import unittest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

import numpy as np
from sympy import Rational

from core.errors import CapsExceededError, InputError
from core.manifest import Manifest
from core.persistence import ConstructibleModule, build, direct_betti, direct_map_rank, restrict
from core.posetmod import check_functor

MANIFESTS = os.path.join(os.path.dirname(__file__), '..', 'manifests')


def load_input(name, **settings):
    return Manifest.load(os.path.join(MANIFESTS, name)).to_input(settings)


class TestInterval(unittest.TestCase):
    """S = [0, 1] filtered by f(x) = x."""

    @classmethod
    def setUpClass(cls):
        cls.input = load_input('interval.json')
        cls.module = build(cls.input)

    def test_dims(self):
        self.assertEqual(self.module.dims_at([-1]), (0,))
        self.assertEqual(self.module.dims_at([0]), (1,))
        self.assertEqual(self.module.dims_at([Rational(1, 2)]), (1,))
        self.assertEqual(self.module.dims_at([5]), (1,))

    def test_padding_dimension(self):
        self.assertEqual(self.module.K, 1)

    def test_rank(self):
        self.assertEqual(self.module.rank_invariant([0], [1], 0), 1)
        self.assertEqual(self.module.rank_invariant([-2], [1], 0), 0)

    def test_identity_on_the_diagonal(self):
        matrix = self.module.matrices([Rational(1, 3)], [Rational(1, 3)])[0]
        self.assertTrue(matrix.is_identity())

    def test_incomparable_pair(self):
        with self.assertRaises(InputError):
            self.module.matrices([1], [0])

    def test_locate_returns_cell_ids(self):
        self.assertEqual(self.module.locate([Rational(1, 4)]), self.module.locate([Rational(3, 4)]))
        self.assertNotEqual(self.module.locate([-1]), self.module.locate([1]))

    def test_restriction_is_a_chain(self):
        """Three increasing points give the chain 0 -> k -> k."""
        poset_module = restrict(self.module, [[-1], [0], [Rational(1, 2)]])
        self.assertEqual(poset_module.dims, ((0, 1, 1),))
        self.assertTrue(poset_module.poset.leq(0, 2))
        self.assertEqual(poset_module.matrix(0, 1, 2).rank(), 1)

    def test_restriction_with_ties(self):
        """Repeated points are ordered by position and linked by the identity."""
        poset_module = restrict(self.module, [[Rational(1, 2)], [Rational(1, 2)]])
        self.assertEqual(poset_module.poset.strict_pairs(), [(0, 1)])
        self.assertTrue(poset_module.matrix(0, 0, 1).is_identity())

    def test_restriction_needs_points(self):
        with self.assertRaises(InputError):
            restrict(self.module, [])

    def test_restriction_checks_dimension(self):
        with self.assertRaises(InputError):
            restrict(self.module, [[0, 1]])

    def test_round_trip(self):
        """A serialised module rebuilds to an equal module."""
        restored = ConstructibleModule.from_dict(self.module.to_dict())
        self.assertEqual(restored, self.module)
        self.assertEqual(restored.rank_invariant([0], [1], 0), 1)

    def test_document_shape(self):
        data = self.module.to_dict()
        self.assertEqual(data["K"], 1)
        self.assertEqual(data["field"], "gf2")
        self.assertEqual(data["complexity_witness"], data["pipeline_witness"])
        self.assertTrue(all(sum(c["dims"]) in (0, 1) for c in data["c_cells"]))


class TestTwoPoints(unittest.TestCase):
    """S = {0, 1} filtered by f(x) = x."""

    @classmethod
    def setUpClass(cls):
        cls.input = load_input('two_points.json')
        cls.module = build(cls.input)

    def test_dims(self):
        self.assertEqual(self.module.dims_at([-1]), (0,))
        self.assertEqual(self.module.dims_at([Rational(1, 2)]), (1,))
        self.assertEqual(self.module.dims_at([1]), (2,))
        self.assertEqual(self.module.K, 2)

    def test_map_ranks_match_direct_computation(self):
        for a, b in [([Rational(1, 2)], [2]), ([0], [Rational(1, 2)]), ([1], [3])]:
            expected = direct_map_rank(self.input, a, b, 0)
            self.assertEqual(self.module.rank_invariant(a, b, 0), expected)
        self.assertEqual(self.module.rank_invariant([Rational(1, 2)], [2], 0), 1)
        self.assertEqual(self.module.rank_invariant([1], [3], 0), 2)

    def test_dims_match_direct_betti(self):
        for y in ([0], [Rational(1, 2)], [1], [2]):
            expected = direct_betti(self.input, y)
            self.assertEqual(list(self.module.dims_at(y)), expected)

    def test_restriction_functor_laws(self):
        poset_module = restrict(self.module, [[Rational(1, 2)], [Rational(3, 4)], [2]])
        self.assertEqual(poset_module.dims, ((1, 1, 2),))
        composed = poset_module.matrix(0, 1, 2) @ poset_module.matrix(0, 0, 1)
        self.assertEqual(composed, poset_module.matrix(0, 0, 2))


class TestGraphInput(unittest.TestCase):
    """f given by its graph Z = X^2 over S = [0, 1]."""

    def test_dims(self):
        module = build(load_input('interval_graph.json'))
        self.assertEqual(module.dims_at([-1]), (0,))
        self.assertEqual(module.dims_at([Rational(1, 4)]), (1,))


class TestDisk(unittest.TestCase):
    """The closed unit disk filtered by both coordinates."""

    @classmethod
    def setUpClass(cls):
        cls.input = load_input('disk.json')
        cls.module = build(cls.input)

    def test_dims(self):
        self.assertEqual(self.module.dims_at([0, 0]), (1,))
        self.assertEqual(self.module.dims_at([Rational(-9, 10), Rational(-9, 10)]), (0,))
        self.assertEqual(self.module.dims_at([Rational(1, 2), Rational(-19, 20)]), (1,))

    def test_map_between_quadrants(self):
        self.assertEqual(self.module.rank_invariant([0, 0], [1, 1], 0), 1)

    def test_pipeline_witness_is_recorded(self):
        self.assertGreater(self.module.pipeline_witness, 0)
        self.assertEqual(self.module.witness, self.module.pipeline_witness)


class TestAnnulus(unittest.TestCase):
    """1 <= |x| <= 2, with H1 tracked."""

    @classmethod
    def setUpClass(cls):
        cls.module = build(load_input('annulus.json'))

    def test_dims(self):
        self.assertEqual(self.module.dims_at([3, 3]), (1, 1))
        self.assertEqual(self.module.dims_at([Rational(-3, 2), 3]), (1, 0))

    def test_loop_appears_late(self):
        self.assertEqual(self.module.rank_invariant([Rational(-3, 2), 3], [3, 3], 1), 0)
        self.assertEqual(self.module.rank_invariant([Rational(-3, 2), 3], [3, 3], 0), 1)


class TestWitnessOverride(unittest.TestCase):
    """A hand-supplied D family replaces the reported witness only."""

    def test_override(self):
        inp = load_input('disk_override.json')
        module = build(inp)
        self.assertEqual(module.witness, 16)
        self.assertNotEqual(module.pipeline_witness, 0)
        self.assertEqual(module.dims_at([0, 0]), (1,))


class TestCaps(unittest.TestCase):
    """Inputs beyond the supported sizes are refused before any work."""

    def test_ell_cap(self):
        inp = load_input('interval.json', ell=5)
        with self.assertRaises(CapsExceededError):
            build(inp, caps={"max_ell": 1})


def random_rationals(rng, count, lo, hi, denominator=8):
    """``count`` rationals k/denominator drawn uniformly from [lo, hi]."""
    ks = rng.integers(int(lo * denominator), int(hi * denominator) + 1, size=count)
    return [Rational(int(k), denominator) for k in ks]


def random_points(rng, count, boxes, denominator=8):
    """Distinct points whose i-th coordinate lies in ``boxes[i]``."""
    points = []
    while len(points) < count:
        point = [random_rationals(rng, 1, lo, hi, denominator)[0] for lo, hi in boxes]
        if point not in points:
            points.append(point)
    return points


def precedes(a, b):
    return all(x <= y for x, y in zip(a, b))


def in_disk_region(y1, y2):
    """Some point of the closed unit disk lies coordinatewise below (y1, y2)."""
    if y1 < -1 or y2 < -1:
        return False
    return y1 >= 0 or y2 >= 0 or y1 ** 2 + y2 ** 2 <= 1


class TestDiskRandomized(unittest.TestCase):
    """Seeded random parameters against the closed-form support of the disk module."""

    @classmethod
    def setUpClass(cls):
        cls.module = build(load_input('disk.json'))
        cls.rng = np.random.default_rng(11)

    def test_dims_follow_the_support(self):
        for y1, y2 in random_points(self.rng, 40, [(-1.5, 1.5), (-1.5, 1.5)]):
            expected = 1 if in_disk_region(y1, y2) else 0
            self.assertEqual(self.module.dims_at([y1, y2]), (expected,), f"y = ({y1}, {y2})")

    def test_maps_are_isomorphisms_on_the_support(self):
        starts = random_points(self.rng, 8, [(-1.5, 1), (-1.5, 1)])
        steps = random_points(self.rng, 8, [(0, 1), (0, 1)])
        for a, step in zip(starts, steps):
            b = [a[0] + step[0], a[1] + step[1]]
            expected = 1 if in_disk_region(*a) else 0
            self.assertEqual(self.module.rank_invariant(a, b, 0), expected, f"{a} -> {b}")


class TestAgainstDirectTriangulation(unittest.TestCase):
    """Dims and ranks agree with triangulating S_{f<=y} on its own."""

    def test_square(self):
        inp = load_input('square.json')
        module = build(inp)
        rng = np.random.default_rng(5)
        for y in random_points(rng, 8, [(0, 1.5), (0, 1.5)]):
            self.assertEqual(list(module.dims_at(y)), direct_betti(inp, y), f"y = {y}")
        self.assertEqual(module.dims_at([-1, Rational(1, 2)]), (0,))

    def test_annulus(self):
        inp = load_input('annulus.json')
        module = build(inp)
        rng = np.random.default_rng(6)
        for y in random_points(rng, 6, [(0, 2.5), (-2, 2.5)]):
            self.assertEqual(list(module.dims_at(y)), direct_betti(inp, y), f"y = {y}")

    def test_two_point_ranks(self):
        inp = load_input('two_points.json')
        module = build(inp)
        rng = np.random.default_rng(7)
        for a, step in zip(random_rationals(rng, 10, 0, 2), random_rationals(rng, 10, 0, 2)):
            b = a + step
            self.assertEqual(module.rank_invariant([a], [b], 0), direct_map_rank(inp, [a], [b], 0),
                             f"{a} -> {b}")


class TestRestrictionLaws(unittest.TestCase):
    """restrict(M, T) over seeded random tuples T."""

    @classmethod
    def setUpClass(cls):
        cls.modules = {name: build(load_input(name)) for name in ('interval.json', 'two_points.json')}

    def check_tuple(self, module, points):
        poset_module = restrict(module, points)
        self.assertEqual(check_functor(poset_module), [])
        for j, t in enumerate(points):
            self.assertEqual(poset_module.dims[0][j], module.dims_at(t)[0])
        for a in range(len(points)):
            for b in range(len(points)):
                if a == b:
                    continue
                self.assertEqual(poset_module.poset.leq(a, b), precedes(points[a], points[b]))
                if precedes(points[a], points[b]):
                    self.assertEqual(poset_module.matrix(0, a, b), module.matrices(points[a], points[b])[0])
        return poset_module

    def test_one_parameter_tuples(self):
        rng = np.random.default_rng(13)
        for module in self.modules.values():
            for _ in range(5):
                points = random_points(rng, 4, [(-1, 2)])
                whole = self.check_tuple(module, points)
                part = restrict(module, points[:2])
                self.assertEqual(part.dims[0], whole.dims[0][:2])
                if precedes(points[0], points[1]):
                    self.assertEqual(part.matrix(0, 0, 1), whole.matrix(0, 0, 1))

    def test_two_parameter_tuples(self):
        module = build(load_input('disk.json'))
        rng = np.random.default_rng(17)
        for _ in range(2):
            self.check_tuple(module, random_points(rng, 3, [(-1, 1), (-1, 1)]))


if __name__ == '__main__':
    unittest.main()
