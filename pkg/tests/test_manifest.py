"""
Unit tests for manifests, JSON codecs for exact values and the file helpers.
"""
import json
import os
import sys
import tempfile
import unittest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from sympy import Poly, QQ, Rational, Symbol

from core.algebra import RationalPoint, RurPoint, T, isolate_real_roots, make_point
from core.errors import InputError
from core.manifest import Manifest
from utils.file_manager import FileManager
from utils.serialization import (dumps, point_from_json, point_to_json, points_from_json, rational_from_str,
                                 rational_to_str)

MANIFESTS = os.path.join(os.path.dirname(__file__), '..', 'manifests')


class TestManifest(unittest.TestCase):
    """Tests for loading and validating manifests."""

    def test_filtration(self):
        manifest = Manifest.load(os.path.join(MANIFESTS, 'annulus.json'))
        self.assertTrue(manifest.is_filtration)
        self.assertEqual(manifest.ell, 1)
        inp = manifest.to_input()
        self.assertEqual(inp.n, 2)
        self.assertEqual(inp.p, 2)
        self.assertEqual(inp.ell, 1)
        self.assertIn("R^2", manifest.summary())

    def test_named_atoms(self):
        """The square's four sides resolve to declared polynomials."""
        inp = Manifest.load(os.path.join(MANIFESTS, 'square.json')).to_input()
        self.assertEqual(len(inp.s_formula.polys()), 4)
        self.assertEqual(inp.s_formula.to_dict()['and'][0]['atom'], 'left')

    def test_settings_override_manifest(self):
        manifest = Manifest.load(os.path.join(MANIFESTS, 'annulus.json'))
        inp = manifest.to_input({'ell': 0, 'field': 'gf3'})
        self.assertEqual(inp.ell, 0)
        self.assertEqual(inp.field.name, 'gf3')

    def test_graph_manifest(self):
        inp = Manifest.load(os.path.join(MANIFESTS, 'interval_graph.json')).to_input()
        self.assertIsNone(inp.f)
        self.assertEqual([v.name for v in inp.fiber_variables], ['X', 'Z'])

    def test_family(self):
        manifest = Manifest.load(os.path.join(MANIFESTS, 'circle_family.json'))
        self.assertFalse(manifest.is_filtration)
        self.assertEqual(len(manifest.family()), 1)
        with self.assertRaises(InputError):
            manifest.to_input()

    def test_input_dict_round_trip(self):
        inp = Manifest.load(os.path.join(MANIFESTS, 'disk_override.json')).to_input()
        data = inp.to_dict()
        self.assertEqual(len(data['d_override']), 8)
        again = type(inp).from_dict(data)
        self.assertEqual(again.to_dict(), data)

    def test_rejections(self):
        cases = [
            {'params': ['Y']},
            {'variables': ['X', 'X'], 'polynomials': ['X']},
            {'variables': ['Y'], 'params': ['Y_p'], 'S': {}, 'f': ['Y']},
            {'variables': ['X'], 'params': ['Y'], 'S': {'atom': 'a', 'poly': 'X'}},
            {'variables': ['X']},
        ]
        for settings in cases:
            with self.assertRaises(InputError):
                Manifest('bad.json', settings).validate()

    def test_not_an_object(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'list.json')
            with open(path, 'w') as fh:
                json.dump([1, 2], fh)
            with self.assertRaises(InputError):
                Manifest.load(path)


class TestSerialization(unittest.TestCase):
    """Tests for exact JSON codecs."""

    def test_rationals(self):
        self.assertEqual(rational_to_str(Rational(-3, 4)), "-3/4")
        self.assertEqual(rational_to_str(2), "2")
        self.assertEqual(rational_from_str("6/8"), Rational(3, 4))
        with self.assertRaises(InputError):
            rational_from_str("three")

    def test_rational_point(self):
        point = RationalPoint((Rational(1, 2), Rational(0)))
        self.assertEqual(point_to_json(point), {"rational": ["1/2", "0"]})
        self.assertEqual(point_from_json(["1/2", "0"]), point)

    def test_rur_point(self):
        """The positive square root of 2 keeps its Thom encoding through JSON."""
        poly = Poly(T ** 2 - 2, T, domain=QQ)
        point = make_point([Poly(T, T, domain=QQ)], isolate_real_roots(poly)[1])
        data = point_to_json(point)
        self.assertEqual(data["rur"]["f"], "t^2 - 2")
        restored = point_from_json(data)
        self.assertIsInstance(restored, RurPoint)
        a = Symbol("A")
        self.assertEqual(restored.sign(Poly(a ** 2 - 2, a, domain=QQ)), 0)
        self.assertEqual(restored.sign(Poly(a - 1, a, domain=QQ)), 1)

    def test_points_document(self):
        self.assertEqual(len(points_from_json({"points": [["1"], ["2"]]})), 2)
        with self.assertRaises(InputError):
            points_from_json({"pts": []})
        with self.assertRaises(InputError):
            point_from_json({"other": 1})

    def test_dumps_is_stable(self):
        self.assertEqual(dumps({"b": 1, "a": 2}), '{\n  "a": 2,\n  "b": 1\n}\n')


class TestFileManager(unittest.TestCase):
    """Tests for atomic JSON writes."""

    def test_write_and_read(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'nested', 'doc.json')
            self.assertTrue(FileManager.write_json(path, {"k": [1, 2]}))
            self.assertEqual(FileManager.read_json(path), {"k": [1, 2]})
            self.assertEqual([n for n in os.listdir(os.path.dirname(path)) if n.startswith('.tmp-')], [])

    def test_missing_file(self):
        with self.assertRaises(InputError):
            FileManager.read_json('/nonexistent/doc.json')


if __name__ == '__main__':
    unittest.main()
