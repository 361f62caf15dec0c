"""
Unit tests for coefficient fields, field matrices, simplicial complexes,
nerves and homology with fixed bases.
"""
import os
import sys
import unittest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from core.complexes import (SimplicialComplex, betti_numbers, boundary_matrix, chain_map, homology,
                            homology_from_cycles, induced_map, nerve, nerve_chain_map, skeleton)
from core.errors import InputError
from core.fields import Field, FieldMatrix

HOLLOW = SimplicialComplex([(0, 1), (1, 2), (0, 2)])
FILLED = SimplicialComplex([(0, 1, 2)])


class TestField(unittest.TestCase):
    """Tests for GF(p) and the rationals."""

    def test_gf3_arithmetic(self):
        fld = Field("gf3")
        self.assertEqual(fld("1/2"), fld(2))
        self.assertEqual(fld.div(fld(1), fld(2)), fld(2))
        self.assertEqual(len(fld.elements()), 3)

    def test_rationals(self):
        fld = Field("qq")
        self.assertFalse(fld.is_finite)
        self.assertEqual(fld.to_str(fld("3/4")), "3/4")

    def test_rejects_non_prime(self):
        with self.assertRaises(InputError):
            Field("gf4")
        with self.assertRaises(InputError):
            Field("reals")


class TestFieldMatrix(unittest.TestCase):
    """Tests for the small dense matrices."""

    def test_inverse(self):
        fld = Field("gf5")
        m = FieldMatrix.from_rows(fld, [[1, 2], [3, 4]])
        self.assertTrue((m @ m.inverse()).is_identity())

    def test_singular(self):
        fld = Field("gf2")
        m = FieldMatrix.from_rows(fld, [[1, 1], [1, 1]])
        self.assertEqual(m.rank(), 1)
        with self.assertRaises(ValueError):
            m.inverse()

    def test_pad_keeps_block_in_leading_corner(self):
        fld = Field("qq")
        m = FieldMatrix.from_rows(fld, [[1, 2]])
        padded = m.pad(3)
        self.assertEqual(padded.rows, 3)
        self.assertEqual(padded.entries[0][:2], m.entries[0])
        self.assertEqual(padded.unpad(1, 2), m)
        self.assertEqual(padded.rank(), 1)


class TestSimplicialComplex(unittest.TestCase):
    """Tests for complexes, skeleta and nerves."""

    def test_closure_and_facets(self):
        self.assertEqual(len(FILLED), 7)
        self.assertEqual(FILLED.facets(), [(0, 1, 2)])
        self.assertEqual(HOLLOW.facets(), [(0, 1), (0, 2), (1, 2)])
        self.assertEqual(FILLED.euler_characteristic(), 1)
        self.assertEqual(HOLLOW.euler_characteristic(), 0)

    def test_skeleton(self):
        self.assertEqual(skeleton(FILLED, 1), HOLLOW)
        self.assertTrue(HOLLOW.is_subcomplex_of(FILLED))

    def test_nerve_of_hollow_triangle(self):
        """Three edges pairwise meet but share no common vertex: the nerve is a circle."""
        delta = nerve(HOLLOW.facets())
        self.assertEqual(delta, HOLLOW)

    def test_nerve_max_dim(self):
        delta = nerve([(0,), (0,), (0,), (0,)], max_dim=2)
        self.assertEqual(delta.dim, 2)

    def test_boundary_squares_to_zero(self):
        fld = Field("gf3")
        d1 = boundary_matrix(FILLED, 1, fld)
        d2 = boundary_matrix(FILLED, 2, fld)
        product = d1 @ d2
        self.assertTrue(all(not v for row in product.entries for v in row))


class TestHomology(unittest.TestCase):
    """Tests for Betti numbers, bases and induced maps."""

    def test_betti(self):
        for name in ("gf2", "gf3", "qq"):
            fld = Field(name)
            self.assertEqual(betti_numbers(HOLLOW, fld), [1, 1])
            self.assertEqual(betti_numbers(FILLED, fld), [1, 0, 0])

    def test_two_components(self):
        fld = Field("gf2")
        two = SimplicialComplex([(0, 1), (2,)])
        self.assertEqual(homology(two, 0, fld).rank, 2)

    def test_coordinates_of_homologous_cycles(self):
        """Vertices of a connected complex all have coordinate 1 in the H0 basis."""
        fld = Field("qq")
        basis = homology(HOLLOW, 0, fld)
        for v in range(3):
            self.assertEqual(basis.coordinates({(v,): fld.one}), [fld.one])

    def test_dependent_cycles_rejected(self):
        fld = Field("gf2")
        with self.assertRaises(ValueError):
            homology_from_cycles(HOLLOW, 0, [{(0,): fld.one}, {(1,): fld.one}], fld)

    def test_induced_map_of_inclusion(self):
        fld = Field("gf2")
        sub = SimplicialComplex([(0,), (2,)])
        self.assertEqual(induced_map(sub, HOLLOW, 0, fld).rank(), 1)
        self.assertEqual(induced_map(HOLLOW, FILLED, 1, fld).rank(), 0)

    def test_chain_map_orientation(self):
        """Swapping two vertices reverses an edge."""
        fld = Field("qq")
        image = chain_map({0: 1, 1: 0}, {(0, 1): fld.one}, fld)
        self.assertEqual(image, {(0, 1): -fld.one})

    def test_nerve_cycle_carried_back(self):
        """The nerve's 1-cycle maps to a cycle generating H1 of the covered complex."""
        fld = Field("gf3")
        cover = HOLLOW.facets()
        delta = skeleton(nerve(cover, max_dim=2), 2)
        basis = homology(delta, 1, fld)
        self.assertEqual(basis.rank, 1)
        carried = [nerve_chain_map(cover, z, fld) for z in basis.cycles]
        image = homology_from_cycles(HOLLOW, 1, carried, fld)
        self.assertEqual(image.rank, 1)


if __name__ == '__main__':
    unittest.main()
