"""
Unit tests for poly_core.py

Tests the polynomial layer including:
- Variable structures and multidegrees
- Arithmetic and evaluation
- Homogenization round trips
- Randomization degree balancing
- Bezout counts
"""

import unittest

import numpy as np

from example_systems import P1_P1, binomials, parabola, six_r
from exceptions import DimensionMismatch, NotMultihomogeneous, StructuralError
from poly_core import (Polynomial, PolynomialSystem, VariableStructure, bezout_number, dehomogenize,
                       homogenize, is_multihomogeneous, multidegree_of, randomize, slice_types, square_randomize,
                       square_up, substitute, total_degree)
from rng import make_rng
from witness import Chart


class TestVariableStructure(unittest.TestCase):
    """Test cases for VariableStructure."""

    def test_dimensions(self):
        """Groups of sizes 3 and 2 give P2 x P1."""
        structure = VariableStructure((("x0", "x1", "x2"), ("y0", "y1")))
        self.assertEqual(structure.projective_dims, (2, 1))
        self.assertEqual(structure.total, 5)
        self.assertEqual(structure.group_of(3), 1)

    def test_duplicate_names_rejected(self):
        """The same variable may not appear twice."""
        with self.assertRaises(StructuralError):
            VariableStructure((("x", "y"), ("y",)))

    def test_empty_group_rejected(self):
        with self.assertRaises(StructuralError):
            VariableStructure((("x",), ()))


class TestPolynomial(unittest.TestCase):
    """Test cases for Polynomial arithmetic and multidegrees."""

    def setUp(self):
        self.structure = VariableStructure((("x0", "x1"), ("y0", "y1")))
        self.x0, self.x1, self.y0, self.y1 = (Polynomial.variable(self.structure, n)
                                              for n in ("x0", "x1", "y0", "y1"))

    def test_parabola_multidegree(self):
        """x1^2*y0 - x0^2*y1 has multidegree (2,1)."""
        p = parabola()[0]
        self.assertEqual(multidegree_of(p), (2, 1))

    def test_zero_polynomial(self):
        """Cancellation leaves the zero polynomial with multidegree (0,0)."""
        p = self.x0 - self.x0
        self.assertTrue(p.is_zero)
        self.assertEqual(multidegree_of(p), (0, 0))

    def test_not_multihomogeneous(self):
        """Mixed group degrees raise with the offending terms."""
        p = self.x0 * self.y0 + self.x1
        self.assertFalse(is_multihomogeneous(p))
        with self.assertRaises(NotMultihomogeneous):
            multidegree_of(p)

    def test_evaluate(self):
        p = (self.x0 + 2 * self.x1) * self.y1 - 3
        self.assertAlmostEqual(p.evaluate([1, 2, 0, 1j]), 5j - 3)

    def test_power(self):
        p = (self.x0 + self.x1) ** 3
        self.assertEqual(len(p.terms), 4)
        self.assertEqual(p.terms[(2, 1, 0, 0)], 3)

    def test_term_scale(self):
        """term_scale sums the moduli of the terms."""
        p = self.x0 - self.x1
        self.assertAlmostEqual(p.term_scale([1, 1, 0, 0]), 2.0)
        self.assertAlmostEqual(p.evaluate([1, 1, 0, 0]), 0)

    def test_system_jacobian_matches_finite_difference(self):
        system = parabola()
        point = np.array([0.3 + 0.1j, -1.2, 0.7j, 2.0])
        J = system.jacobian(point)
        step = 1e-7
        for j in range(4):
            shifted = point.copy()
            shifted[j] += step
            column = (system.evaluate(shifted) - system.evaluate(point)) / step
            self.assertAlmostEqual(abs(column[0] - J[0, j]), 0, places=5)


class TestHomogenize(unittest.TestCase):
    """Test cases for homogenize and dehomogenize."""

    def test_round_trip(self):
        """Setting the new coordinates to 1 gives back the affine system."""
        structure = VariableStructure((("a", "b", "c"),))
        a, b, c = (Polynomial.variable(structure, n) for n in "abc")
        affine = PolynomialSystem(structure, [a * b - c + 1, a ** 2 + b * c ** 2])
        hom = homogenize(affine, [["a"], ["b", "c"]], ["h0", "h1"])
        self.assertEqual(hom.structure.groups, (("h0", "a"), ("h1", "b", "c")))
        self.assertEqual(hom.multidegrees(), [(1, 1), (2, 3)])
        back = dehomogenize(hom, ["h0", "h1"])
        point = [0.5, -1.5 + 1j, 2.0]
        np.testing.assert_allclose(back.evaluate(point), affine.evaluate(point))

    def test_grouping_must_partition(self):
        structure = VariableStructure((("a", "b"),))
        affine = PolynomialSystem(structure, [Polynomial.variable(structure, "a")])
        with self.assertRaises(StructuralError):
            homogenize(affine, [["a"]])

    def test_substitute(self):
        """x0^2 - x1^2 under x0 -> x0 + 2 x1."""
        structure = VariableStructure((("x0", "x1"),))
        x0, x1 = (Polynomial.variable(structure, n) for n in ("x0", "x1"))
        image = substitute(x0 ** 2 - x1 ** 2, [x0 + 2 * x1, x1], structure)
        self.assertAlmostEqual(image.evaluate([1, 1]), 8)
        self.assertEqual(multidegree_of(image), (2,))
        with self.assertRaises(DimensionMismatch):
            substitute(x0, [x1], structure)


class TestRandomize(unittest.TestCase):
    """Test cases for randomization."""

    def test_binomials_randomize_to_two(self):
        """Four binomials randomized to two equations keep degrees (3,1) and (2,2)."""
        system, chart = binomials()
        squeezed = randomize(system, 2, chart.hyperplanes(), make_rng(3))
        self.assertEqual(squeezed.multidegrees(), [(3, 1), (2, 2)])

    def test_randomized_vanishes_on_solutions(self):
        """A common zero of the inputs stays a zero of the randomization."""
        system, chart = binomials()
        squeezed = randomize(system, 2, chart.hyperplanes(), make_rng(3))
        point = np.array([1, 0, 0, 1, 0, 0], dtype=complex)
        self.assertTrue(system.satisfied_at(point, 1e-12))
        self.assertTrue(squeezed.satisfied_at(point, 1e-12))

    def test_square_up_identity(self):
        system = parabola()
        self.assertIs(square_up(system, 1, [], make_rng(1)), system)

    def test_square_randomize(self):
        """Both outputs are lifted to (2,1) and keep the common zero [1:1] x [1:1]."""
        x0, x1, y0, y1 = (Polynomial.variable(P1_P1, n) for n in P1_P1.variable_names)
        system = parabola().extended([x0 * y1 - x1 * y0])
        chart = Chart(P1_P1, [[1, 0], [0, 1]])
        mixed = square_randomize(system, chart.hyperplanes(), make_rng(4))
        self.assertEqual(len(mixed), 2)
        self.assertEqual(mixed.multidegrees(), [(2, 1), (2, 1)])
        self.assertTrue(mixed.satisfied_at([1, 1, 1, 1], 1e-12))
        self.assertFalse(mixed.satisfied_at([1, 2, 1, 1], 1e-6))

    def test_target_too_large(self):
        system, chart = binomials()
        with self.assertRaises(StructuralError):
            randomize(system, 5, chart.hyperplanes(), make_rng(1))


class TestCounts(unittest.TestCase):
    """Test cases for Bezout numbers and slice types."""

    def test_six_r_bezout_numbers(self):
        """1-, 2- and 4-homogeneous counts of the 6R system."""
        rng = make_rng(11)
        two = six_r(rng, 2)
        four = six_r(make_rng(11), 4)
        one = six_r(make_rng(11), 1)
        self.assertEqual(bezout_number(two.multidegrees(), two.structure), 320)
        self.assertEqual(bezout_number(four.multidegrees(), four.structure), 576)
        self.assertEqual(bezout_number(one.multidegrees(), one.structure), 1024)
        self.assertEqual(total_degree(two.multidegrees()), 1024)

    def test_bezout_needs_square(self):
        structure = VariableStructure((("x0", "x1"),))
        with self.assertRaises(StructuralError):
            bezout_number([(1,), (1,)], structure)

    def test_slice_types_descending(self):
        structure = VariableStructure((("x0", "x1", "x2"), ("y0", "y1", "y2")))
        self.assertEqual(slice_types(structure, 2), [(2, 0), (1, 1), (0, 2)])
        self.assertEqual(len(slice_types(structure)), 9)
        self.assertEqual(slice_types(structure)[0], (2, 2))


if __name__ == "__main__":
    unittest.main()
