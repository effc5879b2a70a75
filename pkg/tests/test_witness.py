"""
Unit tests for witness.py

Tests witness-set plumbing including:
- Charts and point comparison
- Linear, flag and Segre slices
- Moving a witness set between slices
- Collections and multidegrees
"""

import unittest

import numpy as np

from example_systems import P1_P1, P2_P2, binomials, parabola, parabola_move
from exceptions import ChartCrossing, DimensionMismatch, MalformedChart, PointCountChanged, StructuralError
from models import TrackerSettings
from rng import make_rng
from witness import (Chart, LinearSlice, SegreSlice, SliceFlag, WitnessCollection, WitnessSet,
                     ambient_witness_point, check_slice_type, cluster_points, format_multidegree, move_slice,
                     multidegree, point_equal, product_polynomial, random_slice, segre_slice_from, slice_through_point,
                     sort_key)


class TestChart(unittest.TestCase):
    """Test cases for Chart."""

    def setUp(self):
        self.chart = Chart(P1_P1, [[1, 0], [0, 1]])

    def test_normalize(self):
        np.testing.assert_allclose(self.chart.normalize([2, 4, 3j, 3j]), [1, 2, 1, 1])

    def test_crossing(self):
        """A point with H_i = 0 cannot be normalized."""
        with self.assertRaises(ChartCrossing):
            self.chart.normalize([0, 1, 1, 1])

    def test_malformed(self):
        with self.assertRaises(MalformedChart):
            Chart(P1_P1, [[0, 0], [0, 1]])
        with self.assertRaises(MalformedChart):
            Chart(P1_P1, [[1, 0]])

    def test_product_polynomial(self):
        H = self.chart.product_polynomial()
        self.assertAlmostEqual(H.evaluate([2, 5, 7, 3]), 6)


class TestPointComparison(unittest.TestCase):
    """Test cases for point_equal, cluster_points and sort_key."""

    def setUp(self):
        self.chart = Chart(P1_P1, [[1, 0], [0, 1]])

    def test_projective_rescaling(self):
        """Scaling one group does not change the point."""
        self.assertTrue(point_equal([1, 2, 3, 1], [2j, 4j, -6, -2], self.chart))
        self.assertFalse(point_equal([1, 2, 3, 1], [1, 2.01, 3, 1], self.chart))

    def test_points_at_infinity(self):
        """Points on H_i = 0 compare by their largest coordinate."""
        self.assertTrue(point_equal([0, 1, 1, 1], [0, 5, 2, 2], self.chart))
        self.assertFalse(point_equal([0, 1, 1, 1], [1, 1, 1, 1], self.chart))

    def test_absolute_tolerance(self):
        """The chart coordinates are compared in the infinity norm, not relative to their size."""
        self.assertFalse(point_equal([1, 1000, 1, 1], [1, 1000 + 1e-4, 1, 1], self.chart))
        self.assertTrue(point_equal([1, 1000, 1, 1], [1, 1000 + 1e-8, 1, 1], self.chart))
        self.assertFalse(point_equal([1, 0, 1, 1], [1, 2e-6, 1, 1], self.chart))

    def test_length_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            point_equal([1, 2, 3, 1], [1, 2, 3], self.chart)

    def test_clusters(self):
        points = [np.array(p, dtype=complex) for p in ([1, 2, 1, 1], [1, 3, 1, 1], [2, 4, 1, 1])]
        clusters = cluster_points(points, self.chart)
        self.assertEqual([members for _, members in clusters], [[0, 2], [1]])

    def test_sort_key(self):
        self.assertLess(sort_key(np.array([1, -1, 1, 1]), self.chart),
                        sort_key(np.array([1, 1, 1, 1]), self.chart))


class TestSlices(unittest.TestCase):
    """Test cases for slices, flags and Segre forms."""

    def setUp(self):
        self.rng = make_rng(3)

    def test_slice_type_bounds(self):
        self.assertEqual(check_slice_type([1, 2], P2_P2), (1, 2))
        with self.assertRaises(StructuralError):
            check_slice_type([3, 0], P2_P2)
        with self.assertRaises(DimensionMismatch):
            check_slice_type([1], P2_P2)

    def test_random_slice_type(self):
        L = random_slice((2, 1), P2_P2, self.rng)
        self.assertEqual(L.type, (2, 1))
        self.assertEqual(L.matrix().shape, (3, 6))
        self.assertEqual(len(L.polynomials()), 3)

    def test_slice_through_point(self):
        """Every form of the slice vanishes at its point."""
        alpha = np.array([1, 0, 0, 1, 0, 3], dtype=complex)
        L = slice_through_point((1, 1), alpha, P2_P2, self.rng)
        np.testing.assert_allclose(L.evaluate(alpha), 0, atol=1e-12)

    def test_slice_through_zero_block(self):
        with self.assertRaises(StructuralError):
            slice_through_point((1, 0), np.array([0, 0, 0, 1, 0, 0]), P2_P2, self.rng)

    def test_flag_slices_are_nested(self):
        """L^d is the first d_i forms of each block; completing forms come next."""
        flag = SliceFlag.random(P2_P2, self.rng)
        small = flag.slice_for((1, 0))
        large = flag.slice_for((2, 1))
        np.testing.assert_array_equal(small.forms[0], large.forms[0][:1])
        np.testing.assert_array_equal(flag.completing_form((1, 0), 0), large.forms[0][1])

    def test_ambient_witness_point(self):
        """The full flag meets each group in one point, normalized on the chart."""
        flag = SliceFlag.random(P2_P2, self.rng)
        chart = Chart.random(P2_P2, self.rng)
        point = ambient_witness_point(flag, chart)
        full = flag.slice_for((2, 2))
        np.testing.assert_allclose(full.evaluate(point), 0, atol=1e-10)
        np.testing.assert_allclose(chart.values(point), [1, 1], atol=1e-10)

    def test_segre_product(self):
        segre = segre_slice_from(P1_P1, [[1, 2], [3, -1]])
        R = product_polynomial(segre)
        point = [1j, 2, 0.5, 4]
        self.assertAlmostEqual(R.evaluate(point), segre.value(point))

    def test_segre_needs_nonzero_factors(self):
        with self.assertRaises(StructuralError):
            SegreSlice(P1_P1, [[0, 0], [1, 1]])


class TestMoveSlice(unittest.TestCase):
    """Test cases for move_slice."""

    def setUp(self):
        self.example = parabola_move()
        self.W = WitnessSet(self.example.system, self.example.start, self.example.chart,
                            self.example.start_points)

    def test_move(self):
        """y0 = 5 y1 moved to 2 y0 = y1."""
        moved = move_slice(self.W, self.example.target, TrackerSettings())
        self.assertEqual(moved.slice, self.example.target)
        for point, expected in zip(moved.points, self.example.end_points):
            self.assertTrue(point_equal(point, expected, self.example.chart))

    def test_there_and_back(self):
        """Moving to a random slice and back recovers every point in order."""
        settings = TrackerSettings()
        for seed in (4, 5, 6):
            with self.subTest(seed=seed):
                away = move_slice(self.W, random_slice((0, 1), P1_P1, make_rng(seed)), settings)
                back = move_slice(away, self.example.start, settings)
                self.assertEqual(back.slice, self.example.start)
                for point, original in zip(back.points, self.W.points):
                    np.testing.assert_allclose(self.W.chart.normalize(point), self.W.chart.normalize(original),
                                               atol=1e-8)

    def test_same_slice_is_copy(self):
        moved = move_slice(self.W, self.example.start, TrackerSettings())
        for a, b in zip(moved.points, self.W.points):
            np.testing.assert_array_equal(a, b)

    def test_wrong_type(self):
        other = LinearSlice(P1_P1, [[[1, 1]], np.zeros((0, 2))])
        with self.assertRaises(StructuralError):
            move_slice(self.W, other, TrackerSettings())

    def test_collision_reported(self):
        """Moving onto y0 = 0 (where x1^2*y0 = x0^2*y1 forces x0 = 0) merges both points."""
        degenerate = LinearSlice(P1_P1, [np.zeros((0, 2)), [[1, 0]]])
        chart = Chart(P1_P1, [[1, 1j], [1, 1]])
        starts = [chart.normalize(p) for p in self.example.start_points]
        W = WitnessSet(self.example.system, self.example.start, chart, starts)
        with self.assertRaises(PointCountChanged):
            move_slice(W, degenerate, TrackerSettings())


class TestCollections(unittest.TestCase):
    """Test cases for WitnessCollection and multidegrees."""

    def setUp(self):
        self.system = parabola()
        self.chart = Chart(P1_P1, [[1, 0], [0, 1]])
        self.collection = WitnessCollection(self.system, self.chart, 1)
        self.collection.add(WitnessSet(self.system, LinearSlice(P1_P1, [np.zeros((0, 2)), [[1, -5]]]),
                                       self.chart, parabola_move().start_points))
        self.collection.add(WitnessSet(self.system, LinearSlice(P1_P1, [[[1, -3]], np.zeros((0, 2))]),
                                       self.chart, [np.array([1, 1 / 3, 9, 1], dtype=complex)]))

    def test_types_descending(self):
        self.assertEqual(self.collection.types(), [(1, 0), (0, 1)])
        self.assertEqual([W.type for W in self.collection], [(1, 0), (0, 1)])

    def test_multidegree(self):
        self.assertEqual(format_multidegree(multidegree(self.collection)), "1 w^(1,0) + 2 w^(0,1)")
        self.assertEqual(format_multidegree([]), "0")

    def test_dimensions(self):
        self.assertEqual(self.collection.dimensions(), [1])
        self.assertEqual(len(self.collection.pure_part(0)), 0)
        self.assertEqual(self.collection.total_points(), 3)

    def test_duplicate_type(self):
        with self.assertRaises(StructuralError):
            self.collection.add(self.collection.sets[(1, 0)])

    def test_codim_and_square_system(self):
        W = self.collection.sets[(0, 1)]
        self.assertEqual(W.dimension, 1)
        self.assertEqual(W.codim, 1)
        self.assertIs(W.square_system(), self.system)

    def test_overdetermined_square_system(self):
        """Extra equations are randomized down to the codimension."""
        system, chart = binomials()
        W = WitnessSet(system, random_slice((1, 1), P2_P2, make_rng(2)), chart, seed=9)
        squared = W.square_system()
        self.assertEqual(len(squared), 2)
        self.assertEqual(squared, W.square_system())

    def test_multiplicity_count_checked(self):
        with self.assertRaises(StructuralError):
            WitnessSet(self.system, LinearSlice(P1_P1, [[[1, -3]], np.zeros((0, 2))]), self.chart,
                       [np.array([1, 3, 1, 9])], [1, 2])


if __name__ == "__main__":
    unittest.main()
