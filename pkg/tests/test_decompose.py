"""
Unit tests for decompose.py

Tests membership and decomposition including:
- Membership verdicts and single-slice checks
- Cross-slice links between witness sets of different types
- The trace test on curves with known slice points, and on solved curves
  against the components read off their coordinates
- Union-find bookkeeping and full decompositions
"""

import itertools
import json
import unittest
from pathlib import Path

import numpy as np

import config
from decompose import (GeneralCoordinate, SliceCheck, UnionFind, build_trace_homotopy, check_slice,
                       cross_slice_link, decompose, is_affine_linear, membership_test, monodromy_group,
                       point_traces, sample_points, second_difference, trace_setup, trace_test,
                       trace_values)
from example_systems import (P1_P1, P2_P1, P2_P2, curve_links, four_components, parabola, surface_membership,
                             trace_curves)
from exceptions import StructuralError
from models import TraceSample, TrackerSettings, Verdict
from regeneration import multiregenerate
from rng import make_rng
from witness import (Chart, LinearSlice, WitnessCollection, WitnessSet, move_slice, multidegree,
                     point_equal, slice_through_point)

FIXTURES = Path(__file__).parent / "fixtures"


def _curve_collection():
    """w^(1,0) = {m1} and w^(0,1) = {m2, m3} of the curves of four_components."""
    example = curve_links()
    collection = WitnessCollection(example.system, example.chart, 5)
    collection.add(WitnessSet(example.system, example.slice_10, example.chart, [example.m1], seed=5))
    collection.add(WitnessSet(example.system, example.slice_01, example.chart, [example.m2, example.m3],
                              seed=5))
    return example, collection


def _empty_slice(structure):
    return LinearSlice(structure, [np.zeros((0, size)) for size in structure.group_sizes])


def _subset_samples(values, poisoned, rows):
    """Mean trace of the chosen rows of point_traces output."""
    rows = list(rows)
    mean = values[rows].mean(axis=0)
    bad = bool(poisoned[rows].any())
    return [TraceSample(float(t), complex(v), bad) for t, v in zip(config.TRACE_SAMPLES, mean)]


def _is_union(subset, labels):
    """True iff subset takes every point of each component it touches."""
    touched = {labels[j] for j in subset}
    return all(j in subset for j, label in enumerate(labels) if label in touched)


def _trace_curve_label(point):
    """Component of a trace_curves point, read off its coordinates."""
    x0, _, x2, y0, y1 = point
    if abs(x0) > 1e-9 * abs(x2):
        return "third"
    return "y0 = y1" if abs(y0 - y1) < abs(y0 + y1) else "y0 = -y1"


def _solved_curve_label(point):
    """Curve of four_components through a point of P2 x P2."""
    x0, x1, x2 = point[:3]
    return "x = [0:0:1]" if max(abs(x0), abs(x1)) <= 1e-6 * abs(x2) else "other"


class TestMembership(unittest.TestCase):
    """Test cases for membership_test and check_slice."""

    @classmethod
    def setUpClass(cls):
        cls.settings = TrackerSettings()
        cls.example = surface_membership()
        cls.collection, _ = multiregenerate(cls.example.system, settings=cls.settings, rng=make_rng(21))

    def test_point_on_surface(self):
        """
        ([1:0:0],[1:0:3]) is found by moving a surface witness set through it.

        A (2,0) slice through the point meets the surface in the double point
        ([1:0:0],[1:0:0]) as well, so that type is skipped and (1,1) decides.
        """
        for seed in (22, 5, 9):
            with self.subTest(seed=seed):
                result = membership_test(self.collection, self.example.point, self.settings, make_rng(seed))
                self.assertEqual(result.verdict, Verdict.MEMBER)
                self.assertEqual(result.slice_type, (1, 1))
                self.assertTrue(result.is_member)
                self.assertEqual(result.skipped, [(2, 0)])
                self.assertEqual(result.diagnostics, ["slice type (2, 0): endpoints not isolated"])

    def test_each_slice_type(self):
        """(2,0) cannot decide; (1,1) and (0,2) both reach the point."""
        expected = {(2, 0): SliceCheck.SKIP, (1, 1): SliceCheck.MEMBER, (0, 2): SliceCheck.MEMBER}
        rng = make_rng(25)
        for e, verdict in expected.items():
            with self.subTest(e=e):
                target = slice_through_point(e, self.example.point, P2_P2, rng)
                check, _ = check_slice(self.collection.sets[e], target, self.example.point, self.settings)
                self.assertEqual(check, verdict)

    def test_explicit_slice(self):
        """On the given slices the other endpoint is known in closed form."""
        W = move_slice(self.collection.sets[(1, 1)], self.example.slice, self.settings)
        check, outcomes = check_slice(W, self.example.slice_through_point, self.example.point, self.settings)
        self.assertEqual(check, SliceCheck.MEMBER)
        endpoints = [o.endpoint for o in outcomes if not o.failed]
        self.assertTrue(any(point_equal(q, self.example.other_endpoint, W.chart) for q in endpoints))

    def test_point_off_variety(self):
        result = membership_test(self.collection, np.array([1, 2, 3, 1, 1, 1]), self.settings, make_rng(23))
        self.assertEqual(result.verdict, Verdict.NOT_MEMBER)
        self.assertEqual(result.diagnostics, ["point does not satisfy the system"])

    def test_empty_collection(self):
        """No witness sets to try means the point is not a member."""
        empty = WitnessCollection(self.collection.system, self.collection.chart, 1)
        result = membership_test(empty, self.example.point, self.settings, make_rng(24))
        self.assertEqual(result.verdict, Verdict.NOT_MEMBER)


class TestCrossSlice(unittest.TestCase):
    """Test cases for check_slice and cross_slice_link on two curves."""

    def setUp(self):
        self.settings = TrackerSettings()
        self.example, self.collection = _curve_collection()

    def test_slice_through_m1(self):
        """w^(0,1) moved through m1 ends at m1 and at ([0:0:1],[-1:0:1])."""
        W = self.collection.sets[(0, 1)]
        check, outcomes = check_slice(W, self.example.slice_01_through_m1, self.example.m1, self.settings)
        self.assertEqual(check, SliceCheck.MEMBER)
        endpoints = [o.endpoint for o in outcomes]
        self.assertTrue(any(point_equal(q, self.example.m1, W.chart) for q in endpoints))
        self.assertTrue(any(point_equal(q, self.example.m3_endpoint, W.chart) for q in endpoints))

    def test_links(self):
        """m1 and m2 lie on one curve, m3 on another."""
        report = cross_slice_link(self.collection, self.settings, make_rng(31))
        expected = {(((0, 1), 0), ((1, 0), 0)), (((1, 0), 0), ((0, 1), 0))}
        self.assertEqual(set(report.edges), expected)

    def test_monodromy_single_point(self):
        self.assertEqual(monodromy_group(self.collection.sets[(1, 0)], 3, make_rng(1), self.settings), [])

    def test_sample_points(self):
        W = self.collection.sets[(0, 1)]
        points = sample_points(W, 3, make_rng(32), self.settings)
        self.assertEqual(len(points), 3)
        for point in points:
            self.assertTrue(W.system.satisfied_at(point, 1e-8))

    def test_sample_from_empty(self):
        W = self.collection.sets[(0, 1)].with_points([])
        with self.assertRaises(StructuralError):
            sample_points(W, 1, make_rng(1), self.settings)


class TestTrace(unittest.TestCase):
    """Test cases for the trace test on the curves of trace_curves."""

    @classmethod
    def setUpClass(cls):
        cls.settings = TrackerSettings()
        cls.example = trace_curves()
        with open(FIXTURES / "trace_curves.json") as f:
            cls.fixture = json.load(f)
        cls.homotopy = build_trace_homotopy(cls.example.system, _empty_slice(P2_P1), [cls.example.segre],
                                            cls.example.chart, make_rng(41))
        cls.rho = GeneralCoordinate(P2_P1, cls.example.rho.factors)

    def _samples(self, subset):
        points = [self.example.points[j] for j in subset]
        return trace_values(points, self.homotopy, self.rho, self.settings)

    def test_fixture_points_match(self):
        for point, stored in zip(self.example.points, self.fixture["points"]):
            np.testing.assert_allclose(point, stored, atol=1e-12)
            self.assertTrue(self.example.system.satisfied_at(point, 1e-12))
            self.assertAlmostEqual(abs(self.example.segre.value(point)), 0, places=12)

    def test_linear_subsets(self):
        """Whole components (and all of them together) give a linear trace."""
        for subset in self.fixture["linear_subsets"]:
            with self.subTest(subset=subset):
                samples = self._samples(subset)
                self.assertFalse(any(s.poisoned for s in samples))
                self.assertTrue(is_affine_linear(samples))

    def test_nonlinear_subsets(self):
        """Part of the third curve plus the two lines is far from linear."""
        for subset in self.fixture["nonlinear_subsets"]:
            with self.subTest(subset=subset):
                samples = self._samples(subset)
                self.assertFalse(is_affine_linear(samples))
                self.assertGreater(abs(second_difference(samples)), self.fixture["nonlinear_gap"])

    def test_needs_segre_slice(self):
        with self.assertRaises(StructuralError):
            build_trace_homotopy(self.example.system, _empty_slice(P2_P1), [], self.example.chart)

    def test_trace_test(self):
        """The one-shot check agrees with the sampled traces."""
        points = self.example.points
        args = (self.example.system, _empty_slice(P2_P1), [self.example.segre], self.example.chart, self.rho,
                self.settings)
        self.assertTrue(trace_test(points, *args, rng=make_rng(42)))
        self.assertFalse(trace_test(points[:4], *args, rng=make_rng(42)))

    def test_too_many_slices(self):
        linear = LinearSlice(P2_P1, [[[1, 0, 0], [0, 1, 0]], [[1, 1]]])
        with self.assertRaises(StructuralError):
            build_trace_homotopy(self.example.system, linear, [self.example.segre], self.example.chart)

    def test_linear_exactly_for_unions_of_components(self):
        """Every subset of the five points: linear trace iff it is a union of whole curves."""
        values, poisoned = point_traces(self.example.points, self.homotopy, self.rho, self.settings)
        self.assertFalse(poisoned.any())
        labels = [_trace_curve_label(p) for p in self.example.points]
        for size in range(1, len(labels) + 1):
            for subset in itertools.combinations(range(len(labels)), size):
                with self.subTest(subset=subset):
                    self.assertEqual(is_affine_linear(_subset_samples(values, poisoned, subset)),
                                     _is_union(subset, labels))


class TestTraceOnSolvedCurves(unittest.TestCase):
    """Test cases for the trace test on curves found by a full solve."""

    @classmethod
    def setUpClass(cls):
        cls.settings = TrackerSettings()
        collection, _ = multiregenerate(four_components(), settings=cls.settings, rng=make_rng(7))
        cls.curves = collection.pure_part(1)

    def test_linear_exactly_for_unions_of_components(self):
        """[0:0:1] x {y1 = 0} is told apart from the other curve by its x coordinates."""
        for seed in (61, 64):
            with self.subTest(seed=seed):
                rng = make_rng(seed)
                setup = trace_setup(self.curves, (0, 0), rng, self.settings)
                self.assertEqual(len(setup.points), 3)
                h = build_trace_homotopy(self.curves.system, setup.linear, [setup.segre], self.curves.chart, rng)
                rho = GeneralCoordinate.random(self.curves.structure, rng)
                values, poisoned = point_traces(setup.points, h, rho, self.settings)
                labels = [_solved_curve_label(p) for p in setup.points]
                self.assertEqual(sorted(labels), ["other", "other", "x = [0:0:1]"])
                for size in (1, 2, 3):
                    for subset in itertools.combinations(range(3), size):
                        self.assertEqual(is_affine_linear(_subset_samples(values, poisoned, subset)),
                                         _is_union(subset, labels), subset)


class TestLineCheck(unittest.TestCase):
    """Test cases for second_difference and is_affine_linear."""

    def _samples(self, middle, poisoned=False):
        return [TraceSample(1.0, 3 + 1j, poisoned), TraceSample(0.5, middle, poisoned),
                TraceSample(0.0, 1 - 1j, poisoned)]

    def test_exact_line(self):
        samples = self._samples(2 + 0j)
        self.assertAlmostEqual(abs(second_difference(samples)), 0)
        self.assertTrue(is_affine_linear(samples))

    def test_bent(self):
        samples = self._samples(2.01 + 0j)
        self.assertAlmostEqual(second_difference(samples), -0.02)
        self.assertFalse(is_affine_linear(samples))

    def test_poisoned(self):
        self.assertFalse(is_affine_linear(self._samples(2 + 0j, poisoned=True)))

    def test_sample_count(self):
        with self.assertRaises(ValueError):
            second_difference(self._samples(2 + 0j)[:2])


class TestUnionFind(unittest.TestCase):
    """Test cases for UnionFind."""

    def test_blocks_in_first_node_order(self):
        nodes = [((1, 0), 0), ((0, 1), 0), ((0, 1), 1), ((0, 1), 2)]
        uf = UnionFind(nodes)
        self.assertTrue(uf.union(nodes[2], nodes[0]))
        self.assertFalse(uf.union(nodes[0], nodes[2]))
        self.assertTrue(uf.union(nodes[3], nodes[1]))
        self.assertEqual(uf.blocks(), [[nodes[0], nodes[2]], [nodes[1], nodes[3]]])
        self.assertEqual(uf.find(nodes[2]), nodes[0])


class TestDecompose(unittest.TestCase):
    """Test cases for decompose."""

    def setUp(self):
        self.settings = TrackerSettings()

    def test_two_curves(self):
        """The line {x = y} and the line [0:0:1] x {y1 = 0} are separate components."""
        _, collection = _curve_collection()
        partition = decompose(collection, self.settings, make_rng(51), loops=3)
        self.assertEqual(partition.blocks, [[((1, 0), 0), ((0, 1), 0)], [((0, 1), 1)]])
        self.assertEqual(partition.certified, [True, True])
        self.assertEqual(partition.unresolved, [])
        components = partition.components()
        self.assertEqual(multidegree(components[0]), [((1, 0), 1), ((0, 1), 1)])
        self.assertEqual(multidegree(components[1]), [((0, 1), 1)])

    def test_solved_four_components(self):
        """Each pure part of a full solve splits into its known components."""
        collection, _ = multiregenerate(four_components(), settings=self.settings, rng=make_rng(7))
        expected = {
            2: [[((2, 0), 1)], [((1, 1), 1)]],
            1: [[((1, 0), 1), ((0, 1), 1)], [((0, 1), 1)]],
        }
        for dimension, degrees in expected.items():
            with self.subTest(dimension=dimension):
                partition = decompose(collection.pure_part(dimension), self.settings, make_rng(54), loops=3)
                self.assertEqual(partition.certified, [True, True])
                self.assertCountEqual([multidegree(c) for c in partition.components()], degrees)

    def test_points_are_components(self):
        """In dimension zero every point is its own component."""
        system = parabola()
        chart = Chart(P1_P1, [[1, 0], [0, 1]])
        collection = WitnessCollection(system, chart, 1)
        collection.add(WitnessSet(system, _empty_slice(P1_P1), chart,
                                  [np.array([1, 0, 1, 0]), np.array([1, 1, 1, 1])]))
        partition = decompose(collection, self.settings, make_rng(52))
        self.assertEqual(len(partition.blocks), 2)
        self.assertEqual(partition.certified, [True, True])

    def test_mixed_dimensions(self):
        _, collection = _curve_collection()
        structure = collection.structure
        collection.add(WitnessSet(collection.system, _empty_slice(structure), collection.chart,
                                  [np.array([1, 0, 1, 1, 0, 1])]))
        with self.assertRaises(StructuralError):
            decompose(collection, self.settings, make_rng(53))


if __name__ == "__main__":
    unittest.main()
