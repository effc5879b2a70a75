"""
Unit tests for sysio.py

Tests the text formats including:
- System parsing and error positions
- Printing and re-parsing
- Witness archive encoding
- Reports, trace CSV and point parsing
"""

import json
import unittest

import numpy as np

import config
from example_systems import P1_P1, four_components, random_hypersurface
from exceptions import (ArchiveError, ArchiveVersionError, DimensionMismatch, StructuralError, SystemSyntaxError,
                        UndeclaredIdentifier)
from models import StageReport, TraceSample
from poly_core import PolynomialSystem
from rng import make_rng
from sysio import (format_polynomial, format_report, format_system, parse_complex, parse_point,
                   parse_slice_type, parse_system, read_archive, write_archive, write_trace_csv)
from witness import Chart, LinearSlice, WitnessCollection, WitnessSet, format_multidegree, multidegree


PARABOLA_TEXT = "variable_group x0,x1; variable_group y0,y1; f = x1^2*y0 - x0^2*y1;"


class TestParseSystem(unittest.TestCase):
    """Test cases for parse_system."""

    def test_parabola(self):
        """Two groups and one polynomial."""
        system = parse_system(PARABOLA_TEXT)
        self.assertEqual(len(system), 1)
        self.assertEqual(system.structure.group_sizes, (2, 2))
        self.assertEqual(system.multidegrees(), [(2, 1)])

    def test_cancellation_gives_zero(self):
        system = parse_system("variable_group x; f = x - x;")
        self.assertTrue(system[0].is_zero)

    def test_constants_comments_and_imaginary_unit(self):
        text = """
        # a comment line
        variable_group x0, x1;
        constant c = 2 - 3*I;   # trailing comment
        f = c*x0 + x1/2;
        g = -x0^2 + (1 + I)*x0*x1;
        """
        system = parse_system(text)
        self.assertEqual(len(system), 2)
        self.assertAlmostEqual(system[0].evaluate([1, 1]), 2.5 - 3j)
        self.assertAlmostEqual(system[1].evaluate([1, 1]), 1j)

    def test_unary_minus_binds_looser_than_power(self):
        system = parse_system("variable_group x; f = -x^2;")
        self.assertAlmostEqual(system[0].evaluate([3]), -9)

    def test_undeclared_identifier(self):
        """An unknown name reports its line and column."""
        with self.assertRaises(UndeclaredIdentifier) as ctx:
            parse_system("variable_group x;\nf = x + z;")
        self.assertEqual(ctx.exception.line, 2)
        self.assertEqual(ctx.exception.column, 9)

    def test_syntax_errors(self):
        cases = [
            "f = 1;",
            "variable_group ;",
            "variable_group x; f = x^y;",
            "variable_group x; f = 1/x;",
            "variable_group x; f = (x + 1;",
            "variable_group x; f = x $ 1;",
            "variable_group x; f = x; variable_group y;",
        ]
        for text in cases:
            with self.subTest(text=text):
                with self.assertRaises(SystemSyntaxError):
                    parse_system(text)

    def test_print_parse_round_trip(self):
        """Printing then parsing gives term-identical polynomials."""
        rng = make_rng(5)
        system = PolynomialSystem(P1_P1, [random_hypersurface(P1_P1, (2, 1), rng),
                                          random_hypersurface(P1_P1, (1, 3), rng)])
        again = parse_system(format_system(system))
        self.assertEqual(again.structure, system.structure)
        for p, q in zip(system, again):
            self.assertEqual(p.terms, q.terms)

    def test_format_polynomial(self):
        system = parse_system("variable_group x0, x1; f = x0^2 - 2.5*x0*x1 + 1; g = x0 - x0;")
        self.assertEqual(format_polynomial(system[0]), "x0^2 - 2.5*x0*x1 + 1")
        self.assertEqual(format_polynomial(system[1]), "0")


class TestArchive(unittest.TestCase):
    """Test cases for witness archives."""

    def setUp(self):
        self.system = four_components()
        structure = self.system.structure
        self.chart = Chart(structure, [[0, 0, 1], [0, 0, 1]])
        slice_10 = LinearSlice(structure, [[[1, 1, -2]], np.zeros((0, 3))])
        slice_01 = LinearSlice(structure, [np.zeros((0, 3)), [[1, -2, -1]]])
        self.collection = WitnessCollection(self.system, self.chart, 42, provenance={"command": "test"})
        self.collection.add(WitnessSet(self.system, slice_10, self.chart,
                                       [np.array([1, 1, 1, 1, 1, 1], dtype=complex)], seed=42))
        self.collection.add(WitnessSet(self.system, slice_01, self.chart,
                                       [np.array([0, 0, 1, 1, 0, 1], dtype=complex),
                                        np.array([-1, -1, 1, -1, -1, 1], dtype=complex)],
                                       [1, 2], seed=42))

    def test_version_line(self):
        text = write_archive(self.collection)
        self.assertTrue(text.startswith(config.ARCHIVE_VERSION + "\n"))

    def test_round_trip(self):
        """Reading back keeps seed, system, points and multiplicities."""
        again = read_archive(write_archive(self.collection))
        self.assertEqual(again.seed, 42)
        self.assertEqual(again.types(), [(1, 0), (0, 1)])
        self.assertEqual(again.chart, self.chart)
        self.assertEqual(format_multidegree(multidegree(again)), "1 w^(1,0) + 2 w^(0,1)")
        self.assertEqual(again.provenance["command"], "test")
        W = again.sets[(0, 1)]
        self.assertEqual(sorted(W.multiplicities), [1, 2])

    def test_points_sorted_with_multiplicities(self):
        """Points are stored sorted; multiplicities move with them."""
        W = read_archive(write_archive(self.collection)).sets[(0, 1)]
        np.testing.assert_array_equal(W.points[0], [-1, -1, 1, -1, -1, 1])
        self.assertEqual(W.multiplicities, [2, 1])

    def test_double_round_trip_is_identical(self):
        first = write_archive(self.collection)
        second = write_archive(read_archive(first))
        self.assertEqual(first, second)

    def test_empty_collection(self):
        empty = WitnessCollection(self.system, self.chart, 7)
        again = read_archive(write_archive(empty))
        self.assertEqual(len(again), 0)
        self.assertEqual(again.seed, 7)
        self.assertEqual(len(again.system), 3)

    def test_wrong_version(self):
        text = write_archive(self.collection).replace(config.ARCHIVE_VERSION, "mwit 9", 1)
        with self.assertRaises(ArchiveVersionError):
            read_archive(text)

    def test_corrupted(self):
        text = write_archive(self.collection)
        header, body = text.split("\n", 1)
        document = json.loads(body)
        del document["chart"]
        with self.assertRaises(ArchiveError):
            read_archive(header + "\n" + json.dumps(document))
        with self.assertRaises(ArchiveError):
            read_archive(header + "\n{ not json")


class TestReports(unittest.TestCase):
    """Test cases for report output."""

    def setUp(self):
        report = StageReport(0, 1, (2, 1))
        report.bump("start_points", (0, 1), 2)
        report.bump("start_points", (1, 0), 1)
        report.bump("witness_points", (0, 1), 2)
        report.bump("witness_points", (1, 0), 1)
        report.union_paths = 1
        self.reports = [report]

    def test_table(self):
        text = format_report(self.reports, "table")
        self.assertIn("STAGE 1  codim 1  degree (2,1)", text)
        self.assertIn("TOTAL  start points: 3  union paths: 1", text)

    def test_json(self):
        document = json.loads(format_report(self.reports, "json", extra={"bezout": 3}))
        self.assertEqual(document["schema"], config.REPORT_VERSION)
        self.assertEqual(document["stages"][0]["start_points"], {"1,0": 1, "0,1": 2})
        self.assertEqual(document["totals"]["start_points"], 3)
        self.assertEqual(document["bezout"], 3)

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            format_report(self.reports, "xml")

    def test_trace_csv(self):
        text = write_trace_csv([TraceSample(1.0, 2 + 1j), TraceSample(0.5, 1.5 + 0.5j)])
        self.assertEqual(text.splitlines(), ["t,re,im", "1,2,1", "0.5,1.5,0.5"])


class TestPoints(unittest.TestCase):
    """Test cases for point and slice-type parsing."""

    def test_parse_complex(self):
        cases = {"2.5": 2.5, "3+4i": 3 + 4j, "1-2i": 1 - 2j, "i": 1j, "-i": -1j, "-2.5e-1i": -0.25j}
        for text, value in cases.items():
            with self.subTest(text=text):
                self.assertEqual(parse_complex(text), value)

    def test_parse_complex_rejects_garbage(self):
        with self.assertRaises(ValueError):
            parse_complex("abc")

    def test_parse_point(self):
        structure = four_components().structure
        point = parse_point("1,0,0;1,0,3", structure)
        np.testing.assert_array_equal(point, [1, 0, 0, 1, 0, 3])

    def test_parse_point_wrong_shape(self):
        structure = four_components().structure
        with self.assertRaises(ValueError):
            parse_point("1,0;1,0,3", structure)

    def test_parse_slice_type(self):
        structure = four_components().structure
        self.assertEqual(parse_slice_type("(1,0)", structure), (1, 0))

    def test_parse_slice_type_bounds(self):
        """Each entry must lie between 0 and the projective dimension of its group."""
        structure = four_components().structure
        with self.assertRaises(StructuralError):
            parse_slice_type("5,0", structure)
        with self.assertRaises(StructuralError):
            parse_slice_type("-1,1", structure)
        with self.assertRaises(DimensionMismatch):
            parse_slice_type("1", structure)


if __name__ == "__main__":
    unittest.main()
