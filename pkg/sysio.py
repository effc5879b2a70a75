"""
Text formats: polynomial systems (.msys), witness archives (.mwit), reports.

System grammar:

    # comment
    variable_group x0, x1;
    variable_group y0, y1;
    constant c = 2 - 3*I;
    f = x1^2*y0 - c*x0^2*y1;

Expressions use + - * / ^ and parentheses; ^ takes a nonnegative integer
exponent, / a constant divisor, and I is the imaginary unit.
"""

import csv
import io
import json
import logging
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from exceptions import (ArchiveError, ArchiveVersionError, DimensionMismatch, SystemSyntaxError,
                        UndeclaredIdentifier)
from models import StageReport, TraceSample
from poly_core import Polynomial, PolynomialSystem, VariableStructure
from witness import (Chart, LinearSlice, WitnessCollection, WitnessSet, check_slice_type, format_multidegree,
                     multidegree, sort_key)

logger = logging.getLogger(__name__)

_TOKEN = re.compile(
    r"(?P<space>[ \t\r\f]+)"
    r"|(?P<newline>\n)"
    r"|(?P<comment>#[^\n]*)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),;=])"
    r"|(?P<bad>.)"
)
_KEYWORDS = {"variable_group", "constant"}


# =============================================================================
# TOKENS
# =============================================================================

@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    line, line_start = 1, 0
    for match in _TOKEN.finditer(text):
        kind = match.lastgroup
        column = match.start() - line_start + 1
        if kind == "newline":
            line += 1
            line_start = match.end()
            continue
        if kind in ("space", "comment"):
            continue
        if kind == "bad":
            raise SystemSyntaxError(f"unexpected character {match.group()!r}", line, column)
        tokens.append(Token(kind, match.group(), line, column))
    tokens.append(Token("end", "", line, len(text) - line_start + 1))
    return tokens


# =============================================================================
# PARSER
# =============================================================================

class _Parser:
    """Recursive descent over the token list; expressions lower straight to Polynomials."""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.position = 0
        self.groups: List[List[str]] = []
        self.structure: Optional[VariableStructure] = None
        self.constants: Dict[str, complex] = {}
        self.names: List[str] = []
        self.polynomials: List[Polynomial] = []

    # ---- token helpers ------------------------------------------------

    @property
    def current(self) -> Token:
        return self.tokens[self.position]

    def _error(self, message: str, token: Optional[Token] = None) -> SystemSyntaxError:
        token = token or self.current
        return SystemSyntaxError(message, token.line, token.column)

    def _advance(self) -> Token:
        token = self.current
        self.position += 1
        return token

    def _accept(self, text: str) -> bool:
        if self.current.kind == "op" and self.current.text == text:
            self.position += 1
            return True
        return False

    def _expect(self, text: str) -> Token:
        if not (self.current.kind == "op" and self.current.text == text):
            found = self.current.text or "end of input"
            raise self._error(f"expected {text!r}, found {found!r}")
        return self._advance()

    def _expect_name(self) -> Token:
        if self.current.kind != "name":
            raise self._error(f"expected a name, found {self.current.text or 'end of input'!r}")
        return self._advance()

    # ---- statements ---------------------------------------------------

    def parse(self) -> PolynomialSystem:
        while self.current.kind != "end":
            token = self._expect_name()
            if token.text == "variable_group":
                self._variable_group(token)
            elif token.text == "constant":
                self._constant()
            else:
                self._definition(token)
        if self.structure is None:
            self._freeze_structure(self.current)
        return PolynomialSystem(self.structure, self.polynomials)

    def _variable_group(self, keyword: Token) -> None:
        if self.structure is not None:
            raise self._error("variable_group must come before constants and definitions", keyword)
        group = []
        if self.current.kind == "op" and self.current.text == ";":
            raise self._error("empty variable group")
        while True:
            token = self._expect_name()
            if token.text in _KEYWORDS or token.text == "I":
                raise self._error(f"{token.text!r} cannot be a variable name", token)
            if any(token.text in g for g in self.groups) or token.text in group:
                raise self._error(f"variable {token.text!r} declared twice", token)
            group.append(token.text)
            if not self._accept(","):
                break
        self._expect(";")
        self.groups.append(group)

    def _freeze_structure(self, token: Token) -> None:
        if not self.groups:
            raise self._error("at least one variable_group is required", token)
        self.structure = VariableStructure(tuple(tuple(g) for g in self.groups))

    def _check_new_name(self, token: Token) -> None:
        taken = set(self.structure.variable_names) | set(self.constants) | set(self.names)
        if token.text in taken or token.text in _KEYWORDS or token.text == "I":
            raise self._error(f"name {token.text!r} is already in use", token)

    def _constant(self) -> None:
        if self.structure is None:
            self._freeze_structure(self.current)
        name = self._expect_name()
        self._check_new_name(name)
        self._expect("=")
        start = self.current
        value = self._expression()
        self._expect(";")
        if any(any(mono) for mono in value.terms):
            raise self._error(f"constant {name.text!r} depends on variables", start)
        self.constants[name.text] = value.terms.get((0,) * self.structure.total, 0j)

    def _definition(self, name: Token) -> None:
        if self.structure is None:
            self._freeze_structure(name)
        self._check_new_name(name)
        self._expect("=")
        self.polynomials.append(self._expression())
        self.names.append(name.text)
        self._expect(";")

    # ---- expressions --------------------------------------------------

    def _expression(self) -> Polynomial:
        value = self._term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self._advance().text
            rhs = self._term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _term(self) -> Polynomial:
        value = self._unary()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self._advance()
            rhs = self._unary()
            if op.text == "*":
                value = value * rhs
                continue
            if any(any(mono) for mono in rhs.terms) or rhs.is_zero:
                raise self._error("division is only allowed by a nonzero constant", op)
            value = value * (1.0 / rhs.terms[(0,) * self.structure.total])
        return value

    def _unary(self) -> Polynomial:
        if self._accept("-"):
            return -self._unary()
        if self._accept("+"):
            return self._unary()
        return self._power()

    def _power(self) -> Polynomial:
        base = self._atom()
        if self._accept("^"):
            token = self.current
            if token.kind != "number" or not token.text.isdigit():
                raise self._error("exponent must be a nonnegative integer")
            self._advance()
            base = base ** int(token.text)
        return base

    def _atom(self) -> Polynomial:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Polynomial.constant(self.structure, float(token.text))
        if token.kind == "name":
            self._advance()
            if token.text == "I":
                return Polynomial.constant(self.structure, 1j)
            if token.text in self.constants:
                return Polynomial.constant(self.structure, self.constants[token.text])
            if token.text in self.structure.variable_names:
                return Polynomial.variable(self.structure, token.text)
            raise UndeclaredIdentifier(f"undeclared identifier {token.text!r}", token.line, token.column)
        if self._accept("("):
            value = self._expression()
            self._expect(")")
            return value
        raise self._error(f"unexpected {token.text or 'end of input'!r}")


def parse_system(text: str) -> PolynomialSystem:
    """
    Parse the .msys grammar into a PolynomialSystem.

    Raises:
        SystemSyntaxError: with the line and column of the offending token
        UndeclaredIdentifier: for names that are neither variables nor constants
    """
    return _Parser(text).parse()


# =============================================================================
# PRINTING
# =============================================================================

def _number(x: float) -> str:
    return format(float(x), f".{config.DIGITS}g")


def format_complex(z: complex) -> str:
    """'(a + b*I)' with 17 significant digits per part."""
    z = complex(z)
    sign = "-" if z.imag < 0 else "+"
    return f"({_number(z.real)} {sign} {_number(abs(z.imag))}*I)"


def _monomial(structure: VariableStructure, mono: Sequence[int]) -> str:
    factors = []
    for name, power in zip(structure.variable_names, mono):
        if power == 1:
            factors.append(name)
        elif power > 1:
            factors.append(f"{name}^{power}")
    return "*".join(factors)


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero:
        return "0"
    pieces = []
    for mono, coeff in p.terms.items():
        body = _monomial(p.structure, mono)
        if coeff.imag != 0:
            text = format_complex(coeff) + (f"*{body}" if body else "")
            pieces.append(("+", text))
            continue
        magnitude = abs(coeff.real)
        sign = "-" if coeff.real < 0 else "+"
        if body and magnitude == 1:
            text = body
        elif body:
            text = f"{_number(magnitude)}*{body}"
        else:
            text = _number(magnitude)
        pieces.append((sign, text))
    first_sign, first = pieces[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, text in pieces[1:]:
        out += f" {sign} {text}"
    return out


def format_system(system: PolynomialSystem, names: Optional[Sequence[str]] = None) -> str:
    """The system in .msys syntax; definitions are f1..fl unless names are given."""
    names = list(names) if names else [f"f{j + 1}" for j in range(len(system))]
    lines = [f"variable_group {', '.join(group)};" for group in system.structure.groups]
    for name, p in zip(names, system):
        lines.append(f"{name} = {format_polynomial(p)};")
    return "\n".join(lines) + "\n"


# =============================================================================
# WITNESS ARCHIVES
# =============================================================================

def _encode(z: complex) -> str:
    z = complex(z)
    return f"{_number(z.real)} {_number(z.imag)}"


def _decode(text: str) -> complex:
    real, imag = text.split()
    return complex(float(real), float(imag))


def write_archive(collection: WitnessCollection) -> str:
    """
    Serialize a collection as 'mwit 1' followed by a JSON document.

    Records are in descending order of e; points within a record are sorted
    on the chart, multiplicities follow their points.
    """
    chart = collection.chart
    records = []
    for e in collection.types():
        W = collection.sets[e]
        order = sorted(range(W.degree), key=lambda j: sort_key(W.points[j], chart))
        records.append({
            "e": list(e),
            "slice": [[[_encode(z) for z in form] for form in block] for block in W.slice.forms],
            "points": [[_encode(z) for z in W.points[j]] for j in order],
            "multiplicities": [int(W.multiplicities[j]) for j in order],
        })
    document = {
        "seed": int(collection.seed),
        "system": format_system(collection.system),
        "chart": [[_encode(z) for z in coeffs] for coeffs in chart.coefficients],
        "records": records,
        "provenance": {str(k): str(v) for k, v in collection.provenance.items()},
    }
    return config.ARCHIVE_VERSION + "\n" + json.dumps(document, indent=1, sort_keys=True) + "\n"


def read_archive(data: Union[str, bytes]) -> WitnessCollection:
    """
    Inverse of write_archive.

    Raises:
        ArchiveVersionError: when the first line is not the supported version
        ArchiveError: when the document is malformed
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    header, _, body = data.partition("\n")
    if header.strip() != config.ARCHIVE_VERSION:
        raise ArchiveVersionError(f"unsupported archive version {header.strip()!r}")
    try:
        document = json.loads(body)
        system = parse_system(document["system"])
        structure = system.structure
        seed = int(document["seed"])
        chart = Chart(structure, [[_decode(z) for z in coeffs] for coeffs in document["chart"]])
        collection = WitnessCollection(system, chart, seed, provenance=dict(document.get("provenance", {})))
        for record in document["records"]:
            forms = [np.array([[_decode(z) for z in form] for form in block], dtype=complex)
                     .reshape(-1, size) for block, size in zip(record["slice"], structure.group_sizes)]
            slice_ = LinearSlice(structure, forms)
            if list(slice_.type) != list(record["e"]):
                raise ArchiveError(f"record {record['e']} carries a slice of type {slice_.type}")
            points = [np.array([_decode(z) for z in p], dtype=complex) for p in record["points"]]
            collection.add(WitnessSet(system, slice_, chart, points,
                                      [int(m) for m in record["multiplicities"]], seed))
    except ArchiveError:
        raise
    except (KeyError, TypeError, ValueError, SystemSyntaxError, DimensionMismatch) as exc:
        raise ArchiveError(f"corrupted archive: {exc}") from exc
    return collection


# =============================================================================
# REPORTS
# =============================================================================

def _key(e: Sequence[int]) -> str:
    return ",".join(str(v) for v in e)


def _stage_dict(report: StageReport) -> dict:
    return {
        "stage": report.stage,
        "codim": report.codim,
        "degree": list(report.degree),
        "start_points": {_key(e): n for e, n in sorted(report.start_points.items(), reverse=True)},
        "union_paths": report.union_paths,
        "witness_points": {_key(e): n for e, n in sorted(report.witness_points.items(), reverse=True)},
        "carried": {_key(e): n for e, n in sorted(report.carried.items(), reverse=True) if n},
        "nonsolutions": {_key(e): n for e, n in sorted(report.nonsolutions.items(), reverse=True) if n},
        "nonisolated": {_key(e): n for e, n in sorted(report.nonisolated.items(), reverse=True)},
        "inconclusive": {_key(e): n for e, n in sorted(report.inconclusive.items(), reverse=True)},
        "rejected": {_key(e): n for e, n in sorted(report.rejected.items(), reverse=True)},
        "failures": report.failures,
    }


def format_report(reports: Sequence[StageReport], kind: str = "table",
                  collection: Optional[WitnessCollection] = None,
                  extra: Optional[Dict[str, object]] = None) -> str:
    """
    Per-stage counts as a text table or a 'report 1' JSON document.

    Args:
        reports: one StageReport per equation
        kind: 'table' or 'json'
        collection: final collection, for the multidegree line
        extra: additional summary fields (Bezout counts, path totals)
    """
    extra = dict(extra or {})
    totals = {
        "start_points": sum(r.total_starts for r in reports),
        "union_paths": sum(r.union_paths for r in reports),
        "nonisolated": sum(r.total_nonisolated for r in reports),
        "failures": sum(r.failures for r in reports),
    }
    degree_text = format_multidegree(multidegree(collection)) if collection is not None else None

    if kind == "json":
        document = {"schema": config.REPORT_VERSION, "stages": [_stage_dict(r) for r in reports],
                    "totals": totals}
        if degree_text is not None:
            document["multidegree"] = degree_text
        document.update({k: v for k, v in extra.items()})
        return json.dumps(document, indent=1, sort_keys=True) + "\n"
    if kind != "table":
        raise ValueError(f"unknown report kind {kind!r}")

    lines = []
    header = f"{'e':<14}{'starts':>8}{'witness':>9}{'carried':>9}{'nonsol':>8}{'noniso':>8}{'inconcl':>9}{'rejected':>10}"
    for r in reports:
        lines.append("=" * 50)
        lines.append(f"STAGE {r.stage + 1}  codim {r.codim}  degree ({_key(r.degree)})")
        lines.append("=" * 50)
        lines.append(header)
        types = set(r.start_points) | set(r.witness_points) | set(r.carried) | set(r.nonsolutions)
        types |= set(r.nonisolated) | set(r.inconclusive) | set(r.rejected)
        for e in sorted(types, reverse=True):
            lines.append(
                f"{'(' + _key(e) + ')':<14}{r.start_points.get(e, 0):>8}{r.witness_points.get(e, 0):>9}"
                f"{r.carried.get(e, 0):>9}{r.nonsolutions.get(e, 0):>8}{r.nonisolated.get(e, 0):>8}"
                f"{r.inconclusive.get(e, 0):>9}{r.rejected.get(e, 0):>10}"
            )
        lines.append(f"union paths: {r.union_paths}   failures: {r.failures}")
    lines.append("=" * 50)
    lines.append(f"TOTAL  start points: {totals['start_points']}  union paths: {totals['union_paths']}"
                 f"  nonisolated: {totals['nonisolated']}  failures: {totals['failures']}")
    for name, value in extra.items():
        lines.append(f"{name}: {value}")
    if degree_text is not None:
        lines.append(f"multidegree: {degree_text}")
    return "\n".join(lines) + "\n"


def write_trace_csv(samples: Sequence[TraceSample]) -> str:
    """'t,re,im' rows, one per sample."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["t", "re", "im"])
    for s in samples:
        writer.writerow([_number(s.t), _number(s.value.real), _number(s.value.imag)])
    return buffer.getvalue()


# =============================================================================
# POINTS
# =============================================================================

_BARE_UNIT = re.compile(r"(^|[+-])j")


def parse_complex(text: str) -> complex:
    """Accept '2.5', '3+4i', '1-2i', 'i', '-i' (and j for i)."""
    cleaned = text.strip().replace(" ", "").lower().replace("i", "j")
    cleaned = _BARE_UNIT.sub(r"\g<1>1j", cleaned)
    try:
        return complex(cleaned)
    except ValueError:
        raise ValueError(f"not a complex number: {text!r}") from None


def parse_point(text: str, structure: VariableStructure) -> np.ndarray:
    """Groups separated by ';', coordinates by ','; e.g. '1,0,0;1,0,3'."""
    groups = [g for g in text.split(";")]
    if len(groups) != structure.group_count:
        raise DimensionMismatch(f"point needs {structure.group_count} groups, got {len(groups)}")
    coords = []
    for part, size in zip(groups, structure.group_sizes):
        values = [parse_complex(v) for v in part.split(",")]
        if len(values) != size:
            raise DimensionMismatch(f"group needs {size} coordinates, got {len(values)}")
        coords.extend(values)
    return np.array(coords, dtype=complex)


def format_point(point: np.ndarray, structure: VariableStructure, digits: int = 8) -> str:
    """'[a:b:c] x [d:e]' for display."""
    blocks = []
    for sl in structure.group_slices:
        parts = []
        for z in point[sl]:
            z = complex(z)
            if abs(z.imag) <= 10 ** -digits * max(1.0, abs(z.real)):
                parts.append(format(z.real, f".{digits}g"))
            else:
                parts.append(f"{z.real:.{digits}g}{z.imag:+.{digits}g}i")
        blocks.append("[" + ":".join(parts) + "]")
    return " x ".join(blocks)


def parse_slice_type(text: str, structure: VariableStructure) -> Tuple[int, ...]:
    """'1,0' -> (1, 0), checked against the structure."""
    try:
        e = tuple(int(v) for v in text.replace("(", "").replace(")", "").split(","))
    except ValueError:
        raise ValueError(f"not a slice type: {text!r}") from None
    return check_slice_type(e, structure)
