"""
Witness sets for multiprojective varieties.

Charts (hyperplanes at infinity), slice types e, linear and Segre slices,
witness sets W^e = (system, L^e, points) and collections indexed by e.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

import config
from exceptions import (ChartCrossing, DimensionMismatch, MalformedChart, PointCountChanged,
                        StructuralError, TrackingError)
from models import SliceKey, TrackerSettings
from poly_core import Polynomial, PolynomialSystem, VariableStructure, square_up
from rng import SeededRNG
from tracker import Homotopy, track_all

logger = logging.getLogger(__name__)


# =============================================================================
# CHARTS
# =============================================================================

class Chart:
    """One linear form H_i per group; computations normalize H_i = 1."""

    def __init__(self, structure: VariableStructure, coefficients: Sequence[Sequence[complex]]):
        if len(coefficients) != structure.group_count:
            raise MalformedChart("need one chart form per group")
        self.structure = structure
        self.coefficients = []
        self.matrix = np.zeros((structure.group_count, structure.total), dtype=complex)
        for i, (sl, coeffs) in enumerate(zip(structure.group_slices, coefficients)):
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.shape != (sl.stop - sl.start,):
                raise MalformedChart(f"chart form {i} must have {sl.stop - sl.start} coefficients")
            if not np.any(coeffs):
                raise MalformedChart(f"chart form {i} is zero")
            self.coefficients.append(coeffs)
            self.matrix[i, sl] = coeffs

    @classmethod
    def random(cls, structure: VariableStructure, rng: SeededRNG) -> "Chart":
        return cls(structure, [rng.random_complex(size) for size in structure.group_sizes])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chart):
            return NotImplemented
        return self.structure == other.structure and np.array_equal(self.matrix, other.matrix)

    def hyperplanes(self) -> List[Polynomial]:
        """H_1, ..., H_k as polynomials."""
        return [Polynomial.linear_form(self.structure, row) for row in self.matrix]

    def product_polynomial(self) -> Polynomial:
        """H = H_1 * ... * H_k."""
        result = Polynomial.constant(self.structure, 1.0)
        for h in self.hyperplanes():
            result = result * h
        return result

    def values(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=complex)

    def normalize(self, x) -> np.ndarray:
        """Scale each group so H_i = 1; ChartCrossing if some H_i(x) is numerically 0."""
        x = np.array(x, dtype=complex)
        for i, sl in enumerate(self.structure.group_slices):
            h = self.coefficients[i] @ x[sl]
            if abs(h) <= config.CHART_ZERO_TOL * max(np.max(np.abs(x[sl])), 1e-300):
                raise ChartCrossing(f"point lies on the hyperplane at infinity of group {i}")
            x[sl] = x[sl] / h
        return x


def _group_view(chart: Chart, x: np.ndarray, i: int, sl: slice, anchor: Optional[int] = None):
    """Chart-normalized coordinates of group i, or largest-modulus normalized near H_i = 0."""
    part = x[sl]
    h = chart.coefficients[i] @ part
    if anchor is None and abs(h) > config.CHART_ZERO_TOL * max(np.max(np.abs(part)), 1e-300):
        return part / h, None
    j = int(np.argmax(np.abs(part))) if anchor is None else anchor
    if part[j] == 0:
        return None, j
    return part / part[j], j


def point_equal(p, q, chart: Chart, tol: float = config.POINT_TOL) -> bool:
    """Compare two points of the product of projective spaces on the chart."""
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    if p.shape != q.shape:
        raise DimensionMismatch("points have different lengths")
    for i, sl in enumerate(chart.structure.group_slices):
        a, anchor = _group_view(chart, p, i, sl)
        if anchor is None:
            b, _ = _group_view(chart, q, i, sl)
            if b is None:
                a, anchor = _group_view(chart, p, i, sl, anchor=int(np.argmax(np.abs(p[sl]))))
                b, _ = _group_view(chart, q, i, sl, anchor=anchor)
        else:
            b, _ = _group_view(chart, q, i, sl, anchor=anchor)
        if a is None or b is None:
            return False
        if np.linalg.norm(a - b, np.inf) >= tol:
            return False
    return True


def cluster_points(points: Sequence[np.ndarray], chart: Chart,
                   tol: float = config.POINT_TOL) -> List[Tuple[np.ndarray, List[int]]]:
    """Group coinciding points; returns (representative, member indices) in first-seen order."""
    clusters: List[Tuple[np.ndarray, List[int]]] = []
    for index, point in enumerate(points):
        for rep, members in clusters:
            if point_equal(rep, point, chart, tol):
                members.append(index)
                break
        else:
            clusters.append((point, [index]))
    return clusters


def sort_key(point: np.ndarray, chart: Chart) -> Tuple[float, ...]:
    """Lexicographic (real, imag) key of the chart-normalized point."""
    try:
        normalized = chart.normalize(point)
    except ValueError:
        normalized = np.asarray(point, dtype=complex)
    return tuple(v for z in normalized for v in (z.real, z.imag))


# =============================================================================
# SLICES
# =============================================================================

def check_slice_type(e: Sequence[int], structure: VariableStructure) -> SliceKey:
    e = tuple(int(v) for v in e)
    if len(e) != structure.group_count:
        raise DimensionMismatch(f"slice type {e} needs {structure.group_count} entries")
    for v, n in zip(e, structure.projective_dims):
        if not 0 <= v <= n:
            raise StructuralError(f"slice type {e} exceeds {structure.projective_dims}")
    return e


class LinearSlice:
    """e_i linear forms in group i's coordinates, stored as (e_i, n_i+1) arrays."""

    def __init__(self, structure: VariableStructure, forms: Sequence[np.ndarray]):
        if len(forms) != structure.group_count:
            raise DimensionMismatch("need one block of forms per group")
        self.structure = structure
        self.forms = []
        for size, block in zip(structure.group_sizes, forms):
            block = np.asarray(block, dtype=complex).reshape(-1, size)
            self.forms.append(block)
        check_slice_type(self.type, structure)

    @property
    def type(self) -> SliceKey:
        return tuple(block.shape[0] for block in self.forms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearSlice):
            return NotImplemented
        return (self.structure == other.structure
                and all(np.array_equal(a, b) for a, b in zip(self.forms, other.forms)))

    def matrix(self) -> np.ndarray:
        rows = []
        for sl, block in zip(self.structure.group_slices, self.forms):
            for coeffs in block:
                row = np.zeros(self.structure.total, dtype=complex)
                row[sl] = coeffs
                rows.append(row)
        return np.array(rows, dtype=complex).reshape(len(rows), self.structure.total)

    def polynomials(self) -> PolynomialSystem:
        return PolynomialSystem(self.structure,
                                [Polynomial.linear_form(self.structure, row) for row in self.matrix()])

    def evaluate(self, x) -> np.ndarray:
        return self.matrix() @ np.asarray(x, dtype=complex)


def _independent(block: np.ndarray) -> bool:
    return block.shape[0] == 0 or np.linalg.matrix_rank(block) == block.shape[0]


def random_slice(e: Sequence[int], structure: VariableStructure, rng: SeededRNG) -> LinearSlice:
    """Generic slice of type e; redraws any block that is not of full rank."""
    e = check_slice_type(e, structure)
    forms = []
    for count, size in zip(e, structure.group_sizes):
        block = rng.random_complex((count, size))
        while not _independent(block):
            block = rng.random_complex((count, size))
        forms.append(block)
    return LinearSlice(structure, forms)


def slice_through_point(e: Sequence[int], alpha, structure: VariableStructure,
                        rng: SeededRNG) -> LinearSlice:
    """
    Generic slice of type e whose forms all vanish at alpha.

    In each group the coefficient of alpha's largest-modulus coordinate is
    solved for, the others are random.
    """
    e = check_slice_type(e, structure)
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape[0] != structure.total:
        raise DimensionMismatch("point does not match the variable structure")
    forms = []
    for count, sl in zip(e, structure.group_slices):
        part = alpha[sl]
        if not np.any(part):
            raise StructuralError("point has an all-zero coordinate block")
        pivot = int(np.argmax(np.abs(part)))
        while True:
            block = rng.random_complex((count, part.shape[0]))
            others = np.delete(np.arange(part.shape[0]), pivot)
            block[:, pivot] = -(block[:, others] @ part[others]) / part[pivot]
            if _independent(block):
                break
        forms.append(block)
    return LinearSlice(structure, forms)


class SliceFlag:
    """n_i generic forms per group; L^e uses the first e_i of them."""

    def __init__(self, structure: VariableStructure, forms: Sequence[np.ndarray]):
        self.structure = structure
        self.forms = [np.asarray(block, dtype=complex).reshape(n, n + 1)
                      for block, n in zip(forms, structure.projective_dims)]

    @classmethod
    def random(cls, structure: VariableStructure, rng: SeededRNG) -> "SliceFlag":
        full = random_slice(structure.projective_dims, structure, rng)
        return cls(structure, full.forms)

    def slice_for(self, e: Sequence[int]) -> LinearSlice:
        e = check_slice_type(e, self.structure)
        return LinearSlice(self.structure, [block[:count] for block, count in zip(self.forms, e)])

    def completing_form(self, d: Sequence[int], group: int) -> np.ndarray:
        """Coefficients (group block only) of the form M with L^d and M giving L^{d + delta_group}."""
        return self.forms[group][d[group]]

    def form_polynomial(self, d: Sequence[int], group: int) -> Polynomial:
        row = np.zeros(self.structure.total, dtype=complex)
        row[self.structure.group_slices[group]] = self.completing_form(d, group)
        return Polynomial.linear_form(self.structure, row)


def ambient_witness_point(flag: SliceFlag, chart: Chart) -> np.ndarray:
    """The single point of L^{(n_1..n_k)} = 0 on the chart."""
    structure = flag.structure
    point = np.zeros(structure.total, dtype=complex)
    for i, sl in enumerate(structure.group_slices):
        n = structure.projective_dims[i]
        system = np.vstack([flag.forms[i], chart.coefficients[i][None, :]])
        rhs = np.zeros(n + 1, dtype=complex)
        rhs[-1] = 1.0
        point[sl] = np.linalg.solve(system, rhs)
    return point


class SegreSlice:
    """One linear form per group; their product is a multilinear form."""

    def __init__(self, structure: VariableStructure, factors: Sequence[Sequence[complex]]):
        if len(factors) != structure.group_count:
            raise DimensionMismatch("need one factor per group")
        self.structure = structure
        self.factors = []
        for size, coeffs in zip(structure.group_sizes, factors):
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.shape != (size,) or not np.any(coeffs):
                raise StructuralError("Segre factors must be nonzero forms in their own group")
            self.factors.append(coeffs)

    @classmethod
    def random(cls, structure: VariableStructure, rng: SeededRNG) -> "SegreSlice":
        return cls(structure, [rng.random_complex(size) for size in structure.group_sizes])

    def factor_values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return np.array([f @ x[sl] for f, sl in zip(self.factors, self.structure.group_slices)])

    def value(self, x) -> complex:
        return complex(np.prod(self.factor_values(x)))


def segre_slice_from(structure: VariableStructure, forms: Sequence[Sequence[complex]]) -> SegreSlice:
    """Segre slice from one linear form per group."""
    return SegreSlice(structure, forms)


def product_polynomial(segre: SegreSlice) -> Polynomial:
    """The multilinear form R = prod of the factors."""
    structure = segre.structure
    result = Polynomial.constant(structure, 1.0)
    for coeffs, sl in zip(segre.factors, structure.group_slices):
        row = np.zeros(structure.total, dtype=complex)
        row[sl] = coeffs
        result = result * Polynomial.linear_form(structure, row)
    return result


# =============================================================================
# WITNESS SETS
# =============================================================================

def _derived_seed(seed: int, e: Sequence[int]) -> int:
    value = int(seed) & (2 ** 63 - 1)
    for v in e:
        value = (value * 1000003 + int(v) + 1) % (2 ** 63 - 1)
    return value


@dataclass
class WitnessSet:
    """W^e = (system, L^e, points) with per-point multiplicities."""
    system: PolynomialSystem
    slice: LinearSlice
    chart: Chart
    points: List[np.ndarray] = field(default_factory=list)
    multiplicities: List[int] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        self.points = [np.asarray(p, dtype=complex) for p in self.points]
        if not self.multiplicities:
            self.multiplicities = [1] * len(self.points)
        if len(self.multiplicities) != len(self.points):
            raise StructuralError("one multiplicity per witness point is required")
        for p in self.points:
            if p.shape[0] != self.system.structure.total:
                raise DimensionMismatch("witness point does not match the variable structure")

    @property
    def structure(self) -> VariableStructure:
        return self.system.structure

    @property
    def type(self) -> SliceKey:
        return self.slice.type

    @property
    def dimension(self) -> int:
        return sum(self.type)

    @property
    def codim(self) -> int:
        return sum(self.structure.projective_dims) - self.dimension

    @property
    def degree(self) -> int:
        return len(self.points)

    def square_system(self) -> PolynomialSystem:
        """The witness system, randomized down to codim equations when overdetermined."""
        if len(self.system) <= self.codim:
            return self.system
        rng = SeededRNG(_derived_seed(self.seed, self.type))
        return square_up(self.system, self.codim, self.chart.hyperplanes(), rng)

    def with_points(self, points, multiplicities=None, slice_=None) -> "WitnessSet":
        return replace(self, points=list(points), multiplicities=list(multiplicities or []),
                       slice=slice_ if slice_ is not None else self.slice)


def move_slice(W: WitnessSet, target: LinearSlice, settings: TrackerSettings,
               generic: bool = True) -> WitnessSet:
    """
    Track the witness points of W from W.slice to target.

    Raises:
        TrackingError: if any path failed
        PointCountChanged: if endpoints collided and target was generic
    """
    if target.type != W.type:
        raise StructuralError(f"cannot move a type {W.type} slice to type {target.type}")
    if target == W.slice or not W.points:
        return W.with_points([p.copy() for p in W.points], W.multiplicities, target)
    h = Homotopy(W.square_system(), W.slice.polynomials(), target.polynomials(), W.chart)
    outcomes = track_all(h, W.points, settings)
    failed = [o for o in outcomes if o.failed]
    if failed:
        raise TrackingError(f"{len(failed)} of {len(outcomes)} paths failed while moving the slice",
                            outcomes)
    endpoints = [o.endpoint for o in outcomes]
    if generic and len(cluster_points(endpoints, W.chart)) != len(endpoints):
        raise PointCountChanged("endpoints collided while moving to a generic slice")
    return W.with_points(endpoints, W.multiplicities, target)


# =============================================================================
# COLLECTIONS
# =============================================================================

@dataclass
class WitnessCollection:
    """Formal union of witness sets W^e sharing one system, chart and seed."""
    system: PolynomialSystem
    chart: Chart
    seed: int = 0
    sets: Dict[SliceKey, WitnessSet] = field(default_factory=dict)
    provenance: Dict[str, str] = field(default_factory=dict)

    @property
    def structure(self) -> VariableStructure:
        return self.system.structure

    def types(self) -> List[SliceKey]:
        return sorted(self.sets, reverse=True)

    def __iter__(self) -> Iterator[WitnessSet]:
        return (self.sets[e] for e in self.types())

    def __len__(self) -> int:
        return len(self.sets)

    def add(self, W: WitnessSet) -> None:
        if W.type in self.sets:
            raise StructuralError(f"collection already holds a witness set of type {W.type}")
        self.sets[W.type] = W

    def total_points(self) -> int:
        return sum(W.degree for W in self.sets.values())

    def dimensions(self) -> List[int]:
        return sorted({sum(e) for e, W in self.sets.items() if W.points}, reverse=True)

    def pure_part(self, dimension: int) -> "WitnessCollection":
        return replace(self, sets={e: W for e, W in self.sets.items() if sum(e) == dimension},
                       provenance=dict(self.provenance))

    def by_dimension(self) -> Dict[int, "WitnessCollection"]:
        return {dim: self.pure_part(dim) for dim in self.dimensions()}

    def nonempty(self) -> "WitnessCollection":
        return replace(self, sets={e: W for e, W in self.sets.items() if W.points},
                       provenance=dict(self.provenance))


def multidegree(collection: WitnessCollection) -> List[Tuple[SliceKey, int]]:
    """Formal sum of |w^e| w^e, zero terms dropped, descending lexicographic in e."""
    return [(e, collection.sets[e].degree) for e in collection.types() if collection.sets[e].degree]


def format_multidegree(terms: Sequence[Tuple[SliceKey, int]]) -> str:
    """Render as '1 w^(1,0) + 2 w^(0,1)'; the empty sum is '0'."""
    if not terms:
        return "0"
    return " + ".join(f"{count} w^({','.join(str(v) for v in e)})" for e, count in terms)
