"""
Membership testing and numerical irreducible decomposition.

Membership moves each witness set onto a slice through the test point and
looks for the point among the endpoints. Decomposition groups witness points
with monodromy loops and cross-slice membership links, then certifies
candidate groups with the multiprojective trace test.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from exceptions import PointCountChanged, StructuralError, TrackingError
from models import MembershipResult, PathOutcome, SliceKey, TraceSample, TrackerSettings, Verdict
from poly_core import PolynomialSystem, slice_types, square_up
from rng import SeededRNG, make_rng
from tracker import Homotopy, sample_all, track_all
from witness import (Chart, LinearSlice, SegreSlice, SliceFlag, WitnessCollection, WitnessSet,
                     cluster_points, move_slice, point_equal, product_polynomial, random_slice,
                     slice_through_point)

logger = logging.getLogger(__name__)

Node = Tuple[SliceKey, int]


# =============================================================================
# MEMBERSHIP
# =============================================================================

class SliceCheck(Enum):
    MEMBER = "member"
    ISOLATED = "isolated"
    SKIP = "skip"


def _slice_homotopy(W: WitnessSet, target: LinearSlice) -> Homotopy:
    return Homotopy(W.square_system(), W.slice.polynomials(), target.polynomials(), W.chart)


def check_slice(W: WitnessSet, target: LinearSlice, point, settings: TrackerSettings,
                tol: float = config.POINT_TOL) -> Tuple[SliceCheck, List[PathOutcome]]:
    """
    Track W onto a slice through point and classify the endpoints.

    Returns:
        MEMBER if point is an endpoint; ISOLATED if every endpoint is a
        nonsingular, distinct point of V on the target and point is not among
        them; SKIP otherwise.
    """
    outcomes = track_all(_slice_homotopy(W, target), W.points, settings)
    endpoints = [o.endpoint for o in outcomes if not o.failed]
    if any(point_equal(q, point, W.chart, tol) for q in endpoints):
        return SliceCheck.MEMBER, outcomes
    if all(o.success for o in outcomes) and len(cluster_points(endpoints, W.chart, tol)) == len(endpoints):
        return SliceCheck.ISOLATED, outcomes
    return SliceCheck.SKIP, outcomes


def membership_test(collection: WitnessCollection, point, settings: TrackerSettings,
                    rng: Optional[SeededRNG] = None, tol: float = config.POINT_TOL) -> MembershipResult:
    """
    Decide whether point lies on the variety witnessed by collection.

    Every nonempty W^e is tried in turn: a hit is Member, a certified
    isolated endpoint set is NotMember. Slice types whose endpoints could not
    be certified are skipped; if all of them were skipped the verdict is
    Inconclusive.
    """
    rng = rng or make_rng(collection.seed)
    point = np.asarray(point, dtype=complex)
    try:
        normalized = collection.chart.normalize(point)
    except ValueError:
        normalized = point
    if not collection.system.satisfied_at(normalized, config.MEMBER_RESIDUAL_TOL):
        return MembershipResult(Verdict.NOT_MEMBER, diagnostics=["point does not satisfy the system"])

    result = MembershipResult(Verdict.INCONCLUSIVE)
    for W in collection:
        if not W.points:
            continue
        target = slice_through_point(W.type, point, collection.structure, rng)
        check, outcomes = check_slice(W, target, point, settings, tol)
        result.endpoints[W.type] = [o.endpoint for o in outcomes]
        result.failures += sum(1 for o in outcomes if o.failed)
        if check is SliceCheck.MEMBER:
            result.verdict = Verdict.MEMBER
            result.slice_type = W.type
            return result
        if check is SliceCheck.ISOLATED:
            result.verdict = Verdict.NOT_MEMBER
            result.slice_type = W.type
            return result
        logger.debug("membership: slice type %s is not transverse at the point, skipped", W.type)
        result.skipped.append(W.type)
        result.diagnostics.append(f"slice type {W.type}: endpoints not isolated")
    if not result.skipped:
        result.verdict = Verdict.NOT_MEMBER
    return result


# =============================================================================
# PARTITIONS
# =============================================================================

class UnionFind:
    def __init__(self, nodes: Sequence[Node]):
        self.parent: Dict[Node, Node] = {n: n for n in nodes}
        self.order = {n: i for i, n in enumerate(nodes)}

    def find(self, node: Node) -> Node:
        root = node
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[node] != root:
            self.parent[node], node = root, self.parent[node]
        return root

    def union(self, a: Node, b: Node) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.order[rb] < self.order[ra]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def blocks(self) -> List[List[Node]]:
        groups: Dict[Node, List[Node]] = {}
        for node in self.parent:
            groups.setdefault(self.find(node), []).append(node)
        return sorted(groups.values(), key=lambda block: self.order[block[0]])


@dataclass
class Partition:
    """Blocks of witness points; certified blocks are irreducible components."""
    collection: WitnessCollection
    blocks: List[List[Node]]
    certified: List[bool]
    edges: List[Tuple[Node, Node, str]] = field(default_factory=list)

    @property
    def unresolved(self) -> List[List[Node]]:
        return [b for b, ok in zip(self.blocks, self.certified) if not ok]

    def components(self) -> List[WitnessCollection]:
        """One witness collection per block, in block order."""
        out = []
        for block in self.blocks:
            picked: Dict[SliceKey, List[int]] = {}
            for e, j in block:
                picked.setdefault(e, []).append(j)
            sets = {}
            for e, indices in picked.items():
                W = self.collection.sets[e]
                indices = sorted(indices)
                sets[e] = W.with_points([W.points[j] for j in indices],
                                        [W.multiplicities[j] for j in indices])
            out.append(WitnessCollection(self.collection.system, self.collection.chart,
                                         self.collection.seed, sets,
                                         dict(self.collection.provenance)))
        return out


# =============================================================================
# MONODROMY AND CROSS-SLICE LINKS
# =============================================================================

def monodromy_group(W: WitnessSet, loop_count: int, rng: SeededRNG,
                    settings: TrackerSettings) -> List[Tuple[int, int]]:
    """
    Move W around random triangle loops L -> L' -> L'' -> L.

    Returns:
        (start index, end index) pairs for every point that came back as a
        different witness point; failed paths are skipped for that loop.
    """
    if W.degree < 2:
        return []
    edges: List[Tuple[int, int]] = []
    uf = UnionFind([(W.type, j) for j in range(W.degree)])
    for loop in range(loop_count):
        legs = [W.slice, random_slice(W.type, W.structure, rng), random_slice(W.type, W.structure, rng),
                W.slice]
        current = list(W.points)
        alive = list(range(W.degree))
        for a, b in zip(legs[:-1], legs[1:]):
            h = Homotopy(W.square_system(), a.polynomials(), b.polynomials(), W.chart)
            outcomes = track_all(h, [current[j] for j in alive], settings)
            survivors = []
            for j, outcome in zip(alive, outcomes):
                if outcome.success:
                    current[j] = outcome.endpoint
                    survivors.append(j)
            alive = survivors
        for j in alive:
            for m, original in enumerate(W.points):
                if point_equal(current[j], original, W.chart):
                    if m != j:
                        edges.append((j, m))
                        uf.union((W.type, j), (W.type, m))
                    break
        if len(uf.blocks()) == 1:
            logger.debug("monodromy joined all %d points of %s after %d loops", W.degree, W.type, loop + 1)
            break
    return edges


@dataclass
class LinkReport:
    edges: List[Tuple[Node, Node]] = field(default_factory=list)
    endpoints: Dict[Tuple[Node, SliceKey], List[np.ndarray]] = field(default_factory=dict)


def cross_slice_link(collection: WitnessCollection, settings: TrackerSettings,
                     rng: SeededRNG) -> LinkReport:
    """
    Link points of different slice types that lie on a common component.

    For each witness point m of w^e and each other type e', w^{e'} is moved
    onto a type-e' slice through m; a path ending at m joins its start
    point to m.
    """
    report = LinkReport()
    types = [e for e in collection.types() if collection.sets[e].points]
    for e in types:
        for a, m in enumerate(collection.sets[e].points):
            for other in types:
                if other == e:
                    continue
                W = collection.sets[other]
                target = slice_through_point(other, m, collection.structure, rng)
                outcomes = track_all(_slice_homotopy(W, target), W.points, settings)
                report.endpoints[((e, a), other)] = [o.endpoint for o in outcomes]
                for b, outcome in enumerate(outcomes):
                    if not outcome.failed and point_equal(outcome.endpoint, m, collection.chart):
                        report.edges.append(((other, b), (e, a)))
    return report


# =============================================================================
# TRACE TEST
# =============================================================================

class GeneralCoordinate(SegreSlice):
    """rho = product of one linear form per group, evaluated on chart-normalized points."""

    @classmethod
    def random(cls, structure, rng: SeededRNG) -> "GeneralCoordinate":
        return cls(structure, [rng.random_complex(size) for size in structure.group_sizes])

    def at(self, point, chart: Chart) -> complex:
        return self.value(chart.normalize(point))


def build_trace_homotopy(system: PolynomialSystem, linear: LinearSlice, segre_slices: Sequence[SegreSlice],
                         chart: Chart, rng: Optional[SeededRNG] = None) -> Homotopy:
    """
    Fixed part system + linear; each Segre form R moves from R (t=1) to R + H (t=0).

    H is the product of the chart forms. The system is randomized down to the
    codimension of a |linear.type| + len(segre_slices) dimensional variety
    when it has more equations than that.
    """
    if not segre_slices:
        raise StructuralError("the trace homotopy needs at least one Segre slice")
    structure = system.structure
    codim = sum(structure.projective_dims) - sum(linear.type) - len(segre_slices)
    if codim < 0:
        raise StructuralError("too many slices for the ambient dimension")
    squared = square_up(system, codim, chart.hyperplanes(), rng or make_rng())
    fixed = squared.extended(linear.polynomials())
    start = PolynomialSystem(structure, [product_polynomial(R) for R in segre_slices])
    H = chart.product_polynomial()
    target = PolynomialSystem(structure, [r + H for r in start])
    return Homotopy(fixed, start, target, chart)


def point_traces(points: Sequence[np.ndarray], h: Homotopy, rho: GeneralCoordinate,
                 settings: TrackerSettings, t_samples: Sequence[float] = config.TRACE_SAMPLES):
    """
    rho along each path at every t sample.

    Returns:
        (values of shape (points, samples), poisoned flag per point)
    """
    paths = sample_all(h, points, t_samples, settings)
    values = np.zeros((len(points), len(t_samples)), dtype=complex)
    poisoned = np.zeros(len(points), dtype=bool)
    for j, samples in enumerate(paths):
        for s, x in enumerate(samples):
            if x is None:
                poisoned[j] = True
            else:
                values[j, s] = rho.at(x, h.chart)
    if poisoned.any():
        logger.warning("trace: %d of %d paths failed", int(poisoned.sum()), len(points))
    return values, poisoned


def _mean_samples(values: np.ndarray, poisoned: np.ndarray, rows: Sequence[int],
                  t_samples: Sequence[float]) -> List[TraceSample]:
    bad = bool(np.any(poisoned[list(rows)]))
    mean = values[list(rows)].mean(axis=0)
    return [TraceSample(float(t), complex(v), bad) for t, v in zip(t_samples, mean)]


def trace_values(points: Sequence[np.ndarray], h: Homotopy, rho: GeneralCoordinate,
                 settings: TrackerSettings,
                 t_samples: Sequence[float] = config.TRACE_SAMPLES) -> List[TraceSample]:
    """Mean of rho over the tracked points at each t; failed paths poison every sample."""
    values, poisoned = point_traces(points, h, rho, settings, t_samples)
    return _mean_samples(values, poisoned, range(len(points)), t_samples)


def second_difference(samples: Sequence[TraceSample]) -> complex:
    """Deviation of the middle sample from the line through the outer two, scaled as T1 - 2 T.5 + T0."""
    if len(samples) != 3:
        raise ValueError("the line test uses exactly three samples")
    (ta, a), (tb, b), (tc, c) = [(s.t, s.value) for s in samples]
    interpolated = a + (tb - ta) / (tc - ta) * (c - a)
    return 2.0 * (interpolated - b)


def is_affine_linear(samples: Sequence[TraceSample], tol_rel: float = config.TRACE_TOL_REL) -> bool:
    """True iff |T(1) - 2T(.5) + T(0)| <= tol_rel * max(1, |T(1) - T(0)|, |T(1)|)."""
    if any(s.poisoned or not np.isfinite(s.value) for s in samples):
        return False
    first, last = samples[0].value, samples[-1].value
    scale = max(1.0, abs(first - last), abs(first))
    return abs(second_difference(samples)) <= tol_rel * scale


def trace_test(points: Sequence[np.ndarray], system: PolynomialSystem, linear: LinearSlice,
               segre_slices: Sequence[SegreSlice], chart: Chart, rho: GeneralCoordinate,
               settings: TrackerSettings, rng: Optional[SeededRNG] = None) -> bool:
    """True certifies that points are exactly the slice points of a union of components."""
    h = build_trace_homotopy(system, linear, segre_slices, chart, rng)
    return is_affine_linear(trace_values(points, h, rho, settings))


@dataclass
class TraceSetup:
    """V ∩ L^f ∩ R on a fresh flag, as the union of the moved w^{f + delta_i}."""
    f: SliceKey
    linear: LinearSlice
    segre: SegreSlice
    points: List[np.ndarray]
    nodes: List[Node]


def trace_setup(collection: WitnessCollection, f: Sequence[int], rng: SeededRNG,
                settings: TrackerSettings) -> TraceSetup:
    """
    Move every w^{f + delta_i} onto a new generic flag.

    R is the product of the flag forms completing L^f in each group (a random
    form where f_i = n_i), so V ∩ L^f ∩ R is exactly the union of the moved
    sets. Node (e, j) records that a point came from w^e[j].
    """
    structure = collection.structure
    f = tuple(f)
    flag = SliceFlag.random(structure, rng)
    factors, points, nodes = [], [], []
    for i, n in enumerate(structure.projective_dims):
        if f[i] < n:
            factors.append(flag.completing_form(f, i))
        else:
            factors.append(rng.random_complex(structure.group_sizes[i]))
    for i, n in enumerate(structure.projective_dims):
        if f[i] >= n:
            continue
        e = tuple(v + 1 if g == i else v for g, v in enumerate(f))
        W = collection.sets.get(e)
        if W is None or not W.points:
            continue
        moved = move_slice(W, flag.slice_for(e), settings)
        points.extend(moved.points)
        nodes.extend((e, j) for j in range(W.degree))
    return TraceSetup(f, flag.slice_for(f), SegreSlice(structure, factors), points, nodes)


# =============================================================================
# DECOMPOSITION
# =============================================================================

class _CandidateBudget:
    def __init__(self, cap: int):
        self.cap = cap
        self.used = 0

    def spend(self) -> bool:
        self.used += 1
        return self.used <= self.cap


def _certify_with_trace(uf: UnionFind, setup: TraceSetup, values: np.ndarray, poisoned: np.ndarray,
                        certified: set, edges: list, budget: _CandidateBudget) -> bool:
    """Smallest-first search for linear unions of the classes seen by setup; False once over budget."""
    row_of = {node: k for k, node in enumerate(setup.nodes)}
    classes = [[row_of[n] for n in block if n in row_of] for block in uf.blocks()]
    anchors = [block[0] for block in uf.blocks()]
    live = [k for k, rows in enumerate(classes) if rows]
    t_samples = config.TRACE_SAMPLES
    size = 1
    while live and size <= len(live):
        hit = None
        for combo in itertools.combinations(live, size):
            if not budget.spend():
                logger.warning("decompose: gave up after %d candidate subsets", budget.cap)
                return False
            rows = [r for k in combo for r in classes[k]]
            if is_affine_linear(_mean_samples(values, poisoned, rows, t_samples)):
                hit = combo
                break
        if hit is None:
            size += 1
            continue
        for k in hit[1:]:
            uf.union(anchors[hit[0]], anchors[k])
            edges.append((anchors[hit[0]], anchors[k], "trace"))
        certified.add(anchors[hit[0]])
        live = [k for k in live if k not in hit]
    return True


def decompose(collection: WitnessCollection, settings: TrackerSettings,
              rng: Optional[SeededRNG] = None, loops: int = config.MONODROMY_LOOPS,
              cap: int = config.PARTITION_CAP) -> Partition:
    """
    Split a pure-dimensional witness collection into irreducible components.

    Blocks that no trace test certified are reported as unresolved.
    """
    rng = rng or make_rng(collection.seed)
    collection = collection.nonempty()
    dims = collection.dimensions()
    if len(dims) > 1:
        raise StructuralError(f"decompose needs a pure-dimensional collection, got dimensions {dims}")
    nodes = [(W.type, j) for W in collection for j in range(W.degree)]
    uf = UnionFind(nodes)
    if not dims or dims[0] == 0:
        return Partition(collection, [[n] for n in nodes], [True] * len(nodes))
    c = dims[0]
    edges: List[Tuple[Node, Node, str]] = []

    for W in collection:
        for a, b in monodromy_group(W, loops, rng, settings):
            if uf.union((W.type, a), (W.type, b)):
                edges.append(((W.type, a), (W.type, b), "monodromy"))
    for source, target in cross_slice_link(collection, settings, rng).edges:
        if uf.union(source, target):
            edges.append((source, target, "membership"))
    logger.info("decompose: %d points in %d blocks before trace tests", len(nodes), len(uf.blocks()))

    certified: set = set()
    budget = _CandidateBudget(cap)
    for f in slice_types(collection.structure, c - 1):
        try:
            setup = trace_setup(collection, f, rng, settings)
        except (TrackingError, PointCountChanged) as exc:
            logger.warning("decompose: trace setup for %s failed: %s", f, exc)
            continue
        if not setup.points:
            continue
        h = build_trace_homotopy(collection.system, setup.linear, [setup.segre], collection.chart, rng)
        rho = GeneralCoordinate.random(collection.structure, rng)
        values, poisoned = point_traces(setup.points, h, rho, settings)
        if not _certify_with_trace(uf, setup, values, poisoned, certified, edges, budget):
            break

    roots = {uf.find(n) for n in certified}
    blocks = uf.blocks()
    flags = [uf.find(block[0]) in roots for block in blocks]
    if not all(flags):
        logger.warning("decompose: %d blocks left unresolved", flags.count(False))
    return Partition(collection, blocks, flags, edges)


def sample_points(W: WitnessSet, count: int, rng: SeededRNG, settings: TrackerSettings) -> List[np.ndarray]:
    """count new points of the variety, by moving W to fresh random slices."""
    if not W.points:
        raise StructuralError(f"witness set {W.type} has no points to sample from")
    out: List[np.ndarray] = []
    while len(out) < count:
        moved = move_slice(W, random_slice(W.type, W.structure, rng), settings)
        out.extend(moved.points)
    return out[:count]
