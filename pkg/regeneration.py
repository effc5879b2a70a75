"""
Multiregeneration: witness sets of V = {G_1, ..., G_l} one equation at a time.

Each stage splits the current witness points into those on the new
hypersurface G (carried forward unchanged) and those off it. Points off G are
regenerated onto a product S of linear forms with the multidegree of G, then
deformed from S to G. Endpoints on higher-dimensional components are removed
with the membership test.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

import config
from decompose import membership_test
from exceptions import DimensionMismatch
from models import SliceKey, SolveOptions, StageReport, TrackerSettings, Verdict
from poly_core import (Polynomial, PolynomialSystem, VariableStructure, multidegree_of, randomize,
                       slice_types, square_randomize, square_up)
from rng import SeededRNG, make_rng
from tracker import ChartSystem, Homotopy, is_full_rank, is_locally_isolated, track_all
from witness import (Chart, SliceFlag, WitnessCollection, WitnessSet, ambient_witness_point,
                     check_slice_type, cluster_points, point_equal, sort_key)

logger = logging.getLogger(__name__)

Points = List[np.ndarray]
Weighted = List[Tuple[np.ndarray, int]]


# =============================================================================
# SLICE-TYPE PRUNING
# =============================================================================

def can_reach(d: Sequence[int], finals: Sequence[SliceKey], remaining: Sequence[Sequence[int]]) -> bool:
    """
    Whether the remaining equations can still cut type d down to a final type.

    Needs a final f <= d and a matching of the units of d - f to distinct
    remaining equations, each unit in a group where its equation has
    positive degree.
    """
    for f in finals:
        if any(fi > di for fi, di in zip(f, d)):
            continue
        units = [i for i, (di, fi) in enumerate(zip(d, f)) for _ in range(di - fi)]
        if not units:
            return True
        if len(units) > len(remaining):
            continue
        adjacency = np.array([[1 if degree[i] > 0 else 0 for degree in remaining] for i in units])
        matched = maximum_bipartite_matching(csr_matrix(adjacency), perm_type="column")
        if np.all(matched >= 0):
            return True
    return False


# =============================================================================
# MULTIREGENERATION
# =============================================================================

class Multiregenerator:
    """Equation-by-equation solver on one chart and one nested slice flag."""

    def __init__(self, structure: VariableStructure, settings: TrackerSettings, rng: SeededRNG,
                 options: Optional[SolveOptions] = None, chart: Optional[Chart] = None,
                 flag: Optional[SliceFlag] = None):
        """
        Args:
            structure: variable groups of every system this instance solves
            settings: tracker settings for all homotopies
            rng: run RNG; charts, flags, union forms and gammas are drawn from it
            options: randomization, ordering and pruning choices
            chart: chart to work on (random when omitted)
            flag: nested slice flag (random when omitted)
        """
        self.structure = structure
        self.settings = settings
        self.rng = rng
        self.options = options or SolveOptions()
        self.chart = chart or Chart.random(structure, rng)
        self.flag = flag or SliceFlag.random(structure, rng)
        self.finals = self._final_types()
        self._union_forms: Dict[Tuple[SliceKey, int, int], np.ndarray] = {}
        self._squared: Dict[Tuple[int, int], PolynomialSystem] = {}

    def _final_types(self) -> Optional[List[SliceKey]]:
        if self.options.slice_types:
            return [check_slice_type(e, self.structure) for e in self.options.slice_types]
        if self.options.target_dimension is not None:
            return slice_types(self.structure, self.options.target_dimension)
        return None

    @property
    def ambient_dim(self) -> int:
        return sum(self.structure.projective_dims)

    def codim(self, e: Sequence[int]) -> int:
        return self.ambient_dim - sum(e)

    def squared(self, system: PolynomialSystem, codim: int) -> PolynomialSystem:
        """square_up(system, codim), drawn once per stage and codimension."""
        key = (len(system), codim)
        if key not in self._squared:
            self._squared[key] = square_up(system, codim, self.chart.hyperplanes(), self.rng)
        return self._squared[key]

    def _gamma(self) -> complex:
        return complex(self.rng.random_complex())

    def _group_form(self, group: int, coeffs: np.ndarray) -> Polynomial:
        row = np.zeros(self.structure.total, dtype=complex)
        row[self.structure.group_slices[group]] = coeffs
        return Polynomial.linear_form(self.structure, row)

    def union_form(self, d: SliceKey, group: int, j: int) -> Polynomial:
        """
        s_group^(j) for targets of type d.

        For j = 1 this is the flag form completing L^d in that group, so the
        witness points of type d + delta_group already lie on it.
        """
        if j == 1 and d[group] < self.structure.projective_dims[group]:
            return self.flag.form_polynomial(d, group)
        key = (tuple(d), group, j)
        if key not in self._union_forms:
            self._union_forms[key] = self.rng.random_complex(self.structure.group_sizes[group])
        return self._group_form(group, self._union_forms[key])

    def union_product(self, d: SliceKey, degree: Sequence[int]) -> Polynomial:
        """S_d = product of the s_i^(j), with multidegree equal to degree."""
        product = Polynomial.constant(self.structure, 1.0)
        for i, g in enumerate(degree):
            for j in range(1, g + 1):
                product = product * self.union_form(d, i, j)
        return product

    # ---- preparation ------------------------------------------------------

    def prepare(self, system: PolynomialSystem) -> PolynomialSystem:
        """Check the system, apply the equation order, randomize when asked."""
        if system.structure != self.structure:
            raise DimensionMismatch("system does not match the variable structure")
        degrees = system.multidegrees()
        equations = list(system)
        if self.options.order == "degree":
            order = sorted(range(len(equations)), key=lambda j: sum(degrees[j]))
            equations = [equations[j] for j in order]
        prepared = PolynomialSystem(self.structure, equations)
        if self.options.randomize and len(prepared) > 1:
            hyperplanes = self.chart.hyperplanes()
            if len(prepared) > self.ambient_dim:
                prepared = randomize(prepared, self.ambient_dim, hyperplanes, self.rng)
            else:
                prepared = square_randomize(prepared, hyperplanes, self.rng)
            logger.info("randomized the input to %d equations", len(prepared))
        return prepared

    # ---- one stage ----------------------------------------------------------

    def _on_hypersurface(self, G: Polynomial, point: np.ndarray) -> bool:
        return abs(G.evaluate(point)) <= config.ON_HYPERSURFACE_TOL * G.term_scale(point)

    def regenerate_to_union(self, X: PolynomialSystem, witness: Dict[SliceKey, Points],
                            degree: Sequence[int], report: StageReport,
                            keep: Callable[[SliceKey], bool] = lambda d: True) -> Dict[SliceKey, Points]:
        """
        Witness points of X ∩ S ∩ L^d for every reachable d = e - delta_i.

        Args:
            X: equations solved so far
            witness: points of X ∩ L^e off the new hypersurface, per e
            degree: multidegree g of the new equation
            report: counts union paths and failures
            keep: slice types worth producing

        Returns:
            Start points per d for the deformation S_d -> G.
        """
        starts: Dict[SliceKey, Points] = {}
        for e in sorted(witness, reverse=True):
            points = witness[e]
            if not points:
                continue
            for i, g in enumerate(degree):
                if g == 0 or e[i] == 0:
                    continue
                d = tuple(v - 1 if m == i else v for m, v in enumerate(e))
                if not keep(d):
                    continue
                bucket = starts.setdefault(d, [])
                bucket.extend(p.copy() for p in points)
                if g < 2:
                    continue
                fixed = self.squared(X, self.codim(e)).extended(self.flag.slice_for(d).polynomials())
                M = PolynomialSystem(self.structure, [self.flag.form_polynomial(d, i)])
                for j in range(2, g + 1):
                    target = PolynomialSystem(self.structure, [self.union_form(d, i, j)])
                    h = Homotopy(fixed, M, target, self.chart, gamma=self._gamma())
                    outcomes = track_all(h, points, self.settings)
                    report.union_paths += len(points)
                    for outcome in outcomes:
                        if outcome.success:
                            bucket.append(outcome.endpoint)
                        else:
                            report.failures += 1
        return starts

    def deform_to_hypersurface(self, X: PolynomialSystem, G: Polynomial, starts: Dict[SliceKey, Points],
                               report: StageReport) -> Dict[SliceKey, Points]:
        """
        Track S_d -> G inside X ∩ L^d for every d.

        Endpoints that fail the residual check against X ∪ {G} are counted as
        rejected and dropped.
        """
        degree = multidegree_of(G)
        full = X.extended([G])
        target = PolynomialSystem(self.structure, [G])
        endpoints: Dict[SliceKey, Points] = {}
        for d in sorted(starts, reverse=True):
            points = starts[d]
            report.bump("start_points", d, len(points))
            fixed = self.squared(X, self.codim(d) - 1).extended(self.flag.slice_for(d).polynomials())
            start = PolynomialSystem(self.structure, [self.union_product(d, degree)])
            h = Homotopy(fixed, start, target, self.chart, gamma=self._gamma())
            kept = []
            for outcome in track_all(h, points, self.settings):
                if outcome.failed:
                    report.failures += 1
                    continue
                tol = config.RESIDUAL_TOL if outcome.success else config.SINGULAR_RESIDUAL_TOL
                if not full.satisfied_at(outcome.endpoint, tol):
                    report.bump("rejected", d)
                    continue
                kept.append(outcome.endpoint)
            endpoints[d] = kept
        return endpoints

    def junk_filter(self, system: PolynomialSystem, d: SliceKey, candidates: Weighted,
                    higher: WitnessCollection, report: StageReport) -> Weighted:
        """
        Drop candidates that lie on a component of dimension above |d|.

        A point with a full-rank sliced Jacobian is isolated and kept at once.
        Others go through the membership test against higher: members are
        junk, certified non-members are kept. Points the test cannot place
        (or that have no higher sets to test against) are kept only if they
        pass is_locally_isolated; inconclusive ones are counted either way.
        """
        check = ChartSystem(self.squared(system, self.codim(d)).extended(self.flag.slice_for(d).polynomials()),
                            self.chart)
        kept = []
        for point, multiplicity in candidates:
            J = check.jacobian(point)
            if J.shape[0] == J.shape[1] and is_full_rank(J):
                kept.append((point, multiplicity))
                continue
            verdict = None
            if higher.total_points():
                verdict = membership_test(higher, point, self.settings, self.rng).verdict
            if verdict is Verdict.MEMBER:
                report.bump("nonisolated", d)
                continue
            if verdict is Verdict.INCONCLUSIVE:
                report.bump("inconclusive", d)
            if verdict is not Verdict.NOT_MEMBER and not is_locally_isolated(check, point, self.rng):
                report.bump("nonisolated", d)
                continue
            kept.append((point, multiplicity))
        return kept

    def _dedupe(self, entries: Weighted) -> Weighted:
        points = [p for p, _ in entries]
        return [(rep, sum(entries[m][1] for m in members))
                for rep, members in cluster_points(points, self.chart)]

    def _witness_set(self, system: PolynomialSystem, e: SliceKey, entries: Weighted) -> WitnessSet:
        entries = sorted(entries, key=lambda item: sort_key(item[0], self.chart))
        return WitnessSet(system, self.flag.slice_for(e), self.chart, [p for p, _ in entries],
                          [m for _, m in entries], self.rng.seed)

    def stage(self, index: int, X: PolynomialSystem, G: Polynomial, witness: Dict[SliceKey, Weighted],
              keep: Callable[[SliceKey], bool]) -> Tuple[Dict[SliceKey, Weighted], StageReport]:
        """Intersect the witness sets of X with the hypersurface G."""
        degree = multidegree_of(G)
        report = StageReport(index, len(X) + 1, degree)
        self._squared.clear()
        full = X.extended([G])

        carried: Dict[SliceKey, Weighted] = {}
        off: Dict[SliceKey, Points] = {}
        for e, entries in witness.items():
            flags = [self._on_hypersurface(G, p) for p, _ in entries]
            on = [entry for entry, hit in zip(entries, flags) if hit]
            report.carried[e] = len(on)
            report.nonsolutions[e] = len(entries) - len(on)
            if on:
                carried[e] = on
            rest = [p for (p, _), hit in zip(entries, flags) if not hit]
            if rest:
                off[e] = rest

        starts = self.regenerate_to_union(X, off, degree, report, keep)
        endpoints = self.deform_to_hypersurface(X, G, starts, report)

        result: Dict[SliceKey, Weighted] = {}
        for d in sorted(set(carried) | set(endpoints), key=lambda e: (sum(e), e), reverse=True):
            fresh = self._dedupe([(p, 1) for p in endpoints.get(d, [])])
            known = carried.get(d, [])
            new = []
            for point, multiplicity in fresh:
                if any(point_equal(point, q, self.chart) for q, _ in known):
                    report.bump("nonisolated", d)
                else:
                    new.append((point, multiplicity))
            if new and self.options.junk_filter:
                sets = {e: self._witness_set(full, e, entries) for e, entries in result.items()
                        if sum(e) > sum(d) and entries}
                higher = WitnessCollection(full, self.chart, self.rng.seed, sets)
                new = self.junk_filter(full, d, new, higher, report)
            entries = known + new
            if entries:
                result[d] = entries

        # pruned types stay in result only long enough to serve as junk references
        result = {d: entries for d, entries in result.items() if keep(d)}
        for d, entries in result.items():
            report.witness_points[d] = len(entries)

        logger.info("stage %d: %d start points, %d union paths, %d witness points, %d failures",
                    index, report.total_starts, report.union_paths, report.total_witness_points,
                    report.failures)
        return result, report

    # ---- whole run ----------------------------------------------------------

    def cascade(self, system: PolynomialSystem) -> Tuple[WitnessCollection, List[StageReport]]:
        """Run every stage on an already prepared system."""
        degrees = system.multidegrees()
        top = tuple(self.structure.projective_dims)
        witness: Dict[SliceKey, Weighted] = {top: [(ambient_witness_point(self.flag, self.chart), 1)]}
        X = PolynomialSystem(self.structure)
        reports: List[StageReport] = []
        for index, G in enumerate(system):
            remaining = degrees[index + 1:]
            if self.finals is None:
                keep = lambda d: True
            else:
                keep = lambda d, rest=remaining: can_reach(d, self.finals, rest)
            witness, report = self.stage(index, X, G, witness, keep)
            reports.append(report)
            X = X.extended([G])
        if self.finals is not None:
            witness = {e: entries for e, entries in witness.items() if e in self.finals}
        sets = {e: self._witness_set(X, e, entries) for e, entries in witness.items()}
        provenance = {
            "equations": str(len(system)),
            "randomized": str(self.options.randomize),
            "order": self.options.order,
            "start_points": str(sum(r.total_starts for r in reports)),
            "union_paths": str(sum(r.union_paths for r in reports)),
            "failures": str(sum(r.failures for r in reports)),
        }
        return WitnessCollection(X, self.chart, self.rng.seed, sets, provenance), reports

    def run(self, system: PolynomialSystem) -> Tuple[WitnessCollection, List[StageReport]]:
        return self.cascade(self.prepare(system))


def multiregenerate(system: PolynomialSystem, options: Optional[SolveOptions] = None,
                    settings: Optional[TrackerSettings] = None, rng: Optional[SeededRNG] = None,
                    chart: Optional[Chart] = None) -> Tuple[WitnessCollection, List[StageReport]]:
    """
    Witness sets for every slice type of the variety of system.

    Returns:
        (collection, one StageReport per equation)
    """
    solver = Multiregenerator(system.structure, settings or TrackerSettings.from_config(),
                              rng or make_rng(), options, chart)
    return solver.run(system)


# =============================================================================
# PERTURBED SOLVING
# =============================================================================

@dataclass
class PerturbedResult:
    """Isolated solutions recovered by the parameter homotopy, clustered."""
    system: Optional[PolynomialSystem] = None
    chart: Optional[Chart] = None
    points: List[np.ndarray] = field(default_factory=list)
    multiplicities: List[int] = field(default_factory=list)
    reports: List[StageReport] = field(default_factory=list)
    paths: int = 0
    failures: int = 0

    @property
    def total(self) -> int:
        return sum(self.multiplicities)

    def cluster_sizes(self) -> Dict[int, int]:
        """multiplicity -> number of solutions with it."""
        sizes: Dict[int, int] = {}
        for m in self.multiplicities:
            sizes[m] = sizes.get(m, 0) + 1
        return dict(sorted(sizes.items()))


def perturbed_solve(system: PolynomialSystem, options: Optional[SolveOptions] = None,
                    settings: Optional[TrackerSettings] = None, rng: Optional[SeededRNG] = None,
                    chart: Optional[Chart] = None, epsilon_scale: float = 1.0) -> PerturbedResult:
    """
    Isolated solutions of a square system through a generic perturbation.

    Solves G_j + eps_j * prod_i H_i^{g_ji} = 0 by multiregeneration, then
    tracks those solutions back along G + t*eps*H^g to t = 0 and clusters the
    endpoints; a cluster's size is its multiplicity. epsilon_scale = 0 solves
    the system directly.
    """
    settings = settings or TrackerSettings.from_config()
    rng = rng or make_rng()
    options = replace(options or SolveOptions(), target_dimension=0, slice_types=None)
    solver = Multiregenerator(system.structure, settings, rng, options, chart)
    equations = solver.prepare(system)

    if epsilon_scale == 0:
        collection, reports = solver.cascade(equations)
        result = PerturbedResult(equations, solver.chart, reports=reports)
        for W in collection:
            result.points.extend(W.points)
            result.multiplicities.extend(W.multiplicities)
        result.paths = sum(r.total_starts + r.union_paths for r in reports)
        result.failures = sum(r.failures for r in reports)
        return result

    hyperplanes = solver.chart.hyperplanes()
    perturbed = []
    for G in equations:
        power = Polynomial.constant(solver.structure, 1.0)
        for h, g in zip(hyperplanes, multidegree_of(G)):
            if g:
                power = power * h ** g
        perturbed.append(G + complex(epsilon_scale * rng.random_complex()) * power)
    perturbed = PolynomialSystem(solver.structure, perturbed)

    collection, reports = solver.cascade(perturbed)
    starts = [p for W in collection for p, m in zip(W.points, W.multiplicities) for _ in range(m)]
    h = Homotopy(PolynomialSystem(solver.structure), perturbed, equations, solver.chart)
    outcomes = track_all(h, starts, settings)

    result = PerturbedResult(equations, solver.chart, reports=reports, paths=len(outcomes))
    endpoints = []
    for outcome in outcomes:
        if outcome.failed:
            result.failures += 1
        else:
            endpoints.append(outcome.endpoint)
    clusters = cluster_points(endpoints, solver.chart)
    clusters.sort(key=lambda item: sort_key(item[0], solver.chart))
    for rep, members in clusters:
        result.points.append(rep)
        result.multiplicities.append(len(members))
    logger.info("perturbed solve: %d endpoints in %d clusters, %d failures",
                len(endpoints), len(clusters), result.failures)
    return result
