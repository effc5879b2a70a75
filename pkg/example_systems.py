"""
Builders for the worked example systems and the benchmark families.

Every builder returns ready-made PolynomialSystems (and charts, slices and
known points where an example fixes them) so tests and the demo command need
no hand-written .msys files. Random constants always come from the caller's RNG.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from poly_core import Polynomial, PolynomialSystem, VariableStructure, homogenize
from rng import SeededRNG
from witness import Chart, LinearSlice, SegreSlice


def _variables(structure: VariableStructure) -> Dict[str, Polynomial]:
    return {name: Polynomial.variable(structure, name) for name in structure.variable_names}


def _affine(names: Sequence[str]) -> Tuple[VariableStructure, Dict[str, Polynomial]]:
    structure = VariableStructure((tuple(names),))
    return structure, _variables(structure)


def _constant(rng: SeededRNG) -> complex:
    return complex(rng.random_complex())


def _dot(u: Sequence, w: Sequence):
    return sum(a * b for a, b in zip(u, w))


def _cross(u: Sequence, w: Sequence) -> list:
    return [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]]


def _scale(c: complex, u: Sequence) -> list:
    return [complex(c) * a for a in u]


def _add(*vectors: Sequence) -> list:
    return [sum(parts) for parts in zip(*vectors)]


P1_P1 = VariableStructure((("x0", "x1"), ("y0", "y1")))
P2_P2 = VariableStructure((("x0", "x1", "x2"), ("y0", "y1", "y2")))
P2_P1 = VariableStructure((("x0", "x1", "x2"), ("y0", "y1")))


# =============================================================================
# SMALL WORKED EXAMPLES
# =============================================================================

def parabola() -> PolynomialSystem:
    """x1^2*y0 - x0^2*y1 on P1 x P1: multidegree 1 w^(1,0) + 2 w^(0,1)."""
    v = _variables(P1_P1)
    return PolynomialSystem(P1_P1, [v["x1"] ** 2 * v["y0"] - v["x0"] ** 2 * v["y1"]])


@dataclass
class MoveExample:
    system: PolynomialSystem
    chart: Chart
    start: LinearSlice
    target: LinearSlice
    start_points: List[np.ndarray]
    end_points: List[np.ndarray]


def parabola_move() -> MoveExample:
    """Move the (0,1) witness points of the parabola from y0 = 5 y1 to 2 y0 = y1."""
    root5 = np.sqrt(5.0)
    root2 = np.sqrt(2.0)
    return MoveExample(
        system=parabola(),
        chart=Chart(P1_P1, [[1, 0], [0, 1]]),
        start=LinearSlice(P1_P1, [np.zeros((0, 2)), [[1, -5]]]),
        target=LinearSlice(P1_P1, [np.zeros((0, 2)), [[2, -1]]]),
        start_points=[np.array([1, 1 / root5, 5, 1], dtype=complex),
                      np.array([1, -1 / root5, 5, 1], dtype=complex)],
        end_points=[np.array([1, root2, 0.5, 1], dtype=complex),
                    np.array([1, -root2, 0.5, 1], dtype=complex)],
    )


def binomials() -> Tuple[PolynomialSystem, Chart]:
    """Four binomials on P2 x P2 whose two-equation randomization has degrees (3,1), (2,2)."""
    v = _variables(P2_P2)
    x0, x1, x2, y0, y1, y2 = (v[n] for n in P2_P2.variable_names)
    system = PolynomialSystem(P2_P2, [
        x1 ** 3 * y1 - x2 ** 3 * y2,
        x1 * x2 * y0 ** 2 - x0 ** 2 * y1 * y2,
        x1 ** 2 * y0 - x0 * x2 * y2,
        x2 ** 2 * y0 - x0 * x1 * y1,
    ])
    return system, Chart(P2_P2, [[1, 2, -3], [2, -5, 3]])


@dataclass
class MembershipExample:
    system: PolynomialSystem
    point: np.ndarray
    slice: LinearSlice
    slice_through_point: LinearSlice
    other_endpoint: np.ndarray
    multidegree: List[Tuple[Tuple[int, ...], int]] = field(default_factory=list)


def surface_membership() -> MembershipExample:
    """A surface in P2 x P2 with degree 2 w^(2,0) + 2 w^(1,1) + 1 w^(0,2) and the point ([1:0:0],[1:0:3])."""
    v = _variables(P2_P2)
    x0, x1, x2, y0, y1, y2 = (v[n] for n in P2_P2.variable_names)
    system = PolynomialSystem(P2_P2, [
        x1 * y1 - x2 * y2,
        x0 * y1 * y2 - x1 * y0 ** 2,
        x0 * y1 ** 2 - x2 * y0 ** 2,
    ])
    return MembershipExample(
        system=system,
        point=np.array([1, 0, 0, 1, 0, 3], dtype=complex),
        slice=LinearSlice(P2_P2, [[[1, 1, 3]], [[1, -2j, -1]]]),
        slice_through_point=LinearSlice(P2_P2, [[[0, 1, 3]], [[1, -2j, -1 / 3]]]),
        other_endpoint=np.array([3 + 4j, 3, -1, 1 - 2j, -1, 3], dtype=complex),
        multidegree=[((2, 0), 2), ((1, 1), 2), ((0, 2), 1)],
    )


def four_components() -> PolynomialSystem:
    """
    Three equations on P2 x P2 whose solution set has two surfaces and two curves.

    S1 = P2 x [1:0:0], S2 = {x2 = y2 = 0}, and curves C1, C2. Final witness
    counts: (2,0):1, (1,1):1, (1,0):1, (0,1):2.
    """
    v = _variables(P2_P2)
    x0, x1, x2, y0, y1, y2 = (v[n] for n in P2_P2.variable_names)
    return PolynomialSystem(P2_P2, [
        x0 * y2 - x2 * y1,
        x1 * y2 - x2 * y1,
        x0 * y1 * y2 - x1 * y0 * y2,
    ])


@dataclass
class CurveLinkExample:
    """Dimension-one witness data for four_components on the chart x2 = y2 = 1."""
    system: PolynomialSystem
    chart: Chart
    slice_10: LinearSlice
    slice_01: LinearSlice
    slice_01_through_m1: LinearSlice
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    m3_endpoint: np.ndarray


def curve_links() -> CurveLinkExample:
    return CurveLinkExample(
        system=four_components(),
        chart=Chart(P2_P2, [[0, 0, 1], [0, 0, 1]]),
        slice_10=LinearSlice(P2_P2, [[[1, 1, -2]], np.zeros((0, 3))]),
        slice_01=LinearSlice(P2_P2, [np.zeros((0, 3)), [[1, -2, -1]]]),
        slice_01_through_m1=LinearSlice(P2_P2, [np.zeros((0, 3)), [[1 + 1j, -2 - 2j, 1 + 1j]]]),
        m1=np.array([1, 1, 1, 1, 1, 1], dtype=complex),
        m2=np.array([-1, -1, 1, -1, -1, 1], dtype=complex),
        m3=np.array([0, 0, 1, 1, 0, 1], dtype=complex),
        m3_endpoint=np.array([0, 0, 1, -1, 0, 1], dtype=complex),
    )


@dataclass
class TraceExample:
    system: PolynomialSystem
    chart: Chart
    segre: SegreSlice
    rho: SegreSlice
    points: List[np.ndarray]


def trace_curves() -> TraceExample:
    """
    Curves in P2 x P1 cut by one Segre form, with closed-form slice points.

    m1 and m2 lie on the lines x0 = 0, y0 = +-y1; m3, m4 and m5 lie on the
    third component. All five points give a linear trace; m1, m2 with any
    two of the others do not.
    """
    v = _variables(P2_P1)
    x0, x1, x2, y0, y1 = (v[n] for n in P2_P1.variable_names)
    system = PolynomialSystem(P2_P1, [
        (y1 ** 2 - y0 ** 2) * x1 - y1 ** 2 * x0,
        (y1 ** 2 - y0 ** 2) * x2 - y1 ** 2 * x0,
    ])
    root = np.sqrt(61 / 30)
    points = [
        [0, -10 / 21, 1, 1, 1],
        [0, -10 / 21, 1, -1, 1],
        [-31 / 30, 1, 1, root, 1],
        [-31 / 30, 1, 1, -root, 1],
        [3 / 4, 1, 1, 1 / 2, 1],
    ]
    return TraceExample(
        system=system,
        chart=Chart(P2_P1, [[0, 0, 1], [0, 1]]),
        segre=SegreSlice(P2_P1, [[6 / 7, 3 / 5, 2 / 7], [1, -1 / 2]]),
        rho=SegreSlice(P2_P1, [[2 / 7, -5 / 12, 3 / 17], [4 / 13, -3 / 14]]),
        points=[np.array(p, dtype=complex) for p in points],
    )


def double_root() -> PolynomialSystem:
    """(x1 - x0)^2 on P1: one solution of multiplicity two."""
    structure = VariableStructure((("x0", "x1"),))
    v = _variables(structure)
    return PolynomialSystem(structure, [(v["x1"] - v["x0"]) ** 2])


# =============================================================================
# BENCHMARK FAMILIES
# =============================================================================

SIX_R_GROUPINGS = {
    1: [["z2", "z3", "z4", "z5"]],
    2: [["z2", "z4"], ["z3", "z5"]],
    4: [["z2"], ["z3"], ["z4"], ["z5"]],
}


def six_r(rng: SeededRNG, homogeneity: int = 2) -> PolynomialSystem:
    """
    Inverse kinematics of a general 6R serial chain, 12 equations in z2..z5.

    homogeneity picks the grouping of the unit vectors: 1, 2 ({z2,z4},{z3,z5})
    or 4 (one group each). Link constants are drawn from rng.
    """
    if homogeneity not in SIX_R_GROUPINGS:
        raise ValueError(f"no 6R grouping with {homogeneity} groups")
    names = [f"z{k}_{c}" for k in (2, 3, 4, 5) for c in (1, 2, 3)]
    structure, v = _affine(names)
    z = {k: [v[f"z{k}_{c}"] for c in (1, 2, 3)] for k in (2, 3, 4, 5)}
    z1 = [_constant(rng) for _ in range(3)]
    z6 = [_constant(rng) for _ in range(3)]
    p = [_constant(rng) for _ in range(3)]
    a = {i: _constant(rng) for i in range(1, 6)}
    c = {i: _constant(rng) for i in range(1, 6)}
    d = {i: _constant(rng) for i in range(2, 6)}

    z1_poly = [Polynomial.constant(structure, value) for value in z1]
    z6_poly = [Polynomial.constant(structure, value) for value in z6]
    position = _add(
        _scale(a[1], _cross(z1_poly, z[2])), _scale(d[2], z[2]),
        _scale(a[2], _cross(z[2], z[3])), _scale(d[3], z[3]),
        _scale(a[3], _cross(z[3], z[4])), _scale(d[4], z[4]),
        _scale(a[4], _cross(z[4], z[5])), _scale(d[5], z[5]),
        _scale(a[5], _cross(z[5], z6_poly)),
    )
    equations = [
        _dot(z1_poly, z[2]) - c[1],
        _dot(z[5], z6_poly) - c[5],
        *[position[m] - p[m] for m in range(3)],
        _dot(z[2], z[3]) - c[2],
        _dot(z[3], z[4]) - c[3],
        _dot(z[4], z[5]) - c[4],
        _dot(z[2], z[2]) - 1,
        _dot(z[4], z[4]) - 1,
        _dot(z[3], z[3]) - 1,
        _dot(z[5], z[5]) - 1,
    ]
    grouping = [[f"{k}_{c}" for k in group for c in (1, 2, 3)] for group in SIX_R_GROUPINGS[homogeneity]]
    hom_names = ["h_" + "".join(group) for group in SIX_R_GROUPINGS[homogeneity]]
    return homogenize(PolynomialSystem(structure, equations), grouping, hom_names)


def lagrange_points(rng: SeededRNG, homogeneity: int = 5) -> PolynomialSystem:
    """
    Lagrange points of a restricted three-body problem with a generic mass ratio.

    64 solutions counting multiplicity; the 5-group structure is
    {rho1},{w},{d13},{d23},{x,y}.
    """
    names = ["rho1", "w", "d13", "d23", "x", "y"]
    structure, v = _affine(names)
    rho1, w, d13, d23, x, y = (v[n] for n in names)
    mu = _constant(rng)
    rho2 = 1 - rho1
    k = w * d13 ** 3 * d23 ** 3 - mu * d23 ** 3 - d13 ** 3
    equations = [
        w * rho1 - 1,
        w * rho2 - mu,
        (rho1 - x) ** 2 + y ** 2 - d13 ** 2,
        (rho2 + x) ** 2 + y ** 2 - d23 ** 2,
        k * x + rho1 * mu * d23 ** 3 - rho2 * d13 ** 3,
        k * y,
    ]
    grouping = [["rho1"], ["w"], ["d13"], ["d23"], ["x", "y"]] if homogeneity == 5 else [names]
    hom_names = [f"h{i}" for i in range(len(grouping))]
    return homogenize(PolynomialSystem(structure, equations), grouping, hom_names)


def rank_deficiency(rng: SeededRNG, homogeneity: int = 2) -> PolynomialSystem:
    """
    Skew-symmetric S(Ay + b) with two kernel vectors B(1,0,l1..l4), B(0,1,l5..l8).

    12 bilinear equations in y (4) and l (8); the rank-4 locus is a
    codimension 9 component.
    """
    ys = [f"y{i}" for i in range(1, 5)]
    ls = [f"l{i}" for i in range(1, 9)]
    structure, v = _affine(ys + ls)
    A = rng.random_complex((15, 4))
    b = rng.random_complex(15)
    B = rng.random_complex((6, 6))
    x = [sum(complex(A[r, c]) * v[ys[c]] for c in range(4)) + complex(b[r]) for r in range(15)]
    zero = Polynomial(structure)
    S = [[zero] * 6 for _ in range(6)]
    entries = iter(x)
    for i in range(6):
        for j in range(i + 1, 6):
            S[i][j] = next(entries)
            S[j][i] = -S[i][j]
    one = Polynomial.constant(structure, 1.0)
    kernels = [[one, zero] + [v[n] for n in ls[:4]], [zero, one] + [v[n] for n in ls[4:]]]
    equations = []
    for kernel in kernels:
        Bk = [sum(complex(B[i, j]) * kernel[j] for j in range(6)) for i in range(6)]
        equations.extend(sum(S[i][m] * Bk[m] for m in range(6)) for i in range(6))
    grouping = [ys, ls] if homogeneity == 2 else [ys + ls]
    hom_names = [f"h{i}" for i in range(len(grouping))]
    return homogenize(PolynomialSystem(structure, equations), grouping, hom_names)


# =============================================================================
# RANDOM SYSTEMS
# =============================================================================

def monomials_of_degree(structure: VariableStructure, degree: Sequence[int]) -> List[Tuple[int, ...]]:
    """Every exponent vector with group degrees equal to degree."""
    per_group = []
    for size, g in zip(structure.group_sizes, degree):
        choices = []
        for combo in itertools.combinations_with_replacement(range(size), g):
            exps = [0] * size
            for index in combo:
                exps[index] += 1
            choices.append(exps)
        per_group.append(choices)
    return [tuple(e for part in parts for e in part) for parts in itertools.product(*per_group)]


def random_hypersurface(structure: VariableStructure, degree: Sequence[int], rng: SeededRNG) -> Polynomial:
    """A generic polynomial of the given multidegree."""
    monomials = monomials_of_degree(structure, degree)
    coefficients = rng.random_complex(len(monomials))
    return Polynomial(structure, {m: complex(c) for m, c in zip(monomials, coefficients)})


def random_system(structure: VariableStructure, degrees: Sequence[Sequence[int]],
                  rng: SeededRNG) -> PolynomialSystem:
    return PolynomialSystem(structure, [random_hypersurface(structure, d, rng) for d in degrees])


def multilinear_system(count: int, rng: SeededRNG) -> PolynomialSystem:
    """count generic multilinear forms on (P1)^count."""
    structure = VariableStructure(tuple((f"a{i}", f"b{i}") for i in range(count)))
    return random_system(structure, [(1,) * count] * count, rng)


# =============================================================================
# DEMO
# =============================================================================

DEMOS = {
    "parabola": parabola,
    "surface": lambda: surface_membership().system,
    "four_components": four_components,
    "trace_curves": lambda: trace_curves().system,
}
