"""
Sparse multihomogeneous polynomials over the complex numbers.

Variables are partitioned into groups, one per projective factor
P^{n_1} x ... x P^{n_k}. Polynomials keep a map monomial -> coefficient and
evaluate through a compiled dense exponent table so that whole systems and
their Jacobians come out of two vectorised numpy passes.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from exceptions import DimensionMismatch, MalformedChart, NotMultihomogeneous, StructuralError

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]


# =============================================================================
# VARIABLE STRUCTURE
# =============================================================================

@dataclass(frozen=True)
class VariableStructure:
    """Ordered variable groups; group i holds the n_i+1 coordinates of P^{n_i}."""
    groups: Tuple[Tuple[str, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if not groups:
            raise StructuralError("at least one variable group is required")
        names = [name for group in groups for name in group]
        if any(not group for group in groups):
            raise StructuralError("empty variable group")
        if len(set(names)) != len(names):
            raise StructuralError("variable names must be unique")

    @property
    def group_count(self) -> int:
        return len(self.groups)

    @property
    def group_sizes(self) -> Tuple[int, ...]:
        return tuple(len(g) for g in self.groups)

    @property
    def projective_dims(self) -> Tuple[int, ...]:
        """(n_1, ..., n_k)."""
        return tuple(len(g) - 1 for g in self.groups)

    @property
    def variable_names(self) -> Tuple[str, ...]:
        return tuple(name for group in self.groups for name in group)

    @property
    def total(self) -> int:
        return sum(self.group_sizes)

    @cached_property
    def group_slices(self) -> Tuple[slice, ...]:
        bounds = np.cumsum((0,) + self.group_sizes)
        return tuple(slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]))

    @cached_property
    def indicator(self) -> np.ndarray:
        """(total, k) 0/1 matrix mapping a variable to its group."""
        ind = np.zeros((self.total, self.group_count), dtype=int)
        for i, sl in enumerate(self.group_slices):
            ind[sl, i] = 1
        return ind

    @cached_property
    def _positions(self) -> Dict[str, int]:
        return {name: j for j, name in enumerate(self.variable_names)}

    def index_of(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def group_of(self, index: int) -> int:
        return int(np.argmax(self.indicator[index]))

    def unit(self, group: int) -> Tuple[int, ...]:
        return tuple(1 if i == group else 0 for i in range(self.group_count))


# =============================================================================
# POLYNOMIALS
# =============================================================================

class Polynomial:
    """A sparse polynomial in the variables of one VariableStructure."""

    def __init__(self, structure: VariableStructure, terms: Optional[Mapping[Monomial, complex]] = None):
        self.structure = structure
        clean: Dict[Monomial, complex] = {}
        for mono, coeff in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != structure.total:
                raise DimensionMismatch(
                    f"monomial has {len(mono)} exponents, structure has {structure.total} variables"
                )
            if any(e < 0 for e in mono):
                raise ValueError("exponents must be nonnegative")
            coeff = complex(coeff)
            if coeff != 0:
                clean[mono] = coeff
        self.terms = dict(sorted(clean.items(), reverse=True))
        self._multidegree: Optional[Tuple[int, ...]] = None

    # ---- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, structure: VariableStructure, value: complex) -> "Polynomial":
        return cls(structure, {(0,) * structure.total: value})

    @classmethod
    def variable(cls, structure: VariableStructure, name: str) -> "Polynomial":
        mono = [0] * structure.total
        mono[structure.index_of(name)] = 1
        return cls(structure, {tuple(mono): 1.0})

    @classmethod
    def linear_form(cls, structure: VariableStructure, coefficients: Sequence[complex]) -> "Polynomial":
        """Sum of coefficients[j] * variable j over all variables."""
        if len(coefficients) != structure.total:
            raise DimensionMismatch("linear form needs one coefficient per variable")
        terms = {}
        for j, c in enumerate(coefficients):
            mono = [0] * structure.total
            mono[j] = 1
            terms[tuple(mono)] = c
        return cls(structure, terms)

    # ---- arithmetic -----------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.structure != self.structure:
                raise StructuralError("polynomials live on different variable structures")
            return other
        return Polynomial.constant(self.structure, other)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            terms[mono] = terms.get(mono, 0) + c
        return Polynomial(self.structure, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.structure, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial(self.structure, {m: c * other for m, c in self.terms.items()})
        other = self._coerce(other)
        terms: Dict[Monomial, complex] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = tuple(a + b for a, b in zip(m1, m2))
                terms[mono] = terms.get(mono, 0) + c1 * c2
        return Polynomial(self.structure, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Polynomial":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = Polynomial.constant(self.structure, 1.0)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.structure == other.structure and self.terms == other.terms

    def __hash__(self):
        return hash((self.structure, tuple(self.terms.items())))

    def __repr__(self) -> str:
        return f"Polynomial({len(self.terms)} terms on {self.structure.group_sizes})"

    # ---- queries --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @cached_property
    def exponents(self) -> np.ndarray:
        if not self.terms:
            return np.zeros((0, self.structure.total), dtype=int)
        return np.array(list(self.terms.keys()), dtype=int)

    @cached_property
    def coefficients(self) -> np.ndarray:
        return np.array(list(self.terms.values()), dtype=complex)

    def evaluate(self, point) -> complex:
        point = _as_point(point, self.structure)
        if not self.terms:
            return 0j
        monomials = np.prod(point[None, :] ** self.exponents, axis=1)
        return complex(self.coefficients @ monomials)

    def term_scale(self, point) -> float:
        """Sum of |c_t| |m_t(point)|, the natural size of the value at point."""
        point = _as_point(point, self.structure)
        if not self.terms:
            return 0.0
        monomials = np.prod(point[None, :] ** self.exponents, axis=1)
        return float(np.sum(np.abs(self.coefficients * monomials)))

    def group_degrees(self) -> np.ndarray:
        """(terms, k) matrix of per-term group degrees."""
        return self.exponents @ self.structure.indicator


def multidegree_of(p: Polynomial) -> Tuple[int, ...]:
    """
    Return (g_1, ..., g_k) if every term of p has group degree g_i in group i.

    The zero polynomial is treated as having multidegree (0, ..., 0).

    Raises:
        NotMultihomogeneous: with the first pair of terms that disagree
    """
    if p._multidegree is not None:
        return p._multidegree
    if p.is_zero:
        degree = (0,) * p.structure.group_count
    else:
        degrees = p.group_degrees()
        mismatch = np.nonzero(np.any(degrees != degrees[0], axis=1))[0]
        if mismatch.size:
            monomials = list(p.terms.keys())
            raise NotMultihomogeneous(monomials[0], monomials[int(mismatch[0])])
        degree = tuple(int(g) for g in degrees[0])
    p._multidegree = degree
    return degree


def is_multihomogeneous(p: Polynomial) -> bool:
    try:
        multidegree_of(p)
    except NotMultihomogeneous:
        return False
    return True


def _as_point(point, structure: VariableStructure) -> np.ndarray:
    point = np.asarray(point, dtype=complex).ravel()
    if point.shape[0] != structure.total:
        raise DimensionMismatch(
            f"point has {point.shape[0]} coordinates, structure has {structure.total} variables"
        )
    return point


# =============================================================================
# SYSTEMS
# =============================================================================

class _CompiledSystem:
    """Stacked exponent tables for evaluating a list of polynomials at once."""

    def __init__(self, polynomials: Sequence[Polynomial], total: int):
        self.rows = len(polynomials)
        self.total = total
        exps, coefs, owners = [], [], []
        dexps, dcoefs, dslots = [], [], []
        for r, p in enumerate(polynomials):
            if p.is_zero:
                continue
            E = p.exponents
            exps.append(E)
            coefs.append(p.coefficients)
            owners.append(np.full(E.shape[0], r))
            for j in range(total):
                live = E[:, j] > 0
                if not np.any(live):
                    continue
                D = E[live].copy()
                dcoefs.append(p.coefficients[live] * D[:, j])
                D[:, j] -= 1
                dexps.append(D)
                dslots.append(np.full(D.shape[0], r * total + j))
        empty = np.zeros((0, total), dtype=int)
        self.exps = np.vstack(exps) if exps else empty
        self.coefs = np.concatenate(coefs) if coefs else np.zeros(0, complex)
        self.owners = np.concatenate(owners) if owners else np.zeros(0, int)
        self.dexps = np.vstack(dexps) if dexps else empty
        self.dcoefs = np.concatenate(dcoefs) if dcoefs else np.zeros(0, complex)
        self.dslots = np.concatenate(dslots) if dslots else np.zeros(0, int)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        vals = self.coefs * np.prod(x[None, :] ** self.exps, axis=1)
        return _bincount_complex(self.owners, vals, self.rows)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        vals = self.dcoefs * np.prod(x[None, :] ** self.dexps, axis=1)
        flat = _bincount_complex(self.dslots, vals, self.rows * self.total)
        return flat.reshape(self.rows, self.total)


def _bincount_complex(slots: np.ndarray, values: np.ndarray, length: int) -> np.ndarray:
    if length == 0:
        return np.zeros(0, dtype=complex)
    re = np.bincount(slots, weights=values.real, minlength=length)
    im = np.bincount(slots, weights=values.imag, minlength=length)
    return re + 1j * im


class PolynomialSystem:
    """An ordered list of polynomials sharing one VariableStructure."""

    def __init__(self, structure: VariableStructure, polynomials: Iterable[Polynomial] = ()):
        self.structure = structure
        self.polynomials: Tuple[Polynomial, ...] = tuple(polynomials)
        for p in self.polynomials:
            if p.structure != structure:
                raise StructuralError("all polynomials of a system must share its structure")

    def __len__(self) -> int:
        return len(self.polynomials)

    def __iter__(self):
        return iter(self.polynomials)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return PolynomialSystem(self.structure, self.polynomials[index])
        return self.polynomials[index]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolynomialSystem):
            return NotImplemented
        return self.structure == other.structure and self.polynomials == other.polynomials

    def __hash__(self):
        return hash((self.structure, self.polynomials))

    def __repr__(self) -> str:
        return f"PolynomialSystem({len(self)} polynomials on {self.structure.group_sizes})"

    def extended(self, more: Iterable[Polynomial]) -> "PolynomialSystem":
        return PolynomialSystem(self.structure, self.polynomials + tuple(more))

    def multidegrees(self) -> List[Tuple[int, ...]]:
        return [multidegree_of(p) for p in self.polynomials]

    @cached_property
    def _compiled(self) -> _CompiledSystem:
        return _CompiledSystem(self.polynomials, self.structure.total)

    def evaluate(self, point) -> np.ndarray:
        return self._compiled.evaluate(_as_point(point, self.structure))

    def jacobian(self, point) -> np.ndarray:
        return self._compiled.jacobian(_as_point(point, self.structure))

    def term_scales(self, point) -> np.ndarray:
        return np.array([p.term_scale(point) for p in self.polynomials])

    def satisfied_at(self, point, tol: float) -> bool:
        """Every |p(point)| <= tol * max(1, term scale of p at point)."""
        if not self.polynomials:
            return True
        values = np.abs(self.evaluate(point))
        scales = np.maximum(self.term_scales(point), 1.0)
        return bool(np.all(values <= tol * scales))


def evaluate(sys: PolynomialSystem, point) -> np.ndarray:
    return sys.evaluate(point)


def jacobian(sys: PolynomialSystem, point) -> np.ndarray:
    return sys.jacobian(point)


# =============================================================================
# HOMOGENIZATION
# =============================================================================

def homogenize(affine_sys: PolynomialSystem, grouping: Sequence[Sequence[str]],
               names: Optional[Sequence[str]] = None) -> PolynomialSystem:
    """
    Multihomogenize an affine system with one new coordinate per group.

    Args:
        affine_sys: system over the affine variables (any grouping)
        grouping: partition of the affine variable names into groups
        names: optional names for the homogenizing coordinates (default h0, h1, ...)

    Returns:
        System whose structure has groups (h_i, *grouping[i]); setting every
        h_i = 1 gives back affine_sys exactly.
    """
    affine_names = affine_sys.structure.variable_names
    flat = [name for group in grouping for name in group]
    if sorted(flat) != sorted(affine_names) or len(set(flat)) != len(flat):
        raise StructuralError("grouping must partition the affine variables")
    if names is None:
        taken = set(affine_names)
        names = []
        for i in range(len(grouping)):
            candidate = f"h{i}"
            while candidate in taken:
                candidate += "_"
            taken.add(candidate)
            names.append(candidate)
    if len(names) != len(grouping):
        raise StructuralError("need one homogenizing name per group")

    structure = VariableStructure(tuple((h,) + tuple(g) for h, g in zip(names, grouping)))
    source = affine_sys.structure
    columns = [[source.index_of(v) for v in g] for g in grouping]

    polys = []
    for p in affine_sys:
        if p.is_zero:
            polys.append(Polynomial(structure))
            continue
        E = p.exponents
        top = [int(E[:, cols].sum(axis=1).max()) for cols in columns]
        terms = {}
        for mono, coeff in p.terms.items():
            new = []
            for cols, d in zip(columns, top):
                part = [mono[c] for c in cols]
                new.append(d - sum(part))
                new.extend(part)
            terms[tuple(new)] = coeff
        polys.append(Polynomial(structure, terms))
    return PolynomialSystem(structure, polys)


def dehomogenize(sys: PolynomialSystem, names: Sequence[str]) -> PolynomialSystem:
    """Set the named coordinates to 1 and drop them from the structure."""
    drop = set(names)
    groups = tuple(tuple(v for v in g if v not in drop) for g in sys.structure.groups)
    structure = VariableStructure(tuple(g for g in groups if g))
    keep = [sys.structure.index_of(v) for v in structure.variable_names]
    polys = []
    for p in sys:
        terms: Dict[Monomial, complex] = {}
        for mono, coeff in p.terms.items():
            key = tuple(mono[j] for j in keep)
            terms[key] = terms.get(key, 0) + coeff
        polys.append(Polynomial(structure, terms))
    return PolynomialSystem(structure, polys)


def substitute(p: Polynomial, images: Sequence[Polynomial], structure: VariableStructure) -> Polynomial:
    """Replace variable j of p by images[j] (polynomials on structure)."""
    if len(images) != p.structure.total:
        raise DimensionMismatch("need one image per variable")
    powers: Dict[Tuple[int, int], Polynomial] = {}
    result = Polynomial(structure)
    for mono, coeff in p.terms.items():
        term = Polynomial.constant(structure, coeff)
        for j, e in enumerate(mono):
            if e:
                if (j, e) not in powers:
                    powers[(j, e)] = images[j] ** e
                term = term * powers[(j, e)]
        result = result + term
    return result


# =============================================================================
# RANDOMIZATION
# =============================================================================

def _check_hyperplanes(structure: VariableStructure, hyperplanes: Sequence[Polynomial]) -> None:
    if len(hyperplanes) != structure.group_count:
        raise MalformedChart("need one hyperplane at infinity per group")
    for i, h in enumerate(hyperplanes):
        if h.structure != structure or h.is_zero:
            raise MalformedChart(f"hyperplane {i} is zero or on another structure")
        if not is_multihomogeneous(h) or multidegree_of(h) != structure.unit(i):
            raise MalformedChart(f"hyperplane {i} must be linear in group {i} only")


class _HyperplanePowers:
    def __init__(self, structure: VariableStructure, hyperplanes: Sequence[Polynomial]):
        self.structure = structure
        self.hyperplanes = list(hyperplanes)
        self._cache: Dict[Tuple[int, ...], Polynomial] = {}

    def __call__(self, gap: Sequence[int]) -> Polynomial:
        gap = tuple(int(g) for g in gap)
        if gap not in self._cache:
            result = Polynomial.constant(self.structure, 1.0)
            for h, d in zip(self.hyperplanes, gap):
                if d:
                    result = result * h ** d
            self._cache[gap] = result
        return self._cache[gap]


def randomize(sys: PolynomialSystem, target_count: int, hyperplanes: Sequence[Polynomial], rng) -> PolynomialSystem:
    """
    Replace sys by target_count generic combinations [I | A] * sys.

    Output j is input_j plus random multiples of every input m >= target_count,
    each multiplied by the power of the hyperplanes at infinity that makes the
    degrees agree. If some tail degree is not below input_j's degree, output j is
    lifted to the componentwise maximum and input_j is multiplied up as well.
    """
    count = len(sys)
    if target_count > count or target_count < 0:
        raise StructuralError(f"cannot randomize {count} polynomials to {target_count}")
    _check_hyperplanes(sys.structure, hyperplanes)
    degrees = [np.array(d) for d in sys.multidegrees()]
    if target_count == count:
        return sys
    power = _HyperplanePowers(sys.structure, hyperplanes)
    tail = list(range(target_count, count))
    mix = rng.random_complex((target_count, len(tail)))
    outputs = []
    for j in range(target_count):
        top = np.maximum.reduce([degrees[j]] + [degrees[m] for m in tail])
        if np.any(top != degrees[j]):
            logger.debug("randomize: lifting output %d from %s to %s", j, degrees[j], top)
        out = power(top - degrees[j]) * sys[j]
        for col, m in enumerate(tail):
            out = out + complex(mix[j, col]) * (power(top - degrees[m]) * sys[m])
        outputs.append(out)
    return PolynomialSystem(sys.structure, outputs)


def square_randomize(sys: PolynomialSystem, hyperplanes: Sequence[Polynomial], rng) -> PolynomialSystem:
    """Generic full mixing of every equation with all the others, keeping the count."""
    _check_hyperplanes(sys.structure, hyperplanes)
    if len(sys) < 2:
        return sys
    degrees = [np.array(d) for d in sys.multidegrees()]
    top = np.maximum.reduce(degrees)
    power = _HyperplanePowers(sys.structure, hyperplanes)
    lifted = [power(top - d) * p for d, p in zip(degrees, sys)]
    mix = rng.random_complex((len(sys), len(sys)))
    outputs = []
    for j in range(len(sys)):
        out = lifted[j]
        for m in range(len(sys)):
            if m != j:
                out = out + complex(mix[j, m]) * lifted[m]
        outputs.append(out)
    return PolynomialSystem(sys.structure, outputs)


def square_up(sys: PolynomialSystem, count: int, hyperplanes: Sequence[Polynomial], rng) -> PolynomialSystem:
    """Randomize down to count equations when sys has more; identity otherwise."""
    if len(sys) <= count:
        return sys
    return randomize(sys, count, hyperplanes, rng)


# =============================================================================
# BEZOUT COUNTS
# =============================================================================

def bezout_number(degrees: Sequence[Sequence[int]], structure: VariableStructure) -> int:
    """
    Multihomogeneous Bezout number of a square system with the given multidegrees.

    Coefficient of prod alpha_i^{n_i} in prod_j sum_i d_ji alpha_i.
    """
    dims = structure.projective_dims
    if len(degrees) != sum(dims):
        raise StructuralError(
            f"Bezout number needs {sum(dims)} equations, got {len(degrees)}"
        )
    counts: Dict[Tuple[int, ...], int] = {(0,) * len(dims): 1}
    for degree in degrees:
        step: Dict[Tuple[int, ...], int] = {}
        for key, value in counts.items():
            for i, d in enumerate(degree):
                if d and key[i] < dims[i]:
                    nxt = key[:i] + (key[i] + 1,) + key[i + 1:]
                    step[nxt] = step.get(nxt, 0) + value * int(d)
        counts = step
    return counts.get(tuple(dims), 0)


def total_degree(degrees: Sequence[Sequence[int]]) -> int:
    """Classical Bezout number prod_j |d_j| (the 1-homogeneous count)."""
    result = 1
    for degree in degrees:
        result *= int(sum(degree))
    return result


def slice_types(structure: VariableStructure, dimension: Optional[int] = None) -> List[Tuple[int, ...]]:
    """All e with 0 <= e_i <= n_i (and |e| = dimension when given), descending lexicographic."""
    ranges = [range(n, -1, -1) for n in structure.projective_dims]
    types = [tuple(e) for e in itertools.product(*ranges)]
    if dimension is not None:
        types = [e for e in types if sum(e) == dimension]
    return types
