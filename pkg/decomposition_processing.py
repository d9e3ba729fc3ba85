import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
from sympy import Matrix

from curve_processing import CurveKind, NegativeCurveSet, classes_with_invariants, negative_curve_set
from data_processing_common import CertificateInvalid, InputError, NoDenominator
from graph_processing import DualGraph
from lattice_utils import DivisorClass, RationalDivisor, anticanonical_degree, pairing
from simplex_processing import solve_lp

logger = logging.getLogger(__name__)

# Nef classes up to this -K degree stand in for "every prime divisor with D^2 >= 0".
AUDIT_MAX_DEGREE = 3


class FiberType(str, Enum):
    TYPE1 = "Type1"
    TYPE2 = "Type2"
    TYPE3 = "Type3"
    NON_CONFORMING = "NonConforming"


class SlaveMode(str, Enum):
    TOTAL = "total"
    EXCEPTIONAL = "exceptional"
    AUTO = "auto"


@dataclass(frozen=True)
class Decomposition:
    """target = sum coeff * class(curve id), coefficients positive integers."""
    terms: Tuple[Tuple[int, int], ...]
    target: DivisorClass

    def coefficient(self, curve_id: int) -> int:
        return dict(self.terms).get(curve_id, 0)


@dataclass(frozen=True)
class DenominatorResult:
    value: Fraction
    coefficients: Tuple[Tuple[int, Fraction], ...]


@dataclass(frozen=True)
class SlaveDivisor:
    terms: Tuple[Tuple[int, Fraction], ...]

    @classmethod
    def from_mapping(cls, mapping: Dict[int, Fraction]) -> 'SlaveDivisor':
        if any(Fraction(c) < 0 for c in mapping.values()):
            raise InputError("Slave divisor coefficients must be nonnegative")
        return cls(tuple(sorted((k, Fraction(v)) for k, v in mapping.items() if v != 0)))


@dataclass(frozen=True)
class SlaveBound:
    mode: SlaveMode
    bound: Fraction
    anticanonical_degree: Fraction
    delta: Fraction
    sigma_bound: Fraction
    audit_degree: int
    audited_classes: int = 0
    deficient: Tuple[int, ...] = field(default=())


@dataclass(frozen=True)
class BoundaryTermSpec:
    """A term of an LP boundary: a curve of D(Y) or general members of a movable class."""
    curve_id: Optional[int]
    movable: Optional[DivisorClass]
    coefficient: Fraction


@dataclass(frozen=True)
class MaximalBoundary:
    value: Fraction
    terms: Tuple[BoundaryTermSpec, ...]


@lru_cache(maxsize=256)
def _gram_inverse(roots: Tuple[DivisorClass, ...]) -> Tuple[Tuple[Fraction, ...], ...]:
    gram = Matrix([[a.dot(b) for b in roots] for a in roots])
    inverse = gram.inv()
    return tuple(tuple(Fraction(int(inverse[i, j].p), int(inverse[i, j].q)) for j in range(len(roots)))
                 for i in range(len(roots)))


def root_coordinates(roots: Sequence[DivisorClass], v: DivisorClass) -> Optional[Tuple[Fraction, ...]]:
    """Coordinates of v in the basis of simple roots, or None outside their span."""
    roots = tuple(roots)
    if not roots:
        return () if all(c == 0 for c in v.coeffs) else None
    inverse = _gram_inverse(roots)
    rhs = [v.dot(r) for r in roots]
    coords = tuple(sum((inverse[i][j] * rhs[j] for j in range(len(roots))), Fraction(0))
                   for i in range(len(roots)))
    rebuilt = RationalDivisor.of(zip(roots, coords)).total_class(len(v.coeffs))
    if rebuilt != tuple(Fraction(c) for c in v.coeffs):
        return None
    return coords


def _multisets(count: int, size: int, start: int = 0):
    if size == 0:
        yield ()
        return
    for i in range(start, count):
        for rest in _multisets(count, size - 1, i):
            yield (i,) + rest


def decompositions_of(spec, L: DivisorClass, dy: Optional[NegativeCurveSet] = None) -> List[Decomposition]:
    """All nonnegative integer decompositions of L over D(Y), canonically sorted."""
    lattice = spec.lattice
    lattice.check(L)
    degree = anticanonical_degree(lattice, L)
    if degree < 0:
        raise InputError(f"{L.pretty()} has negative anticanonical degree {degree}; it is not effective")
    dy = dy or negative_curve_set(spec)
    minus_one = list(dy.minus_one)
    roots = [c.cls for c in dy.minus_two]
    found = []
    for combo in _multisets(len(minus_one), degree):
        remainder = L
        for index in combo:
            remainder = remainder - minus_one[index].cls
        coords = root_coordinates(roots, remainder)
        if coords is None or any(c < 0 or c.denominator != 1 for c in coords):
            continue
        counts: Dict[int, int] = {}
        for index in combo:
            counts[minus_one[index].id] = counts.get(minus_one[index].id, 0) + 1
        for curve, c in zip(dy.minus_two, coords):
            if c:
                counts[curve.id] = int(c)
        found.append(Decomposition(tuple(sorted(counts.items())), L))
    found.sort(key=lambda dec: dec.terms)
    _check_sums(found, dy)
    logger.debug("%s: %d decompositions over %d curves", L.pretty(), len(found), len(dy))
    return found


def _check_sums(decompositions: Sequence[Decomposition], dy: NegativeCurveSet):
    for dec in decompositions:
        total = dec.target - dec.target
        for curve_id, coeff in dec.terms:
            total = total + dy.by_id(curve_id).cls * coeff
        if total != dec.target:
            raise AssertionError(f"Decomposition {dec.terms} does not re-sum to {dec.target.pretty()}")


def is_nef(dy: NegativeCurveSet, v: DivisorClass) -> bool:
    return all(v.dot(curve.cls) >= 0 for curve in dy.curves)


def nef_classes(spec, min_degree: int, max_degree: int, dy: Optional[NegativeCurveSet] = None) -> List[DivisorClass]:
    """Nef classes v with v^2 >= 0 and min_degree <= -K.v <= max_degree."""
    dy = dy or negative_curve_set(spec)
    d = spec.degree
    found = []
    for k in range(min_degree, max_degree + 1):
        # Hodge index: v^2 * K^2 <= (K.v)^2
        for square in range(0, (k * k) // d + 1):
            found.extend(v for v in classes_with_invariants(spec.n, k, square) if is_nef(dy, v))
    return sorted(set(found))


def fiber_classes(spec, dy: Optional[NegativeCurveSet] = None) -> List[DivisorClass]:
    """Conic-bundle classes: nef, L^2 = 0, -K.L = 2."""
    dy = dy or negative_curve_set(spec)
    return [v for v in classes_with_invariants(spec.n, 2, 0) if is_nef(dy, v)]


def nef_pencil_classes(spec, max_degree: int = AUDIT_MAX_DEGREE, dy: Optional[NegativeCurveSet] = None) -> List[DivisorClass]:
    return nef_classes(spec, 2, max_degree, dy)


def classify_fiber_decomposition(dec: Decomposition, g: DualGraph) -> FiberType:
    """Match a decomposition of a fiber class against the three tabulated shapes."""
    L = dec.target
    if L.square() != 0 or anticanonical_degree(g.lattice, L) != 2:
        raise InputError(f"{L.pretty()} is not a fiber class (needs L^2 = 0 and -K.L = 2)")
    coeff = dict(dec.terms)
    ends = [v for v in coeff if g.is_minus_one(v)]
    inner = [v for v in coeff if not g.is_minus_one(v)]
    induced = g.graph.subgraph(coeff).copy()
    if any(data['multiplicity'] != 1 for _, _, data in induced.edges(data=True)):
        return FiberType.NON_CONFORMING
    if not nx.is_connected(induced):
        return FiberType.NON_CONFORMING

    if len(ends) == 2 and all(c == 1 for c in coeff.values()):
        if _is_path_between(induced, ends[0], ends[1]):
            return FiberType.TYPE1
        return FiberType.NON_CONFORMING
    if len(ends) != 1 or coeff[ends[0]] != 2:
        return FiberType.NON_CONFORMING
    e = ends[0]
    doubled = [v for v in inner if coeff[v] == 2]
    simple = [v for v in inner if coeff[v] == 1]
    if len(simple) != 2 or len(doubled) + len(simple) != len(inner):
        return FiberType.NON_CONFORMING
    if not doubled:
        if all(induced.has_edge(e, a) for a in simple) and not induced.has_edge(*simple):
            return FiberType.TYPE2
        return FiberType.NON_CONFORMING
    chain = induced.subgraph([e] + doubled)
    if not nx.is_tree(chain) or max(deg for _, deg in chain.degree()) > 2 or chain.degree(e) != 1:
        return FiberType.NON_CONFORMING
    far = max(doubled, key=lambda v: nx.shortest_path_length(chain, e, v))
    for a in simple:
        if set(induced.neighbors(a)) != {far}:
            return FiberType.NON_CONFORMING
    return FiberType.TYPE3


def _is_path_between(graph: nx.Graph, a: int, b: int) -> bool:
    if not nx.is_tree(graph):
        return False
    if graph.number_of_nodes() == 2:
        return graph.has_edge(a, b)
    return graph.degree(a) == 1 and graph.degree(b) == 1 and max(deg for _, deg in graph.degree()) <= 2


def denominator(spec, dy: Optional[NegativeCurveSet] = None) -> DenominatorResult:
    """n(Y): the least possible max coefficient of -K written over D(Y)."""
    dy = dy or negative_curve_set(spec)
    curves = list(dy.curves)
    if not curves:
        raise NoDenominator("D(Y) is empty: -K is not a combination of negative curves")
    rank = spec.lattice.rank
    target = spec.anticanonical
    # variables: t, then one coefficient per curve
    size = len(curves) + 1
    A_eq = [[0] + [curve.cls.coeffs[row] for curve in curves] for row in range(rank)]
    b_eq = list(target.coeffs)
    A_ub = []
    for k in range(len(curves)):
        row = [0] * size
        row[0] = -1
        row[k + 1] = 1
        A_ub.append(row)
    b_ub = [0] * len(curves)
    result = solve_lp([1] + [0] * len(curves), A_eq, b_eq, A_ub, b_ub, lexicographic=True)
    if not result.is_optimal:
        raise NoDenominator(f"-K = {target.pretty()} is not in the nonnegative span of D(Y)")
    coefficients = tuple((curve.id, result.x[k + 1]) for k, curve in enumerate(curves))
    logger.debug("Denominator %s over %d curves", result.value, len(curves))
    return DenominatorResult(result.value, coefficients)


def _slave_pairings(spec, dy: NegativeCurveSet, slave: SlaveDivisor) -> Tuple[RationalDivisor, Fraction]:
    divisor = RationalDivisor.of((dy.by_id(i).cls, c) for i, c in slave.terms)
    return divisor, divisor.dot(spec.anticanonical)


def verify_slave_bound(spec, slave: SlaveDivisor, mode: SlaveMode = SlaveMode.TOTAL,
                       audit_degree: int = AUDIT_MAX_DEGREE, dy: Optional[NegativeCurveSet] = None) -> SlaveBound:
    """Upper bound on the boundary coefficient sum certified by a slave divisor."""
    dy = dy or negative_curve_set(spec)
    mode = SlaveMode(mode)
    if mode == SlaveMode.AUTO:
        exceptional = verify_slave_bound(spec, slave, SlaveMode.EXCEPTIONAL, audit_degree, dy)
        try:
            total = verify_slave_bound(spec, slave, SlaveMode.TOTAL, audit_degree, dy)
        except CertificateInvalid as e:
            logger.debug("Total slave audit failed at %s; using the exceptional bound", e.witness)
            return exceptional
        return total if total.sigma_bound <= exceptional.sigma_bound else exceptional

    divisor, degree = _slave_pairings(spec, dy, slave)
    required = 1 if mode == SlaveMode.TOTAL else 0
    audited = nef_classes(spec, 1, audit_degree, dy)
    for v in audited:
        value = divisor.dot(v)
        if value < required:
            raise CertificateInvalid(
                f"Slave divisor pairs {value} with the nef class {v.pretty()}; {mode.value} mode needs >= {required}",
                witness=v)
    delta = Fraction(0)
    deficient = []
    for curve in dy.curves:
        value = divisor.dot(curve.cls)
        gap = (1 - value) if curve.kind == CurveKind.MINUS_ONE else -value
        if gap > 0:
            delta += gap
            deficient.append(curve.id)
    bound = degree + delta
    if mode == SlaveMode.TOTAL:
        sigma_bound = bound
    else:
        sigma_bound = (spec.degree + bound) / 2
    return SlaveBound(mode, bound, degree, delta, sigma_bound, audit_degree, len(audited), tuple(deficient))


def sandwich(spec, slave: SlaveDivisor, dy: Optional[NegativeCurveSet] = None) -> Tuple[Fraction, Fraction]:
    """(1 + (d-1)/n(Y), (d + e)/2) with e the exceptional slave bound."""
    dy = dy or negative_curve_set(spec)
    n_y = denominator(spec, dy).value
    e = verify_slave_bound(spec, slave, SlaveMode.EXCEPTIONAL, dy=dy).bound
    return 1 + Fraction(spec.degree - 1) / n_y, Fraction(spec.degree + e) / 2


def movable_classes(spec, dy: Optional[NegativeCurveSet] = None) -> List[DivisorClass]:
    """Classes whose general members may enter a boundary: nef pencils and -K."""
    dy = dy or negative_curve_set(spec)
    found = set(nef_pencil_classes(spec, dy=dy))
    found.add(spec.anticanonical)
    return sorted(found)


def maximal_boundary(spec, dy: Optional[NegativeCurveSet] = None) -> MaximalBoundary:
    """Best boundary over D(Y) and general movable members (exact LP lower bound for sigma)."""
    dy = dy or negative_curve_set(spec)
    curves = list(dy.curves)
    movable = movable_classes(spec, dy)
    rank = spec.lattice.rank
    size = len(curves) + len(movable)
    columns = [c.cls for c in curves] + movable
    A_eq = [[cls.coeffs[row] for cls in columns] for row in range(rank)]
    b_eq = list(spec.anticanonical.coeffs)
    A_ub = []
    for k in range(len(curves)):
        row = [0] * size
        row[k] = 1
        A_ub.append(row)
    b_ub = [1] * len(curves)
    # maximize the coefficients on non-(-2) components
    cost = [(-1 if c.kind == CurveKind.MINUS_ONE else 0) for c in curves] + [-1] * len(movable)
    result = solve_lp(cost, A_eq, b_eq, A_ub, b_ub)
    if not result.is_optimal:
        raise NoDenominator("-K admits no boundary over D(Y) and the movable classes")
    terms = []
    for k, curve in enumerate(curves):
        if result.x[k]:
            terms.append(BoundaryTermSpec(curve.id, None, result.x[k]))
    for k, cls in enumerate(movable):
        value = result.x[len(curves) + k]
        if value:
            terms.append(BoundaryTermSpec(None, cls, value))
    return MaximalBoundary(-result.value, tuple(terms))
