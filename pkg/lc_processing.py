"""Log-canonicity of boundary divisors on Y by formal blow-ups of annotated points.

Every coefficient is an affine function a + b*t of one parameter t. A plain
boundary has b = 0 everywhere; lct questions scale a support by t; blended
boundaries interpolate two divisors. Each blow-up contributes one linear
constraint "exceptional coefficient <= 1", so the lc locus in t is an interval.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from curve_processing import NegativeCurveSet, negative_curve_set
from data_processing_common import InputError, InsufficientAnnotations, to_fraction
from decomposition_processing import is_nef, root_coordinates
from lattice_utils import DivisorClass, RationalDivisor, parse_class
from surface_processing import pydantic_message, read_json

logger = logging.getLogger(__name__)

# Denominator bound of the bisection cross-oracle.
BISECTION_DENOMINATOR = 64

TermKey = Union[int, str, DivisorClass]


@dataclass(frozen=True)
class Affine:
    """a + b*t."""
    a: Fraction
    b: Fraction = Fraction(0)

    @classmethod
    def of(cls, value) -> 'Affine':
        if isinstance(value, Affine):
            return value
        return cls(Fraction(value), Fraction(0))

    def __add__(self, other) -> 'Affine':
        other = Affine.of(other)
        return Affine(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other) -> 'Affine':
        other = Affine.of(other)
        return Affine(self.a - other.a, self.b - other.b)

    def __mul__(self, k) -> 'Affine':
        k = Fraction(k)
        return Affine(self.a * k, self.b * k)

    __rmul__ = __mul__

    def at(self, t) -> Fraction:
        return self.a + self.b * Fraction(t)

    @property
    def is_constant(self) -> bool:
        return self.b == 0


@dataclass(frozen=True)
class BoundaryTerm:
    """A curve of D(Y) (int id), a declared special curve (str tag), or a general member of a class."""
    key: TermKey
    coeff: Affine
    copy: int = 0

    @property
    def is_general(self) -> bool:
        return isinstance(self.key, DivisorClass)


@dataclass(frozen=True)
class BoundaryDivisor:
    terms: Tuple[BoundaryTerm, ...]

    @classmethod
    def of(cls, items: Sequence[Tuple[TermKey, object]]) -> 'BoundaryDivisor':
        return cls(tuple(BoundaryTerm(key, Affine.of(c)) for key, c in items))

    def scaled(self, factor) -> 'BoundaryDivisor':
        return BoundaryDivisor(tuple(BoundaryTerm(t.key, t.coeff * factor, t.copy) for t in self.terms))

    def at(self, t) -> 'BoundaryDivisor':
        return BoundaryDivisor(tuple(BoundaryTerm(x.key, Affine.of(x.coeff.at(t)), x.copy) for x in self.terms))

    def coefficients(self) -> List[Fraction]:
        return [term.coeff.a for term in self.terms]


@dataclass(frozen=True)
class Constraint:
    """expression <= 1 at the named place."""
    expression: Affine
    where: str
    lower: bool = False


@dataclass
class ClusterMember:
    name: str
    coeff: Affine
    multiplicity: int = 1


@dataclass
class ClusterState:
    """Curves through one point, their pairwise contact orders, and the depth reached."""
    members: List[ClusterMember]
    contact: Dict[Tuple[str, str], int] = field(default_factory=dict)
    depth: int = 0
    label: str = "p"

    def order(self, a: str, b: str) -> int:
        return self.contact.get((a, b), self.contact.get((b, a), 1))


@dataclass(frozen=True)
class LCResult:
    is_lc: bool
    witness: Optional[str] = None

    def __bool__(self):
        return self.is_lc


@dataclass(frozen=True)
class LCInterval:
    lo: Fraction
    hi: Fraction

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi


# ------------------------------------------------------------------ resolution

def term_class(spec, dy: NegativeCurveSet, key: TermKey) -> DivisorClass:
    if isinstance(key, int):
        return dy.by_id(key).cls
    if isinstance(key, str):
        return spec.tag_class(key)
    return key


def normalize_boundary(spec, D: BoundaryDivisor, dy: Optional[NegativeCurveSet] = None) -> BoundaryDivisor:
    """Map classes of D(Y) to curve ids and check general members are legitimate."""
    dy = dy or negative_curve_set(spec)
    terms = []
    for term in D.terms:
        key = term.key
        if isinstance(key, int):
            dy.by_id(key)
        elif isinstance(key, str):
            spec.tag_class(key)
        else:
            spec.lattice.check(key)
            curve_id = dy.id_of(key)
            if curve_id is not None:
                key = curve_id
            elif key.square() < 0 or not is_nef(dy, key):
                raise InsufficientAnnotations(
                    f"{key.pretty()} has no irreducible general member; declare the curve as an extra class "
                    "and annotate its incidences")
        terms.append(BoundaryTerm(key, term.coeff, term.copy))
    return BoundaryDivisor(tuple(terms))


def _member_name(spec, dy, key: TermKey) -> Optional[str]:
    if isinstance(key, int):
        return dy.by_id(key).cls.pretty()
    if isinstance(key, str):
        return key
    return None


def _ref_name(ref) -> str:
    return ref if isinstance(ref, str) else ref.pretty()


def _chain_contacts(spec, annotation, names: List[str]) -> Dict[Tuple[str, str], int]:
    """Contact orders at a root point, including depth of shared infinitely near points."""
    children: Dict[str, list] = {}
    for other in spec.annotations:
        if other.parent is not None:
            children.setdefault(other.parent, []).append(other)

    def shared_depth(point, a, b) -> int:
        best = 0
        for child in children.get(point.point_id, []):
            refs = [_ref_name(r) for r in child.refs()]
            if a in refs and b in refs:
                best = max(best, 1 + shared_depth(child, a, b))
        return best

    contact = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            declared = annotation.contact_order(*_lookup_refs(annotation, a, b))
            contact[(a, b)] = max(declared, 1 + shared_depth(annotation, a, b))
    return contact


def _lookup_refs(annotation, a: str, b: str):
    refs = {_ref_name(r): r for r in annotation.refs()}
    return refs[a], refs[b]


def collect_constraints(spec, D: BoundaryDivisor, dy: Optional[NegativeCurveSet] = None) -> List[Constraint]:
    """All linear conditions for (Y, D) to be lc (coefficients and exceptional discrepancies)."""
    dy = dy or negative_curve_set(spec)
    D = normalize_boundary(spec, D, dy)
    constraints = []
    coefficient_of: Dict[str, Affine] = {}
    for term in D.terms:
        label = _term_label(term)
        constraints.append(Constraint(term.coeff, f"coefficient of {label}"))
        constraints.append(Constraint(term.coeff, f"coefficient of {label}", lower=True))
        name = _member_name(spec, dy, term.key)
        if name is not None:
            coefficient_of[name] = coefficient_of.get(name, Affine(Fraction(0))) + term.coeff
    for name, coeff in coefficient_of.items():
        constraints.append(Constraint(coeff, f"total coefficient of {name}"))
    for annotation in spec.annotations:
        if annotation.parent is not None:
            continue
        members = []
        for ref, mult in annotation.members:
            name = _ref_name(ref)
            if name in coefficient_of:
                members.append(ClusterMember(name, coefficient_of[name], mult))
        if not members:
            continue
        contact = _chain_contacts(spec, annotation, [m.name for m in members])
        max_contact = max(list(contact.values()) + [1])
        state = ClusterState(members, contact, 0, annotation.point_id)
        _resolve(state, constraints, max_contact + 2)
    return constraints


def _term_label(term: BoundaryTerm) -> str:
    if isinstance(term.key, DivisorClass):
        return f"general member #{term.copy} of |{term.key.pretty()}|"
    return f"curve {term.key}"


def _resolve(state: ClusterState, constraints: List[Constraint], depth_limit: int):
    members = state.members
    transverse = all(state.order(a.name, b.name) == 1
                     for i, a in enumerate(members) for b in members[i + 1:])
    if len(members) <= 2 and transverse and all(m.multiplicity == 1 for m in members):
        return
    if state.depth >= depth_limit:
        raise InputError(f"Resolution of point {state.label} exceeds depth {depth_limit}; malformed annotation")
    exceptional = sum((m.coeff * m.multiplicity for m in members), Affine(Fraction(0))) - 1
    name = f"E[{state.label}/{state.depth + 1}]"
    constraints.append(Constraint(exceptional, f"exceptional curve {name}"))
    # union of members still tangent after the blow-up
    groups: List[List[ClusterMember]] = []
    for member in members:
        joined = [g for g in groups if any(state.order(member.name, o.name) >= 2 for o in g)]
        merged = [member]
        for g in joined:
            merged.extend(g)
            groups.remove(g)
        groups.append(merged)
    for group in groups:
        if len(group) < 2:
            continue
        contact = {}
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                contact[(a.name, b.name)] = max(1, state.order(a.name, b.name) - 1)
        child = ClusterState(
            [ClusterMember(m.name, m.coeff, 1) for m in group] + [ClusterMember(name, exceptional, 1)],
            contact, state.depth + 1, state.label)
        _resolve(child, constraints, depth_limit)


def lc_interval(spec, D: BoundaryDivisor, dy: Optional[NegativeCurveSet] = None) -> LCInterval:
    """Exact set of t in [0, 1] for which D(t) is an lc boundary."""
    lo, hi = Fraction(0), Fraction(1)
    constraints = collect_constraints(spec, D, dy)
    logger.debug("lc interval over %d constraints", len(constraints))
    for c in constraints:
        a, b = c.expression.a, c.expression.b
        # lower constraints: a + b t >= 0; upper: a + b t <= 1
        if c.lower:
            a, b = -a, -b
            limit = Fraction(0)
        else:
            limit = Fraction(1)
        if b == 0:
            if a > limit:
                return LCInterval(Fraction(1), Fraction(0))
        elif b > 0:
            hi = min(hi, (limit - a) / b)
        else:
            lo = max(lo, (limit - a) / b)
    return LCInterval(lo, hi)


def lc_verdict(spec, D: BoundaryDivisor, t=0, dy: Optional[NegativeCurveSet] = None) -> LCResult:
    """LC, or NotLC with the first violated condition. Coefficients are not validated."""
    for c in collect_constraints(spec, D, dy):
        value = c.expression.at(t)
        if c.lower:
            if value < 0:
                return LCResult(False, f"{c.where} is {value} < 0")
        elif value > 1:
            return LCResult(False, f"{c.where} is {value} > 1")
    return LCResult(True)


def lc_check(spec, D: BoundaryDivisor, t=0, dy: Optional[NegativeCurveSet] = None) -> LCResult:
    """Like lc_verdict, but a coefficient outside (0, 1] at t is an InputError."""
    check_coefficients(D.at(t))
    return lc_verdict(spec, D, t, dy)


def check_coefficients(D: BoundaryDivisor):
    for term in D.terms:
        if not term.coeff.is_constant:
            continue
        value = term.coeff.a
        if not 0 < value <= 1:
            raise InputError(f"Coefficient {value} of {_term_label(term)} lies outside (0, 1]")


def lct_pair(spec, support: BoundaryDivisor, dy: Optional[NegativeCurveSet] = None) -> Fraction:
    """Largest t <= 1 with t * support lc."""
    check_coefficients(support)
    scaled = BoundaryDivisor(tuple(BoundaryTerm(x.key, Affine(Fraction(0), x.coeff.a), x.copy)
                                   for x in support.terms))
    interval = lc_interval(spec, scaled, dy)
    if interval.is_empty:
        return Fraction(0)
    return interval.hi


def _farey(limit: int) -> List[Fraction]:
    return sorted({Fraction(p, q) for q in range(1, limit + 1) for p in range(0, q + 1)})


def lct_by_bisection(spec, support: BoundaryDivisor, limit: int = BISECTION_DENOMINATOR,
                     dy: Optional[NegativeCurveSet] = None) -> Fraction:
    """Largest Farey fraction (denominator <= limit) at which t * support is lc."""
    check_coefficients(support)
    candidates = _farey(limit)
    lo, hi = 0, len(candidates) - 1
    if not lc_verdict(spec, support.scaled(candidates[lo]), dy=dy):
        return Fraction(0)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if lc_verdict(spec, support.scaled(candidates[mid]), dy=dy):
            lo = mid
        else:
            hi = mid - 1
    return candidates[lo]


# ------------------------------------------------------------- certificates

def boundary_class(spec, D: BoundaryDivisor, dy: Optional[NegativeCurveSet] = None, t=0) -> Tuple[Fraction, ...]:
    dy = dy or negative_curve_set(spec)
    divisor = RationalDivisor.of((term_class(spec, dy, term.key), term.coeff.at(t)) for term in D.terms)
    return divisor.total_class(spec.lattice.rank)


def sums_to_anticanonical(spec, D: BoundaryDivisor, dy: Optional[NegativeCurveSet] = None, t=0) -> bool:
    return boundary_class(spec, D, dy, t) == tuple(Fraction(c) for c in spec.anticanonical.coeffs)


def sigma_contribution(spec, D: BoundaryDivisor, dy: Optional[NegativeCurveSet] = None, t=0) -> Fraction:
    """Sum of coefficients on components that survive on X (everything but (-2)-curves)."""
    dy = dy or negative_curve_set(spec)
    total = Fraction(0)
    for term in D.terms:
        cls = term_class(spec, dy, term.key)
        if isinstance(term.key, int) and cls.square() == -2:
            continue
        total += term.coeff.at(t)
    return total


def pullback_to_resolution(spec, D: BoundaryDivisor, dy: Optional[NegativeCurveSet] = None) -> BoundaryDivisor:
    """Add (-2)-curve coefficients so that K_Y + D is the pull-back of K_X + D_X."""
    dy = dy or negative_curve_set(spec)
    roots = [c.cls for c in dy.minus_two]
    kept = [t for t in D.terms if not (isinstance(t.key, int) and dy.by_id(t.key).cls in roots)]
    if not roots:
        return BoundaryDivisor(tuple(kept))
    residual = [Fraction(c) for c in spec.anticanonical.coeffs]
    for term in kept:
        cls = term_class(spec, dy, term.key)
        for i, c in enumerate(cls.coeffs):
            residual[i] -= term.coeff.a * c
    # residual = K_Y-trivial part: solve sum c_A A = -K - D_X projected onto the root span
    scale = math.lcm(*(value.denominator for value in residual))
    integral = DivisorClass(tuple(int(v * scale) for v in residual))
    coords = root_coordinates(roots, integral)
    if coords is None:
        raise InputError("K_X + D_X is not numerically trivial: the residual class leaves the span of the (-2)-curves")
    added = [BoundaryTerm(curve.id, Affine(c / scale)) for curve, c in zip(dy.minus_two, coords) if c]
    return BoundaryDivisor(tuple(kept) + tuple(added))


# ------------------------------------------------------------------ file schema

class BoundaryTermModel(BaseModel):
    model_config = ConfigDict(extra='forbid')
    curve: Union[int, str]
    coeff: Union[str, int]
    member: int = Field(0, ge=0)


_BOUNDARY_ADAPTER = TypeAdapter(List[BoundaryTermModel])


def boundary_from_data(spec, data, source: str = "<boundary>") -> BoundaryDivisor:
    try:
        items = _BOUNDARY_ADAPTER.validate_python(data)
    except ValidationError as e:
        raise InputError(pydantic_message(e, source)) from None
    tags = {tag for tag, _ in spec.extra_classes}
    terms = []
    for item in items:
        if isinstance(item.curve, int):
            key: TermKey = item.curve
        elif item.curve in tags:
            key = item.curve
        else:
            key = parse_class(item.curve, spec.n)
        terms.append(BoundaryTerm(key, Affine.of(to_fraction(item.coeff)), item.member))
    return BoundaryDivisor(tuple(terms))


def load_boundary(spec, path: str) -> BoundaryDivisor:
    return boundary_from_data(spec, read_json(path), source=path)
