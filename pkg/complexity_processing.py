"""sigma and gamma of a du Val del Pezzo surface, with a verified boundary certificate.

The route is chosen from the model, the degree and the shape of the dual graph
of negative curves; every exact answer carries a boundary divisor that is
re-checked (class sum, coefficient range, log-canonicity, coefficient sum)
before the report is returned.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple

from catalog_processing import SlaveRowMode, catalog_boundary, lp_boundary, match_tree_surface
from curve_processing import NegativeCurveSet, negative_curve_set
from data_processing_common import (
    InputError,
    ModelInconsistencyError,
    NoDenominator,
    VerificationError,
    format_fraction,
    format_interval,
)
from decomposition_processing import (
    AUDIT_MAX_DEGREE,
    SlaveMode,
    decompositions_of,
    denominator,
    verify_slave_bound,
)
from graph_processing import (
    Cycle,
    DualGraph,
    NonSNC,
    classify_non_snc,
    find_min_content_cycle,
    is_tree,
    verify_cycle_complement,
)
from lattice_utils import DivisorClass
from lc_processing import (
    Affine,
    BoundaryDivisor,
    BoundaryTerm,
    lc_check,
    lc_interval,
    lc_verdict,
    sigma_contribution,
    sums_to_anticanonical,
    term_class,
)
from surface_processing import (
    SurfaceModel,
    SurfaceSpec,
    blow_up,
    legal_point_specs,
    picard_rank_of_X,
    validate_spec,
)

logger = logging.getLogger(__name__)

__all__ = [
    'AUDIT_MAX_DEGREE', 'ComplexityReport', 'Route', 'analyze', 'analyze_blowups',
    'check_theorem_membership', 'gamma_of', 'sigma_upper',
]

# sigma values allowed for singular surfaces of low degree
THEOREM_SIGMA = {
    4: {Fraction(3, 2), Fraction(5, 2), Fraction(3), Fraction(4)},
    3: {Fraction(4, 3), Fraction(2), Fraction(5, 2), Fraction(3)},
    2: {Fraction(7, 6), Fraction(3, 2), Fraction(2)},
    1: {Fraction(1)},
}

# number of (-1)-curves on a smooth surface of degree 2..5
_SMOOTH_LINE_COUNT = {5: 10, 4: 16, 3: 27, 2: 56}


class Route(str, Enum):
    SMOOTH = "Smooth"
    HIGH_DEGREE = "HighDegree"
    DEGREE_ONE = "DegreeOne"
    CYCLE_COMPLEMENT = "CycleComplement"
    NON_SNC_SPECIAL = "NonSNCSpecial"
    TREE_CATALOG = "TreeCatalog"
    BOUNDS_ONLY = "BoundsOnly"


@dataclass
class ComplexityReport:
    name: Optional[str]
    degree: int
    model: str
    singularity: str
    rho_X: int
    route: Route
    sigma: Optional[Fraction] = None
    sigma_interval: Optional[Tuple[Fraction, Fraction]] = None
    certificate: Optional[BoundaryDivisor] = field(default=None, repr=False)
    certificate_terms: List[dict] = field(default_factory=list)
    cycle: Optional[Tuple[int, ...]] = None
    catalog_entry: Optional[str] = None
    denominator: Optional[Fraction] = None
    slave_bound: Optional[Fraction] = None
    in_theorem: Optional[bool] = None
    notes: List[str] = field(default_factory=list)

    @property
    def is_exact(self) -> bool:
        return self.sigma is not None

    @property
    def gamma(self) -> Optional[Fraction]:
        if self.sigma is None:
            return None
        return 2 + self.rho_X - self.sigma

    @property
    def complement_index(self) -> Optional[int]:
        """Least N with N * certificate integral; the certificate is then an N-complement."""
        if self.certificate is None:
            return None
        return math.lcm(*(term.coeff.a.denominator for term in self.certificate.terms))

    @property
    def gamma_interval(self) -> Optional[Tuple[Fraction, Fraction]]:
        if self.sigma_interval is None:
            return None
        lo, hi = self.sigma_interval
        return 2 + self.rho_X - hi, 2 + self.rho_X - lo

    def to_dict(self) -> dict:
        def rational(value):
            return None if value is None else format_fraction(value)

        return {
            "name": self.name,
            "degree": self.degree,
            "model": self.model,
            "singularity": self.singularity,
            "rho_X": self.rho_X,
            "route": self.route.value,
            "sigma": rational(self.sigma),
            "sigma_interval": format_interval(self.sigma_interval),
            "gamma": rational(self.gamma),
            "gamma_interval": format_interval(self.gamma_interval),
            "certificate": self.certificate_terms or None,
            "cycle": list(self.cycle) if self.cycle else None,
            "catalog_entry": self.catalog_entry,
            "denominator": rational(self.denominator),
            "slave_bound": rational(self.slave_bound),
            "complement_index": self.complement_index,
            "in_theorem": self.in_theorem,
            "notes": list(self.notes),
        }

    def render_text(self) -> str:
        if self.is_exact:
            sigma, gamma = format_fraction(self.sigma), format_fraction(self.gamma)
        else:
            sigma = "[{}, {}]".format(*format_interval(self.sigma_interval))
            gamma = "[{}, {}]".format(*format_interval(self.gamma_interval))
        lines = [f"sigma={sigma} gamma={gamma} route={self.route.value}"]
        if self.name:
            lines.append(f"name={self.name}")
        lines.append(f"degree={self.degree} model={self.model} singularity={self.singularity} rho_X={self.rho_X}")
        if self.catalog_entry:
            lines.append(f"catalog_entry={self.catalog_entry}")
        if self.cycle:
            lines.append("cycle=" + ','.join(str(v) for v in self.cycle))
        if self.denominator is not None:
            lines.append(f"denominator={format_fraction(self.denominator)}")
        if self.slave_bound is not None:
            lines.append(f"slave_bound={format_fraction(self.slave_bound)}")
        if self.complement_index is not None:
            lines.append(f"complement_index={self.complement_index}")
        if self.in_theorem is not None:
            lines.append(f"in_theorem={str(self.in_theorem).lower()}")
        for term in self.certificate_terms:
            lines.append(f"  {term['coeff']} * {term['curve']} [{term['class']}]")
        for note in self.notes:
            lines.append(f"note: {note}")
        return '\n'.join(lines)


# ------------------------------------------------------------ certificates

def describe_boundary(spec: SurfaceSpec, D: BoundaryDivisor, dy: NegativeCurveSet) -> List[dict]:
    described = []
    for term in D.terms:
        cls = term_class(spec, dy, term.key)
        if isinstance(term.key, DivisorClass):
            curve = f"general member #{term.copy} of |{cls.pretty()}|"
        else:
            curve = str(term.key)
        described.append({"curve": curve, "class": cls.pretty(), "coeff": format_fraction(term.coeff.a)})
    return described


def verify_certificate(spec: SurfaceSpec, D: BoundaryDivisor, sigma: Fraction, dy: NegativeCurveSet):
    """Class sum -K, coefficients in (0, 1], lc, and coefficient sum sigma."""
    for term in D.terms:
        if not term.coeff.is_constant or not 0 < term.coeff.a <= 1:
            raise VerificationError(f"Certificate coefficient {term.coeff.a} on {term.key} lies outside (0, 1]")
    if not sums_to_anticanonical(spec, D, dy):
        raise VerificationError("Certificate does not add up to -K")
    result = lc_check(spec, D, dy=dy)
    if not result:
        raise VerificationError(f"Certificate is not log-canonical: {result.witness}")
    total = sigma_contribution(spec, D, dy)
    if total != sigma:
        raise VerificationError(f"Certificate coefficients add up to {total}, expected {sigma}")


def _general(cls: DivisorClass, copies: int = 1, coeff=1) -> List[BoundaryTerm]:
    return [BoundaryTerm(cls, Affine.of(coeff), k) for k in range(copies)]


def _curve_terms(ids, coeff=1) -> List[BoundaryTerm]:
    return [BoundaryTerm(i, Affine.of(coeff)) for i in ids]


def _at(D: BoundaryDivisor, t) -> BoundaryDivisor:
    fixed = D.at(t)
    return BoundaryDivisor(tuple(term for term in fixed.terms if term.coeff.a != 0))


# --------------------------------------------------------------- sigma bounds

def sigma_upper(spec: SurfaceSpec) -> Fraction:
    if spec.model == SurfaceModel.P1XP1:
        return Fraction(4)
    if spec.model == SurfaceModel.F2:
        return Fraction(3)
    if spec.is_smooth:
        return Fraction(min(spec.degree, 12 - spec.degree))
    return Fraction(spec.degree)


def _report(spec: SurfaceSpec, route: Route, **kwargs) -> ComplexityReport:
    return ComplexityReport(
        name=spec.name,
        degree=spec.degree,
        model=spec.model.value,
        singularity=spec.singularity,
        rho_X=picard_rank_of_X(spec),
        route=route,
        **kwargs,
    )


def _exact(spec, route, sigma, D, dy, **kwargs) -> ComplexityReport:
    verify_certificate(spec, D, sigma, dy)
    return _report(spec, route, sigma=sigma, certificate=D,
                   certificate_terms=describe_boundary(spec, D, dy), **kwargs)


def _smooth_certificate(spec: SurfaceSpec, dy: NegativeCurveSet) -> Tuple[BoundaryDivisor, List[str]]:
    d = spec.degree
    lattice = spec.lattice
    H = lattice.hyperplane()
    if d == 9:
        return BoundaryDivisor(tuple(_general(H, 3))), ["three general lines"]
    if d == 8:
        E1 = lattice.exceptional(1)
        terms = _curve_terms([dy.id_of(E1)]) + _general(H - E1, 2) + _general(H)
        return BoundaryDivisor(tuple(terms)), ["toric boundary E1 + 2(H - E1) + H"]
    if d == 7:
        E1, E2 = lattice.exceptional(1), lattice.exceptional(2)
        terms = (_curve_terms([dy.id_of(E1), dy.id_of(E2), dy.id_of(H - E1 - E2)])
                 + _general(H - E1) + _general(H - E2))
        return BoundaryDivisor(tuple(terms)), ["toric boundary E1 + E2 + (H - E1 - E2) + (H - E1) + (H - E2)"]
    if d == 6:
        return BoundaryDivisor(tuple(_curve_terms(c.id for c in dy.minus_one))), ["hexagon of (-1)-curves"]
    if d == 1:
        return BoundaryDivisor(tuple(_general(spec.anticanonical))), ["general member of |-K|"]
    count = _SMOOTH_LINE_COUNT[d]
    if len(dy.minus_one) != count:
        raise ModelInconsistencyError(f"Smooth surface of degree {d} has {len(dy.minus_one)} (-1)-curves, not {count}")
    weight = Fraction(d, count)
    D = BoundaryDivisor(tuple(_curve_terms((c.id for c in dy.minus_one), weight)))
    return D, [f"{format_fraction(weight)} times every (-1)-curve; lc checked under the snc default"]


def _lower_bound_boundaries(spec, dy) -> List[Tuple[Fraction, BoundaryDivisor, str]]:
    """Boundaries that give lower bounds on sigma when they are lc."""
    found = []
    try:
        result = denominator(spec, dy)
    except NoDenominator:
        result = None
    if result is not None and result.value > 0:
        weight = 1 / result.value
        terms = [BoundaryTerm(i, Affine.of(weight * c)) for i, c in result.coefficients if c]
        if weight < 1:
            terms.append(BoundaryTerm(spec.anticanonical, Affine.of(1 - weight)))
        D = BoundaryDivisor(tuple(terms))
        found.append((sigma_contribution(spec, D, dy), D, "1/n(Y) D_K + (1 - 1/n(Y)) C"))
    try:
        D = lp_boundary(spec, dy)
        found.append((sigma_contribution(spec, D, dy), D, "maximal boundary LP"))
    except NoDenominator:
        pass
    return found


def _bounds_only(spec, dy, notes, **kwargs) -> ComplexityReport:
    lower = Fraction(1)
    for value, D, label in _lower_bound_boundaries(spec, dy):
        if lc_verdict(spec, D, dy=dy) and value > lower:
            lower = value
            notes.append(f"lower bound {format_fraction(value)} from {label}")
    upper = sigma_upper(spec)
    if lower == upper:
        notes.append("lower and upper bounds meet")
    return _report(spec, Route.BOUNDS_ONLY, sigma_interval=(lower, upper), notes=notes, **kwargs)


# ---------------------------------------------------------------- routes

def _blended_certificate(spec, dy, g: DualGraph, cycle: Cycle) -> Optional[Tuple[Fraction, BoundaryDivisor]]:
    """Largest t with t * (cycle sum) + (1 - t) * F lc, over decompositions F of -K."""
    best = None
    on_cycle = set(cycle.nodes)
    for dec in decompositions_of(spec, spec.anticanonical, dy):
        coefficients = dict(dec.terms)
        ids = sorted(on_cycle | set(coefficients))
        terms = []
        for curve_id in ids:
            f = Fraction(coefficients.get(curve_id, 0))
            c = Fraction(1 if curve_id in on_cycle else 0)
            terms.append(BoundaryTerm(curve_id, Affine(f, c - f)))
        blend = BoundaryDivisor(tuple(terms))
        interval = lc_interval(spec, blend, dy)
        if interval.is_empty or interval.hi == 0:
            continue
        if best is None or interval.hi > best[0]:
            best = (interval.hi, _at(blend, interval.hi))
    return best


def _two_complement(spec, dy) -> Optional[BoundaryDivisor]:
    """1/2 F for an integral F in |-2K| over D(Y) with coefficients <= 2 and lc."""
    for dec in decompositions_of(spec, spec.anticanonical * 2, dy):
        if any(c > 2 for _, c in dec.terms):
            continue
        D = BoundaryDivisor(tuple(BoundaryTerm(i, Affine(Fraction(c, 2))) for i, c in dec.terms))
        if lc_verdict(spec, D, dy=dy):
            return D
    return None


def _cycle_route(spec, dy, g: DualGraph) -> ComplexityReport:
    d = spec.degree
    cycle = find_min_content_cycle(g, d)
    if cycle.content < d:
        verify_cycle_complement(spec, g, cycle)
    snc = classify_non_snc(g, spec.annotations)
    if d == 2 and cycle.content > 2:
        D = _two_complement(spec, dy)
        if D is None:
            return _bounds_only(spec, dy, [f"no content-2 cycle and no lc 2-complement (min content {cycle.content})"])
        return _exact(spec, Route.NON_SNC_SPECIAL, Fraction(2), D, dy, cycle=cycle.nodes,
                      notes=["2-complement from a decomposition of -2K"])
    if cycle.content > d:
        return _bounds_only(spec, dy, [f"minimal cycle content {cycle.content} exceeds the degree {d}"],
                            cycle=cycle.nodes)
    verify_cycle_complement(spec, g, cycle)
    if snc == NonSNC.SNC:
        D = BoundaryDivisor(tuple(_curve_terms(cycle.nodes)))
        return _exact(spec, Route.CYCLE_COMPLEMENT, Fraction(d), D, dy, cycle=cycle.nodes,
                      notes=["unit-coefficient cycle sum (1-complement)"])
    blended = _blended_certificate(spec, dy, g, cycle)
    if blended is None:
        return _bounds_only(spec, dy, [f"{snc.value} configuration: no lc blend of the cycle with a decomposition of -K"],
                            cycle=cycle.nodes)
    t, D = blended
    return _exact(spec, Route.NON_SNC_SPECIAL, Fraction(d), D, dy, cycle=cycle.nodes,
                  notes=[f"{snc.value} configuration: cycle blended with weight t={format_fraction(t)}"])


def _tree_route(spec, dy, g: DualGraph) -> ComplexityReport:
    try:
        n_y = denominator(spec, dy).value
    except NoDenominator:
        n_y = None
    match = match_tree_surface(spec, g)
    if match is None:
        return _bounds_only(spec, dy, ["tree surface outside the catalog"], denominator=n_y)
    mode = {
        SlaveRowMode.TOTAL: SlaveMode.TOTAL,
        SlaveRowMode.EXCEPTIONAL: SlaveMode.EXCEPTIONAL,
        SlaveRowMode.CONTRACTION: SlaveMode.AUTO,
    }[match.entry.slave_mode]
    bound = verify_slave_bound(spec, match.slave_divisor(), mode, dy=dy)
    sigma = match.sigma
    notes = [f"boundary {match.entry.formula}"]
    if bound.sigma_bound < sigma:
        raise VerificationError(
            f"{match.name}: slave bound {bound.sigma_bound} is below the tabulated sigma {sigma}")
    if match.entry.slave_mode == SlaveRowMode.CONTRACTION:
        notes.append("upper bound from the contraction; slave bound checked to dominate sigma")
    elif bound.sigma_bound != sigma:
        logger.warning("%s: slave bound %s is not sharp (sigma %s)", match.name,
                       format_fraction(bound.sigma_bound), format_fraction(sigma))
        notes.append(f"slave bound {format_fraction(bound.sigma_bound)} is not sharp")
    if n_y is not None and 1 + Fraction(spec.degree - 1) / n_y > sigma:
        raise VerificationError(f"{match.name}: sigma {sigma} lies below 1 + (d - 1)/n(Y)")
    D = catalog_boundary(match, dy)
    return _exact(spec, Route.TREE_CATALOG, sigma, D, dy, catalog_entry=match.name,
                  denominator=n_y, slave_bound=bound.sigma_bound, notes=notes)


def analyze(spec: SurfaceSpec) -> ComplexityReport:
    """Pick the route for spec and return a report with a verified certificate or honest bounds."""
    if spec.singularity is None:
        spec = validate_spec(spec)
    d = spec.degree
    if spec.model == SurfaceModel.P1XP1:
        report = _report(spec, Route.HIGH_DEGREE, sigma=Fraction(4),
                         notes=["toric boundary: two fibers of each ruling"])
    elif spec.model == SurfaceModel.F2:
        report = _report(spec, Route.HIGH_DEGREE, sigma=Fraction(3),
                         notes=["toric boundary: two rulings through the vertex and a section at infinity"])
    else:
        dy = negative_curve_set(spec)
        if spec.is_smooth:
            D, notes = _smooth_certificate(spec, dy)
            report = _exact(spec, Route.SMOOTH, sigma_upper(spec), D, dy, notes=notes)
        elif d == 1:
            D = BoundaryDivisor(tuple(_general(spec.anticanonical)))
            report = _exact(spec, Route.DEGREE_ONE, Fraction(1), D, dy, notes=["general member of |-K|"])
        elif d >= 7:
            sigma = Fraction(2 + picard_rank_of_X(spec))
            report = _exact(spec, Route.HIGH_DEGREE, sigma, lp_boundary(spec, dy), dy,
                            notes=["maximal boundary LP"])
        else:
            g = DualGraph(spec.lattice, dy.curves)
            report = _tree_route(spec, dy, g) if is_tree(g) else _cycle_route(spec, dy, g)
    if report.is_exact:
        report.in_theorem = check_theorem_membership(spec, report)
        if not report.in_theorem:
            logger.warning("%s: sigma=%s is outside the per-degree set for d=%d",
                           spec.name or "surface", format_fraction(report.sigma), d)
    logger.info("%s: route %s", spec.name or f"degree {d} {spec.singularity}", report.route.value)
    return report


def gamma_of(spec: SurfaceSpec):
    """Exact gamma, or the (lo, hi) interval when only bounds are known."""
    report = analyze(spec)
    return report.gamma if report.is_exact else report.gamma_interval


def check_theorem_membership(spec: SurfaceSpec, report: ComplexityReport) -> bool:
    if not report.is_exact:
        raise InputError("Theorem membership needs an exact sigma")
    d = spec.degree
    gamma = report.gamma
    if spec.model != SurfaceModel.BLOWUP:
        return gamma == 0
    if spec.is_smooth:
        return gamma == max(0, 2 * (6 - d))
    if d >= 7:
        return gamma == 0
    if d >= 5:
        return gamma in (0, 1)
    return report.sigma in THEOREM_SIGMA[d]


def analyze_blowups(spec: SurfaceSpec) -> List[Tuple[object, ComplexityReport]]:
    """Reports for the blow-up of spec at every legal point."""
    return [(point, analyze(blow_up(spec, point))) for point in legal_point_specs(spec)]
