"""Tree-type surfaces of the classification tables and standard test corpora.

Templates are stored in catalog_data.json; each is realized on demand by a
search for classes with exactly the template's pairings.
"""
import json
import logging
import os
import random
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Literal, Optional, Tuple

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from curve_processing import (
    CurveKind,
    NegativeCurveSet,
    enumerate_minus_one_candidates,
    enumerate_root_candidates,
    irreducible_minus_one_curves,
    negative_curve_set,
)
from data_processing_common import InputError, VerificationError, format_fraction, to_fraction
from decomposition_processing import (
    SlaveDivisor,
    fiber_classes,
    is_nef,
    maximal_boundary,
)
from graph_processing import DualGraph, build_dual_graph
from lattice_utils import DivisorClass, PicardLattice, parse_class
from lc_processing import Affine, BoundaryDivisor, BoundaryTerm, lc_verdict
from surface_processing import (
    PointSpec,
    SurfaceSpec,
    blow_up,
    legal_point_specs,
    pydantic_message,
    read_json,
    validate_spec,
)

logger = logging.getLogger(__name__)

CATALOG_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'catalog_data.json')

# Cap on search nodes expanded while realizing one template.
REALIZATION_NODE_LIMIT = 200000


class SlaveRowMode(str, Enum):
    TOTAL = "total"
    EXCEPTIONAL = "exceptional"
    CONTRACTION = "contraction"


class BoundaryKind(str, Enum):
    LP = "lp"
    ANTICANONICAL = "anticanonical"
    CONIC_PAIR = "conic_pair"
    CONIC_WITH_CURVE = "conic_with_curve"


# ---------------------------------------------------------------- file schema

class NodeModel(BaseModel):
    model_config = ConfigDict(extra='forbid')
    key: str
    kind: Literal["minus_one", "minus_two"]
    dk: str
    slave: str


class BoundaryModel(BaseModel):
    model_config = ConfigDict(extra='forbid')
    kind: Literal["lp", "anticanonical", "conic_pair", "conic_with_curve"]
    weight: Optional[str] = None
    formula: str


class EntryModel(BaseModel):
    model_config = ConfigDict(extra='forbid')
    name: str
    degree: int = Field(ge=2, le=9)
    nodes: List[NodeModel]
    edges: List[Tuple[str, str]]
    gamma: str
    slave_mode: Literal["total", "exceptional", "contraction"]
    boundary: BoundaryModel
    notes: List[str] = []
    roots: Optional[List[List[int]]] = None


class CatalogFile(BaseModel):
    model_config = ConfigDict(extra='forbid')
    version: int
    entries: List[EntryModel]


# ---------------------------------------------------------------------- types

@dataclass(frozen=True)
class TemplateNode:
    key: str
    kind: CurveKind
    dk: Fraction
    slave: Fraction


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    degree: int
    nodes: Tuple[TemplateNode, ...]
    edges: Tuple[Tuple[str, str], ...]
    gamma: Fraction
    slave_mode: SlaveRowMode
    boundary_kind: BoundaryKind
    boundary_weight: Optional[Fraction]
    formula: str
    notes: Tuple[str, ...] = ()
    frozen_roots: Tuple[DivisorClass, ...] = ()

    @property
    def minus_two_count(self) -> int:
        return sum(1 for node in self.nodes if node.kind == CurveKind.MINUS_TWO)

    @property
    def rho_X(self) -> int:
        return 10 - self.degree - self.minus_two_count

    @property
    def sigma(self) -> Fraction:
        return 2 + self.rho_X - self.gamma

    def node(self, key: str) -> TemplateNode:
        for node in self.nodes:
            if node.key == key:
                return node
        raise InputError(f"{self.name} has no template node '{key}'")

    def template_graph(self) -> nx.Graph:
        graph = nx.Graph()
        for node in self.nodes:
            graph.add_node(node.key, kind=node.kind.value)
        for a, b in self.edges:
            graph.add_edge(a, b, multiplicity=1)
        return graph


@dataclass(frozen=True)
class RealizedEntry:
    """A catalog entry together with a spec realizing it and the node -> curve id map."""
    entry: CatalogEntry
    spec: SurfaceSpec
    mapping: Tuple[Tuple[str, int], ...]

    @property
    def name(self) -> str:
        return self.entry.name

    @property
    def degree(self) -> int:
        return self.entry.degree

    @property
    def gamma(self) -> Fraction:
        return self.entry.gamma

    @property
    def sigma(self) -> Fraction:
        return self.entry.sigma

    def curve_id(self, key: str) -> int:
        return dict(self.mapping)[key]

    def dk_coefficients(self) -> Dict[int, Fraction]:
        return _labels(self.entry, self.mapping, 'dk')

    def slave_divisor(self) -> SlaveDivisor:
        return SlaveDivisor.from_mapping(_labels(self.entry, self.mapping, 'slave'))


def _labels(entry: CatalogEntry, mapping, field_name: str) -> Dict[int, Fraction]:
    ids = dict(mapping)
    return {ids[node.key]: getattr(node, field_name) for node in entry.nodes}


# ------------------------------------------------------------------- loading

def _entry_from_model(model: EntryModel) -> CatalogEntry:
    keys = [node.key for node in model.nodes]
    if len(set(keys)) != len(keys):
        raise InputError(f"{model.name}: duplicate node keys")
    for a, b in model.edges:
        if a not in keys or b not in keys:
            raise InputError(f"{model.name}: edge ({a}, {b}) names an unknown node")
    n = 9 - model.degree
    return CatalogEntry(
        name=model.name,
        degree=model.degree,
        nodes=tuple(TemplateNode(node.key, CurveKind(node.kind), to_fraction(node.dk), to_fraction(node.slave))
                    for node in model.nodes),
        edges=tuple((a, b) for a, b in model.edges),
        gamma=to_fraction(model.gamma),
        slave_mode=SlaveRowMode(model.slave_mode),
        boundary_kind=BoundaryKind(model.boundary.kind),
        boundary_weight=to_fraction(model.boundary.weight) if model.boundary.weight else None,
        formula=model.boundary.formula,
        notes=tuple(model.notes),
        frozen_roots=tuple(parse_class(r, n) for r in model.roots or ()),
    )


@lru_cache(maxsize=4)
def load_catalog(path: str = CATALOG_PATH) -> Tuple[CatalogEntry, ...]:
    """Parse the data file and check the templates are pairwise non-isomorphic."""
    try:
        document = CatalogFile.model_validate(read_json(path))
    except ValidationError as e:
        raise InputError(pydantic_message(e, path)) from None
    entries = tuple(_entry_from_model(model) for model in document.entries)
    names = [e.name for e in entries]
    if len(set(names)) != len(names):
        raise InputError(f"{path}: duplicate entry names")
    for i, a in enumerate(entries):
        for b in entries[i + 1:]:
            if a.degree == b.degree and _isomorphic(a.template_graph(), b.template_graph()):
                raise VerificationError(f"Catalog templates {a.name} and {b.name} are isomorphic")
    logger.debug("Loaded %d catalog templates from %s", len(entries), path)
    return entries


def _node_match(a, b) -> bool:
    return a['kind'] == b['kind']


def _edge_match(a, b) -> bool:
    return a['multiplicity'] == b['multiplicity']


def _isomorphic(a: nx.Graph, b: nx.Graph) -> bool:
    return GraphMatcher(a, b, node_match=_node_match, edge_match=_edge_match).is_isomorphic()


def catalog_templates() -> Tuple[CatalogEntry, ...]:
    return load_catalog()


def template(name: str) -> CatalogEntry:
    for candidate in catalog_templates():
        if candidate.name == name:
            return candidate
    raise InputError(f"No catalog entry named '{name}'")


# --------------------------------------------------------------- realization

def _is_positive_root(root: DivisorClass) -> bool:
    if root.degree != 0:
        return root.degree > 0
    return next(c for c in root.coeffs[1:] if c != 0) > 0


def _search_order(entry: CatalogEntry) -> List[str]:
    graph = entry.template_graph()
    remaining = set(graph.nodes)
    first = max(sorted(remaining), key=lambda v: graph.degree(v))
    order = [first]
    remaining.discard(first)
    while remaining:
        placed = set(order)
        nxt = max(sorted(remaining),
                  key=lambda v: (sum(1 for u in graph.neighbors(v) if u in placed), graph.degree(v)))
        order.append(nxt)
        remaining.discard(nxt)
    return order


def _dk_sums_to_anticanonical(entry: CatalogEntry, spec: SurfaceSpec, mapping) -> bool:
    dy = negative_curve_set(spec)
    total = [Fraction(0)] * spec.lattice.rank
    for curve_id, coeff in _labels(entry, mapping, 'dk').items():
        for i, c in enumerate(dy.by_id(curve_id).cls.coeffs):
            total[i] += coeff * c
    return tuple(total) == tuple(Fraction(c) for c in spec.anticanonical.coeffs)


def _accept(entry: CatalogEntry, assignment: Dict[str, DivisorClass]) -> Optional[RealizedEntry]:
    roots = tuple(assignment[node.key] for node in entry.nodes if node.kind == CurveKind.MINUS_TWO)
    minus_one = {assignment[node.key] for node in entry.nodes if node.kind == CurveKind.MINUS_ONE}
    n = 9 - entry.degree
    try:
        curves = irreducible_minus_one_curves(PicardLattice(n), roots)
    except InputError:
        return None
    if {c.cls for c in curves} != minus_one:
        return None
    spec = validate_spec(SurfaceSpec(degree=entry.degree, simple_roots=roots, name=entry.name))
    dy = negative_curve_set(spec)
    mapping = tuple((node.key, dy.id_of(assignment[node.key])) for node in entry.nodes)
    if not _dk_sums_to_anticanonical(entry, spec, mapping):
        return None
    logger.debug("Realized %s in n=%d with roots %s", entry.name, n, [r.pretty() for r in roots])
    return RealizedEntry(entry, spec, mapping)


def _realize_frozen(entry: CatalogEntry) -> Optional[RealizedEntry]:
    spec = validate_spec(SurfaceSpec(degree=entry.degree, simple_roots=entry.frozen_roots, name=entry.name))
    match = _match_entry(entry, spec, build_dual_graph(spec))
    if match is None:
        raise VerificationError(f"Frozen roots of {entry.name} do not reproduce its dual graph")
    return match


def _search(entry: CatalogEntry) -> RealizedEntry:
    n = 9 - entry.degree
    pools = {
        CurveKind.MINUS_ONE: enumerate_minus_one_candidates(n),
        CurveKind.MINUS_TWO: [r for r in enumerate_root_candidates(n) if _is_positive_root(r)],
    }
    graph = entry.template_graph()
    kinds = {node.key: node.kind for node in entry.nodes}
    order = _search_order(entry)
    candidates = sorted(set(pools[CurveKind.MINUS_ONE]) | set(pools[CurveKind.MINUS_TWO]))
    index = {cls: i for i, cls in enumerate(candidates)}
    table = [[a.dot(b) for b in candidates] for a in candidates]
    adjacent_to = [[j for j in range(len(candidates)) if table[i][j] == 1] for i in range(len(candidates))]
    pool_index = {kind: {index[c] for c in pool} for kind, pool in pools.items()}

    assignment: Dict[str, int] = {}
    expanded = 0

    def extend(k: int) -> Optional[RealizedEntry]:
        nonlocal expanded
        expanded += 1
        if expanded > REALIZATION_NODE_LIMIT:
            raise VerificationError(
                f"Realization of {entry.name} exceeded {REALIZATION_NODE_LIMIT} search nodes")
        if k == len(order):
            return _accept(entry, {key: candidates[i] for key, i in assignment.items()})
        v = order[k]
        anchor = next((u for u in order[:k] if graph.has_edge(u, v)), None)
        options = adjacent_to[assignment[anchor]] if anchor is not None else sorted(pool_index[kinds[v]])
        for ci in options:
            if ci not in pool_index[kinds[v]]:
                continue
            if any(table[ci][assignment[u]] != (1 if graph.has_edge(u, v) else 0) for u in order[:k]):
                continue
            assignment[v] = ci
            found = extend(k + 1)
            if found is not None:
                return found
            del assignment[v]
        return None

    realized = extend(0)
    if realized is None:
        raise VerificationError(f"No class assignment realizes {entry.name}")
    logger.debug("%s realized after %d search nodes", entry.name, expanded)
    return realized


@lru_cache(maxsize=None)
def realize(entry: CatalogEntry) -> RealizedEntry:
    """Spec whose dual graph is the template, verified against D_K."""
    if entry.frozen_roots:
        return _realize_frozen(entry)
    return _search(entry)


def catalog_entries() -> List[RealizedEntry]:
    """Every catalog row with a realized spec."""
    return [realize(e) for e in catalog_templates()]


def entry(name: str) -> RealizedEntry:
    return realize(template(name))


def entries_by_degree(degree: int) -> List[RealizedEntry]:
    return [realize(e) for e in catalog_templates() if e.degree == degree]


def freeze_catalog(path: str = CATALOG_PATH) -> str:
    """Write the data file with realized roots so later loads skip the search."""
    with open(CATALOG_PATH, 'r', encoding='utf-8') as f:
        data = json.load(f)
    realized = {r.name: r for r in catalog_entries()}
    for item in data['entries']:
        item['roots'] = [list(r.coeffs) for r in realized[item['name']].spec.simple_roots]
    text = json.dumps(data, indent=2)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text + '\n')
    logger.info("Froze %d catalog realizations into %s", len(realized), path)
    return path


# ------------------------------------------------------------------ matching

def _match_entry(entry: CatalogEntry, spec: SurfaceSpec, g: DualGraph) -> Optional[RealizedEntry]:
    matcher = GraphMatcher(entry.template_graph(), g.kinded_graph(),
                           node_match=_node_match, edge_match=_edge_match)
    for iso in matcher.isomorphisms_iter():
        mapping = tuple((node.key, iso[node.key]) for node in entry.nodes)
        if _dk_sums_to_anticanonical(entry, spec, mapping):
            return RealizedEntry(entry, spec, mapping)
    return None


def match_tree_surface(spec: SurfaceSpec, g: Optional[DualGraph] = None) -> Optional[RealizedEntry]:
    """The catalog row whose template is isomorphic to D(Y), with labels moved onto spec's curves."""
    if not spec.is_blowup:
        return None
    g = g or build_dual_graph(spec)
    if not g.nodes:
        return None
    for candidate in catalog_templates():
        if candidate.degree != spec.degree or len(candidate.nodes) != len(g.nodes):
            continue
        match = _match_entry(candidate, spec, g)
        if match is not None:
            logger.debug("Matched %s", candidate.name)
            return match
    return None


# ---------------------------------------------------------------- boundaries

def _merged(terms: List[Tuple[object, Fraction]]) -> BoundaryDivisor:
    merged: Dict[object, Fraction] = {}
    general: List[Tuple[DivisorClass, Fraction]] = []
    for key, coeff in terms:
        if coeff == 0:
            continue
        if isinstance(key, DivisorClass):
            general.append((key, coeff))
        else:
            merged[key] = merged.get(key, Fraction(0)) + coeff
    items = [BoundaryTerm(key, Affine.of(c)) for key, c in sorted(merged.items())]
    copies: Dict[DivisorClass, int] = {}
    for cls, coeff in general:
        # a coefficient above 1 is spread over several general members
        while coeff > 0:
            part = min(coeff, Fraction(1))
            items.append(BoundaryTerm(cls, Affine.of(part), copies.get(cls, 0)))
            copies[cls] = copies.get(cls, 0) + 1
            coeff -= part
    return BoundaryDivisor(tuple(items))


def lp_boundary(spec: SurfaceSpec, dy: Optional[NegativeCurveSet] = None) -> BoundaryDivisor:
    best = maximal_boundary(spec, dy)
    terms = [(t.curve_id if t.curve_id is not None else t.movable, t.coefficient) for t in best.terms]
    return _merged(terms)


def _weighted_dk(realized: RealizedEntry, weight: Fraction) -> List[Tuple[object, Fraction]]:
    return [(curve_id, weight * c) for curve_id, c in sorted(realized.dk_coefficients().items())]


def catalog_boundary(realized: RealizedEntry, dy: Optional[NegativeCurveSet] = None) -> BoundaryDivisor:
    """The row's example boundary on the realized (or matched) spec."""
    spec = realized.spec
    dy = dy or negative_curve_set(spec)
    entry_ = realized.entry
    kind = entry_.boundary_kind
    w = entry_.boundary_weight
    anticanonical = spec.anticanonical
    if kind == BoundaryKind.LP:
        return lp_boundary(spec, dy)
    if kind == BoundaryKind.ANTICANONICAL:
        return _merged(_weighted_dk(realized, w) + [(anticanonical, 1 - w)])
    if kind == BoundaryKind.CONIC_PAIR:
        fibers = set(fiber_classes(spec, dy))
        for conic in sorted(fibers):
            other = anticanonical - conic
            if other in fibers and conic < other:
                return _merged(_weighted_dk(realized, w) + [(conic, 1 - w), (other, 1 - w)])
        raise VerificationError(f"{entry_.name}: no pair of conic classes adds up to -K")
    if kind == BoundaryKind.CONIC_WITH_CURVE:
        for curve in dy.minus_one:
            conic = anticanonical - curve.cls
            if conic.square() != 0 or not is_nef(dy, conic):
                continue
            boundary = _merged(_weighted_dk(realized, w) + [(conic, 1 - w), (curve.id, 1 - w)])
            if all(t.coeff.a <= 1 for t in boundary.terms) and lc_verdict(spec, boundary, dy=dy):
                return boundary
        raise VerificationError(f"{entry_.name}: no (-1)-curve E leaves -K - E a conic class")
    raise InputError(f"Unknown boundary kind {kind}")


# -------------------------------------------------------------------- corpora

def smooth_spec(degree: int) -> SurfaceSpec:
    return validate_spec(SurfaceSpec(degree=degree, name=f"smooth_d{degree}"))


def standard_cycle_specs() -> List[SurfaceSpec]:
    """Smooth surfaces of degree 2..6 and a few singular cycle-bearing blow-ups."""
    specs = [smooth_spec(d) for d in range(6, 1, -1)]
    hexagon = smooth_spec(6)
    dy = negative_curve_set(hexagon)
    a1 = blow_up(hexagon, PointSpec((dy.minus_one[0].id,)))
    pair = next(p for p in legal_point_specs(hexagon) if len(p.on_curves) == 2)
    two_a1 = blow_up(hexagon, pair)
    new_curve = negative_curve_set(a1).id_of(a1.lattice.exceptional(a1.n))
    a2 = blow_up(a1, PointSpec((new_curve,)))
    a1_d4 = blow_up(a1, PointSpec(()))
    specs.extend([
        replace(a1, name="A1_d5"),
        replace(two_a1, name="2A1_d5"),
        replace(a2, name="A2_d4"),
        replace(a1_d4, name="A1_d4"),
    ])
    return specs


def random_surface_specs(degree: int, count: int, seed: int = 0) -> List[SurfaceSpec]:
    """Distinct root configurations reached by seeded random blow-up walks from P2."""
    if not 1 <= degree <= 9:
        raise InputError(f"Degree must lie in [1, 9], got {degree}")
    rng = random.Random(seed)
    found: Dict[Tuple[DivisorClass, ...], SurfaceSpec] = {}
    attempts = 0
    while len(found) < count and attempts < 20 * count:
        attempts += 1
        spec = validate_spec(SurfaceSpec(degree=9))
        while spec.degree > degree:
            points = legal_point_specs(spec)
            special = points[1:]
            point = rng.choice(special) if special and rng.random() < 0.5 else points[0]
            spec = blow_up(spec, point)
        key = tuple(sorted(spec.simple_roots))
        if key not in found:
            found[key] = replace(spec, name=f"random_d{degree}_{len(found)}")
    logger.debug("Random corpus for degree %d: %d specs after %d walks", degree, len(found), attempts)
    return list(found.values())


def denominator_is_forced(entry_: CatalogEntry) -> bool:
    """With as many curves as the Picard rank the decomposition of -K is unique."""
    return len(entry_.nodes) == 10 - entry_.degree


def max_label(entry_: CatalogEntry) -> Fraction:
    return max(node.dk for node in entry_.nodes)


def entry_to_dict(realized: RealizedEntry) -> dict:
    e = realized.entry
    dy = negative_curve_set(realized.spec)
    return {
        "name": e.name,
        "degree": e.degree,
        "gamma": format_fraction(e.gamma),
        "sigma": format_fraction(e.sigma),
        "rho_X": e.rho_X,
        "singularity": realized.spec.singularity,
        "slave_mode": e.slave_mode.value,
        "boundary": e.formula,
        "nodes": [{"key": node.key, "kind": node.kind.value, "curve": realized.curve_id(node.key),
                   "class": dy.by_id(realized.curve_id(node.key)).cls.pretty(),
                   "dk": format_fraction(node.dk), "slave": format_fraction(node.slave)}
                  for node in e.nodes],
        "edges": [list(edge) for edge in e.edges],
        "roots": [list(r.coeffs) for r in realized.spec.simple_roots],
        "notes": list(e.notes),
    }