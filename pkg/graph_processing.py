import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

import networkx as nx
from more_itertools import circular_shifts

from curve_processing import CurveClass, CurveKind, negative_curve_set
from data_processing_common import InputError, ModelInconsistencyError, VerificationError
from lattice_utils import DivisorClass, pairing

logger = logging.getLogger(__name__)


class NonSNC(str, Enum):
    SNC = "SNC"
    CONCURRENT_LINES = "ConcurrentLines"
    TANGENCY = "Tangency"
    MIXED = "Mixed"


class DualGraph:
    """Dual graph of D(Y): nodes are curve ids, edges carry the pairing."""

    def __init__(self, lattice, curves: Sequence[CurveClass]):
        self.lattice = lattice
        self.graph = nx.Graph()
        for curve in sorted(curves, key=lambda c: c.id):
            self.graph.add_node(curve.id, kind=curve.kind, cls=curve.cls)
        ordered = sorted(curves, key=lambda c: c.id)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1:]:
                m = pairing(lattice, a.cls, b.cls)
                if m < 0:
                    raise ModelInconsistencyError(
                        f"Distinct curves {a.label()} and {b.label()} pair negatively ({m})")
                if m:
                    self.graph.add_edge(a.id, b.id, multiplicity=m)

    @property
    def nodes(self) -> List[int]:
        return sorted(self.graph.nodes)

    def kind(self, node: int) -> CurveKind:
        return self.graph.nodes[node]['kind']

    def cls(self, node: int) -> DivisorClass:
        return self.graph.nodes[node]['cls']

    def is_minus_one(self, node: int) -> bool:
        return self.kind(node) == CurveKind.MINUS_ONE

    def multiplicity(self, a: int, b: int) -> int:
        data = self.graph.get_edge_data(a, b)
        return data['multiplicity'] if data else 0

    def neighbors(self, node: int) -> List[int]:
        return sorted(self.graph.neighbors(node))

    def node_of(self, cls: DivisorClass) -> Optional[int]:
        for node in self.graph.nodes:
            if self.cls(node) == cls:
                return node
        return None

    def minus_one_nodes(self) -> List[int]:
        return [v for v in self.nodes if self.is_minus_one(v)]

    def minus_two_nodes(self) -> List[int]:
        return [v for v in self.nodes if not self.is_minus_one(v)]

    def kinded_graph(self) -> nx.Graph:
        """Plain graph with kind and multiplicity attributes, for isomorphism tests."""
        plain = nx.Graph()
        for v in self.nodes:
            plain.add_node(v, kind=self.kind(v).value)
        for a, b, data in self.graph.edges(data=True):
            plain.add_edge(a, b, multiplicity=data['multiplicity'])
        return plain


@dataclass(frozen=True)
class Cycle:
    nodes: Tuple[int, ...]
    content: int

    @property
    def length(self) -> int:
        return len(self.nodes)

    def key(self):
        return (self.content, self.length, self.nodes)


def build_dual_graph(spec) -> DualGraph:
    dy = negative_curve_set(spec)
    return DualGraph(spec.lattice, dy.curves)


def canonical_cycle(nodes: Sequence[int]) -> Tuple[int, ...]:
    """Smallest rotation of the cycle read in either direction."""
    nodes = list(nodes)
    return min(min(circular_shifts(nodes)), min(circular_shifts(nodes[::-1])))


def make_cycle(g: DualGraph, nodes: Sequence[int]) -> Cycle:
    canonical = canonical_cycle(nodes)
    return Cycle(canonical, sum(1 for v in canonical if g.is_minus_one(v)))


def is_cycle(g: DualGraph, nodes: Sequence[int]) -> bool:
    """Closed chain with unit consecutive pairings and no chords, or a double pair."""
    nodes = list(nodes)
    if len(set(nodes)) != len(nodes) or len(nodes) < 2:
        return False
    if len(nodes) == 2:
        return g.multiplicity(nodes[0], nodes[1]) == 2
    m = len(nodes)
    for i in range(m):
        for j in range(i + 1, m):
            consecutive = j == i + 1 or (i == 0 and j == m - 1)
            if g.multiplicity(nodes[i], nodes[j]) != (1 if consecutive else 0):
                return False
    return True


def cycles(g: DualGraph, max_content: Optional[int] = None) -> Iterator[Cycle]:
    """All chordless cycles (and double pairs), each once, up to the content bound."""
    for a, b in sorted(tuple(sorted(e)) for e in g.graph.edges):
        if g.multiplicity(a, b) == 2:
            cycle = make_cycle(g, (a, b))
            if max_content is None or cycle.content <= max_content:
                yield cycle
    for start in g.nodes:
        yield from _cycles_from(g, start, max_content)


def _cycles_from(g: DualGraph, start: int, max_content: Optional[int]) -> Iterator[Cycle]:
    def extend(path, content):
        last = path[-1]
        for w in g.neighbors(last):
            if w <= start or w in path or g.multiplicity(last, w) != 1:
                continue
            if any(g.multiplicity(w, u) for u in path[1:-1]):
                continue
            new_content = content + (1 if g.is_minus_one(w) else 0)
            if max_content is not None and new_content > max_content:
                continue
            if len(path) >= 2 and g.multiplicity(w, start):
                if g.multiplicity(w, start) == 1 and path[1] < w:
                    yield Cycle(tuple(path) + (w,), new_content)
                continue
            yield from extend(path + [w], new_content)

    yield from extend([start], 1 if g.is_minus_one(start) else 0)


def find_min_content_cycle(g: DualGraph, d: Optional[int] = None) -> Optional[Cycle]:
    """Cycle of minimal content, ties broken by length then node ids."""
    best: Optional[Cycle] = None
    for a, b in sorted(tuple(sorted(e)) for e in g.graph.edges):
        if g.multiplicity(a, b) == 2:
            cycle = make_cycle(g, (a, b))
            if best is None or cycle.key() < best.key():
                best = cycle
    for start in g.nodes:
        best = _search_from(g, start, best)
    if best is not None:
        logger.debug("Minimal cycle %s has content %d (degree %s)", best.nodes, best.content, d)
    return best


def _search_from(g: DualGraph, start: int, best: Optional[Cycle]) -> Optional[Cycle]:
    """Depth-first search pruned by (content, length) against the best cycle so far."""
    state = {'best': best}

    def bound(content, length):
        current = state['best']
        return current is not None and (content, length) > (current.content, current.length)

    def extend(path, content):
        last = path[-1]
        for w in g.neighbors(last):
            if w <= start or w in path or g.multiplicity(last, w) != 1:
                continue
            if any(g.multiplicity(w, u) for u in path[1:-1]):
                continue
            new_content = content + (1 if g.is_minus_one(w) else 0)
            if bound(new_content, len(path) + 1):
                continue
            if len(path) >= 2 and g.multiplicity(w, start):
                if g.multiplicity(w, start) == 1:
                    candidate = make_cycle(g, path + [w])
                    if state['best'] is None or candidate.key() < state['best'].key():
                        state['best'] = candidate
                continue
            extend(path + [w], new_content)

    extend([start], 1 if g.is_minus_one(start) else 0)
    return state['best']


def verify_cycle_complement(spec, g: DualGraph, cycle: Cycle) -> DivisorClass:
    """Check c(I) >= d and, for c(I) = d, that the cycle sums to -K."""
    d = spec.degree
    if cycle.content < d:
        raise ModelInconsistencyError(
            f"Cycle {list(cycle.nodes)} has content {cycle.content} < degree {d}; the spec is not realizable")
    if not is_cycle(g, cycle.nodes):
        raise InputError(f"Nodes {list(cycle.nodes)} do not form a cycle of the dual graph")
    total = spec.lattice.zero()
    for node in cycle.nodes:
        total = total + g.cls(node)
    square = pairing(spec.lattice, total, total)
    degree = pairing(spec.lattice, spec.anticanonical, total)
    if not square == degree == cycle.content:
        raise VerificationError(
            f"Cycle sum {total.pretty()} has square {square} and -K degree {degree}, expected {cycle.content}")
    if cycle.content == d and total != spec.anticanonical:
        raise VerificationError(f"Content-{d} cycle sums to {total.pretty()}, not -K")
    return total


def is_tree(g: DualGraph) -> bool:
    if any(data['multiplicity'] >= 2 for _, _, data in g.graph.edges(data=True)):
        return False
    return nx.is_forest(g.graph) if g.graph.number_of_nodes() else True


def classify_non_snc(g: DualGraph, annotations) -> NonSNC:
    concurrent = False
    tangent = False
    for annotation in annotations:
        if len(annotation.members) >= 3:
            concurrent = True
        if any(order >= 2 for _, _, order in annotation.contact):
            tangent = True
        if annotation.parent is not None or any(m >= 2 for _, m in annotation.members):
            tangent = True
    if concurrent and tangent:
        return NonSNC.MIXED
    if concurrent:
        return NonSNC.CONCURRENT_LINES
    if tangent:
        return NonSNC.TANGENCY
    return NonSNC.SNC


def to_dot(g: DualGraph, cycle: Optional[Cycle] = None, name: str = "DY") -> str:
    """DOT text: open circles for (-1)-curves, filled for (-2)-curves."""
    on_cycle = set(cycle.nodes) if cycle else set()
    cycle_edges = set()
    if cycle:
        ring = list(cycle.nodes)
        for i, v in enumerate(ring):
            cycle_edges.add(frozenset((v, ring[(i + 1) % len(ring)])))
    lines = [f"graph {name} {{", "  node [shape=circle, label=\"\", width=0.25];"]
    for v in g.nodes:
        style = "filled" if not g.is_minus_one(v) else "solid"
        extra = ", penwidth=2" if v in on_cycle else ""
        lines.append(f'  n{v} [style={style}, fillcolor=black, xlabel="{v}: {g.cls(v).pretty()}"{extra}];')
    for a, b in sorted(tuple(sorted(e)) for e in g.graph.edges):
        m = g.multiplicity(a, b)
        extra = ", penwidth=2" if frozenset((a, b)) in cycle_edges else ""
        lines.append(f'  n{a} -- n{b} [label="{m}"{extra}];')
    lines.append("}")
    return '\n'.join(lines)
