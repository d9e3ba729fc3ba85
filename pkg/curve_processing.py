import logging
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
from sympy import Matrix

from data_processing_common import InputError
from lattice_utils import (
    DivisorClass,
    PicardLattice,
    anticanonical_degree,
    is_root_class,
    pairing,
)

logger = logging.getLogger(__name__)

# Dynkin shapes with one trivalent node, keyed by sorted arm lengths.
_EXCEPTIONAL_ARMS = {(1, 2, 2): ('E', 6), (1, 2, 3): ('E', 7), (1, 2, 4): ('E', 8)}
_FAMILY_ORDER = {'E': 0, 'D': 1, 'A': 2}


class CurveKind(str, Enum):
    MINUS_ONE = "minus_one"
    MINUS_TWO = "minus_two"


@dataclass(frozen=True)
class CurveClass:
    cls: DivisorClass
    kind: CurveKind
    id: int

    def label(self) -> str:
        return self.cls.pretty()


@dataclass(frozen=True)
class NegativeCurveSet:
    """D(Y): irreducible (-1)-curves followed by the simple (-2)-roots."""
    minus_one: Tuple[CurveClass, ...]
    minus_two: Tuple[CurveClass, ...]

    @property
    def curves(self) -> Tuple[CurveClass, ...]:
        return self.minus_one + self.minus_two

    def by_id(self, curve_id: int) -> CurveClass:
        curves = self.curves
        if not isinstance(curve_id, int) or not 0 <= curve_id < len(curves):
            raise InputError(f"Curve id {curve_id!r} does not exist in D(Y) ({len(curves)} curves)")
        return curves[curve_id]

    def id_of(self, cls: DivisorClass) -> Optional[int]:
        for curve in self.curves:
            if curve.cls == cls:
                return curve.id
        return None

    def __len__(self):
        return len(self.minus_one) + len(self.minus_two)


def _cauchy_schwarz_range(n: int, k: int, s: int) -> range:
    """Degrees a with (3a-k)^2 <= n(a^2-s), i.e. (9-n)a^2 - 6ka + k^2 + ns <= 0."""
    lead = 9 - n
    disc = 36 * k * k - 4 * lead * (k * k + n * s)
    if disc < 0:
        return range(0)
    root = math.isqrt(disc) + 1
    lo = (6 * k - root) // (2 * lead) - 1
    hi = (6 * k + root) // (2 * lead) + 1
    return range(lo, hi + 1)


@lru_cache(maxsize=None)
def _integer_vectors(length: int, total: int, square: int) -> Tuple[Tuple[int, ...], ...]:
    """All integer vectors with the given coordinate sum and sum of squares."""
    if square < 0:
        return ()
    if length == 0:
        return ((),) if total == 0 and square == 0 else ()
    if total * total > length * square:
        return ()
    bound = math.isqrt(square)
    found = []
    for x in range(-bound, bound + 1):
        for rest in _integer_vectors(length - 1, total - x, square - x * x):
            found.append((x,) + rest)
    return tuple(found)


def classes_with_invariants(n: int, anticanonical: int, square: int) -> Iterator[DivisorClass]:
    """Every class v on the n-point blow-up with -K.v = anticanonical and v^2 = square."""
    PicardLattice(n)
    for a in _cauchy_schwarz_range(n, anticanonical, square):
        total = 3 * a - anticanonical
        norm = a * a - square
        if n == 0:
            if total == 0 and norm == 0:
                yield DivisorClass((a,))
            continue
        for b in _integer_vectors(n, total, norm):
            yield DivisorClass((a,) + tuple(-x for x in b))


def enumerate_minus_one_candidates(n: int) -> List[DivisorClass]:
    """All classes with v^2 = -1 and -K.v = 1, sorted."""
    return sorted(classes_with_invariants(n, 1, -1))


def enumerate_root_candidates(n: int) -> List[DivisorClass]:
    """All roots (v^2 = -2, K.v = 0), both signs, sorted."""
    return sorted(classes_with_invariants(n, 0, -2))


def root_pairing_graph(lattice: PicardLattice, roots: Sequence[DivisorClass]) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(len(roots)))
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            m = pairing(lattice, roots[i], roots[j])
            if m:
                graph.add_edge(i, j, multiplicity=m)
    return graph


def dynkin_type(component: nx.Graph) -> Tuple[str, int]:
    """Classify a connected simple-root graph as ('A'|'D'|'E', rank)."""
    rank = component.number_of_nodes()
    if not nx.is_tree(component):
        raise InputError(f"Root component with {rank} nodes contains a circuit; not a Dynkin diagram")
    degrees = sorted((deg for _, deg in component.degree()), reverse=True)
    if not degrees or degrees[0] <= 2:
        return 'A', rank
    if degrees[0] > 3 or (len(degrees) > 1 and degrees[1] > 2):
        raise InputError(f"Root component with node degrees {degrees} is not of type A, D or E")
    center = next(node for node, deg in component.degree() if deg == 3)
    pruned = component.copy()
    pruned.remove_node(center)
    arms = tuple(sorted(len(arm) for arm in nx.connected_components(pruned)))
    if arms[0] == 1 and arms[1] == 1:
        return 'D', rank
    if arms in _EXCEPTIONAL_ARMS:
        return _EXCEPTIONAL_ARMS[arms]
    raise InputError(f"Root component with arms {arms} is not of type A, D or E")


def format_singularity_type(components: Sequence[Tuple[str, int]]) -> str:
    """Canonical type string, e.g. 'E6+2A1'; 'smooth' for no roots."""
    if not components:
        return "smooth"
    counts = Counter(components)
    ordered = sorted(counts, key=lambda item: (_FAMILY_ORDER[item[0]], -item[1]))
    parts = []
    for family, rank in ordered:
        prefix = str(counts[(family, rank)]) if counts[(family, rank)] > 1 else ''
        parts.append(f"{prefix}{family}{rank}")
    return '+'.join(parts)


def validate_simple_roots(lattice: PicardLattice, roots: Sequence[DivisorClass]) -> List[Tuple[str, int]]:
    """Check roots form a simple system of ADE type; return the component types."""
    for root in roots:
        lattice.check(root)
        if not is_root_class(lattice, root):
            raise InputError(
                f"{root.pretty()} is not a root: square {pairing(lattice, root, root)}, "
                f"-K degree {anticanonical_degree(lattice, root)}")
    if len(set(roots)) != len(roots):
        duplicates = [r.pretty() for r, c in Counter(roots).items() if c > 1]
        raise InputError(f"Duplicate simple roots: {', '.join(duplicates)}")
    if roots and Matrix([list(r.coeffs) for r in roots]).rank() != len(roots):
        raise InputError(
            "Simple roots are linearly dependent: " + ', '.join(r.pretty() for r in roots))
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            m = pairing(lattice, roots[i], roots[j])
            if m not in (0, 1):
                raise InputError(
                    f"Simple roots {roots[i].pretty()} and {roots[j].pretty()} pair to {m}; "
                    "distinct (-2)-curves must pair to 0 or 1")
    graph = root_pairing_graph(lattice, roots)
    return [dynkin_type(graph.subgraph(c).copy()) for c in nx.connected_components(graph)]


def effective_positive_roots(lattice: PicardLattice, simple_roots: Sequence[DivisorClass]) -> List[DivisorClass]:
    """Saturate the simple roots: add beta+alpha while it stays a root."""
    validate_simple_roots(lattice, simple_roots)
    found = set(simple_roots)
    frontier = list(simple_roots)
    while frontier:
        beta = frontier.pop()
        for alpha in simple_roots:
            candidate = beta + alpha
            if candidate not in found and is_root_class(lattice, candidate):
                found.add(candidate)
                frontier.append(candidate)
    return sorted(found)


def irreducible_minus_one_curves(lattice: PicardLattice, simple_roots: Sequence[DivisorClass]) -> List[CurveClass]:
    """(-1)-classes pairing nonnegatively with every effective root."""
    positive = effective_positive_roots(lattice, simple_roots)
    survivors = [v for v in enumerate_minus_one_candidates(lattice.n)
                 if all(pairing(lattice, v, root) >= 0 for root in positive)]
    logger.debug("n=%d: %d of the (-1)-classes are irreducible over %d positive roots",
                 lattice.n, len(survivors), len(positive))
    return [CurveClass(v, CurveKind.MINUS_ONE, i) for i, v in enumerate(survivors)]


def negative_curve_set(spec) -> NegativeCurveSet:
    """D(Y) of a blow-up model with deterministic ids."""
    if not getattr(spec, 'is_blowup', False):
        raise InputError(f"D(Y) is only modelled for blow-ups of P2, not for model '{spec.model.value}'")
    lattice = spec.lattice
    minus_one = irreducible_minus_one_curves(lattice, spec.simple_roots)
    offset = len(minus_one)
    minus_two = [CurveClass(root, CurveKind.MINUS_TWO, offset + i)
                 for i, root in enumerate(sorted(spec.simple_roots))]
    return NegativeCurveSet(tuple(minus_one), tuple(minus_two))


def pairing_table(lattice: PicardLattice, curves: Sequence[CurveClass]) -> Dict[Tuple[int, int], int]:
    return {(a.id, b.id): pairing(lattice, a.cls, b.cls) for a in curves for b in curves}
