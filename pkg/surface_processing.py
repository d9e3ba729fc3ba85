import json
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from curve_processing import (
    CurveKind,
    format_singularity_type,
    negative_curve_set,
    validate_simple_roots,
)
from data_processing_common import InputError
from lattice_utils import (
    DivisorClass,
    PicardLattice,
    anticanonical_class,
    pairing,
    parse_class,
)

logger = logging.getLogger(__name__)

# A member of an annotation: a class of D(Y) or the tag of a declared extra class.
CurveRef = Union[DivisorClass, str]


class SurfaceModel(str, Enum):
    BLOWUP = "blowup"
    P1XP1 = "p1xp1"
    F2 = "f2"


@dataclass(frozen=True)
class IncidenceAnnotation:
    """Curves through one (possibly infinitely near) point."""
    point_id: str
    members: Tuple[Tuple[CurveRef, int], ...]
    contact: Tuple[Tuple[CurveRef, CurveRef, int], ...] = ()
    parent: Optional[str] = None

    def refs(self) -> List[CurveRef]:
        return [ref for ref, _ in self.members]

    def multiplicity(self, ref: CurveRef) -> int:
        for member, mult in self.members:
            if member == ref:
                return mult
        return 0

    def contact_order(self, a: CurveRef, b: CurveRef) -> int:
        for x, y, order in self.contact:
            if {x, y} == {a, b}:
                return order
        return 1


@dataclass(frozen=True)
class PointSpec:
    """A point to blow up, given by the (-1)-curves of D(Y) containing it."""
    on_curves: Tuple[int, ...] = ()


@dataclass(frozen=True)
class SurfaceSpec:
    degree: int
    simple_roots: Tuple[DivisorClass, ...] = ()
    model: SurfaceModel = SurfaceModel.BLOWUP
    annotations: Tuple[IncidenceAnnotation, ...] = ()
    extra_classes: Tuple[Tuple[str, DivisorClass], ...] = ()
    name: Optional[str] = None
    singularity: Optional[str] = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return 9 - self.degree

    @property
    def is_blowup(self) -> bool:
        return self.model == SurfaceModel.BLOWUP

    @property
    def lattice(self) -> PicardLattice:
        return PicardLattice(self.n)

    @property
    def anticanonical(self) -> DivisorClass:
        return anticanonical_class(self.lattice)

    @property
    def is_smooth(self) -> bool:
        return self.model == SurfaceModel.P1XP1 or (self.is_blowup and not self.simple_roots)

    def tag_class(self, tag: str) -> DivisorClass:
        for name, cls in self.extra_classes:
            if name == tag:
                return cls
        raise InputError(f"Unknown curve tag '{tag}'")

    def class_of(self, ref: CurveRef) -> DivisorClass:
        return self.tag_class(ref) if isinstance(ref, str) else ref


def _validate_model(spec: SurfaceSpec):
    if not 1 <= spec.degree <= 9:
        raise InputError(f"Degree must lie in [1, 9], got {spec.degree}")
    if spec.model != SurfaceModel.BLOWUP:
        if spec.degree != 8:
            raise InputError(f"Model '{spec.model.value}' has degree 8, got {spec.degree}")
        if spec.simple_roots or spec.annotations or spec.extra_classes:
            raise InputError(
                f"Model '{spec.model.value}' takes no roots, annotations or extra classes "
                "(the F2 vertex curve is implicit)")


def _validate_annotations(spec: SurfaceSpec, curves: Sequence[DivisorClass]):
    lattice = spec.lattice
    known = set(curves)
    tags = [tag for tag, _ in spec.extra_classes]
    if len(set(tags)) != len(tags):
        raise InputError(f"Duplicate extra-class tags: {tags}")
    for tag, cls in spec.extra_classes:
        lattice.check(cls)
    point_ids = [a.point_id for a in spec.annotations]
    if len(set(point_ids)) != len(point_ids):
        raise InputError(f"Duplicate annotation point ids: {point_ids}")
    by_id = {a.point_id: a for a in spec.annotations}
    contributions: Dict[Tuple[DivisorClass, DivisorClass], int] = {}
    for annotation in spec.annotations:
        where = f"annotation '{annotation.point_id}'"
        refs = annotation.refs()
        if not refs:
            raise InputError(f"{where} has no members")
        if len(set(refs)) != len(refs):
            raise InputError(f"{where} lists a curve twice")
        for ref, mult in annotation.members:
            if isinstance(ref, str):
                spec.tag_class(ref)
            elif ref not in known:
                raise InputError(f"{where}: {ref.pretty()} is not a curve of D(Y); declare it as an extra class")
            if mult < 1:
                raise InputError(f"{where}: multiplicity of {_ref_name(ref)} must be >= 1")
        for a, b, order in annotation.contact:
            if a not in refs or b not in refs or a == b:
                raise InputError(f"{where}: contact pair ({_ref_name(a)}, {_ref_name(b)}) must name two members")
            if order < 2:
                raise InputError(f"{where}: contact order must be >= 2, got {order}")
        seen = {annotation.point_id}
        parent = annotation.parent
        while parent is not None:
            if parent not in by_id:
                raise InputError(f"{where}: unknown parent point '{parent}'")
            if parent in seen:
                raise InputError(f"{where}: parent chain is circular")
            seen.add(parent)
            parent = by_id[parent].parent
        for i, a in enumerate(refs):
            for b in refs[i + 1:]:
                local = local_intersection(annotation, a, b)
                key = tuple(sorted((spec.class_of(a), spec.class_of(b))))
                contributions[key] = contributions.get(key, 0) + local
    for (a, b), total in contributions.items():
        bound = pairing(lattice, a, b)
        if a != b and total > bound:
            raise InputError(
                f"Annotated intersections of {a.pretty()} and {b.pretty()} add up to {total}, "
                f"but the classes only meet in {bound} points")


def _ref_name(ref: CurveRef) -> str:
    return ref if isinstance(ref, str) else ref.pretty()


def validate_spec(spec: SurfaceSpec) -> SurfaceSpec:
    """Check every SurfaceSpec invariant and attach the singularity type."""
    _validate_model(spec)
    if spec.model == SurfaceModel.P1XP1:
        return replace(spec, singularity="smooth")
    if spec.model == SurfaceModel.F2:
        return replace(spec, singularity="A1")
    lattice = spec.lattice
    components = validate_simple_roots(lattice, spec.simple_roots)
    if spec.annotations or spec.extra_classes:
        curves = [c.cls for c in negative_curve_set(spec).curves]
        _validate_annotations(spec, curves)
    return replace(spec, singularity=format_singularity_type(components))


def singularity_type(spec: SurfaceSpec) -> str:
    if spec.singularity is not None:
        return spec.singularity
    return validate_spec(spec).singularity


def picard_rank_of_X(spec: SurfaceSpec) -> int:
    if spec.model == SurfaceModel.P1XP1:
        return 2
    if spec.model == SurfaceModel.F2:
        return 1
    return 10 - spec.degree - len(spec.simple_roots)


def legal_point_specs(spec: SurfaceSpec) -> List[PointSpec]:
    """Generic point, each (-1)-curve, and each meeting pair of (-1)-curves (an annotated point once)."""
    dy = negative_curve_set(spec)
    curves = dy.minus_one
    points = [PointSpec(())]
    seen = set()
    points.extend(PointSpec((c.id,)) for c in curves)
    for i, a in enumerate(curves):
        for b in curves[i + 1:]:
            if pairing(spec.lattice, a.cls, b.cls) < 1:
                continue
            try:
                point, _, _ = _curves_through(spec, dy, [a.cls, b.cls])
            except InputError:
                continue
            if point is not None:
                if point.point_id in seen:
                    continue
                seen.add(point.point_id)
            points.append(PointSpec((a.id, b.id)))
    return points


def local_intersection(annotation: IncidenceAnnotation, a: CurveRef, b: CurveRef) -> int:
    """Intersection number of two members at the annotated point."""
    return max(annotation.multiplicity(a) * annotation.multiplicity(b), annotation.contact_order(a, b))


def annotated_point(spec: SurfaceSpec, chosen: Sequence[DivisorClass]) -> Optional[IncidenceAnnotation]:
    """The annotation a pair of curves pins down: its members are exactly the pair,
    or the pair meets nowhere else because the annotations use up their pairing."""
    if len(chosen) != 2:
        return None
    a, b = chosen
    holding = [x for x in spec.annotations if a in x.refs() and b in x.refs()]
    exact = [x for x in holding if set(x.refs()) == {a, b}]
    used = sum(local_intersection(x, a, b) for x in holding)
    candidates = exact or (holding if used == pairing(spec.lattice, a, b) else [])
    if len(candidates) > 1:
        raise InputError(
            f"{a.pretty()} and {b.pretty()} meet at several annotated points "
            f"({', '.join(x.point_id for x in candidates)}); the blown-up point is ambiguous")
    return candidates[0] if candidates else None


def _curves_through(spec: SurfaceSpec, dy, chosen: List[DivisorClass]):
    """Curves of D(Y) and tags through the blown-up point, with the annotation it consumes."""
    point = annotated_point(spec, chosen)
    through = list(chosen)
    tags: Dict[str, int] = {}
    if point is not None:
        for ref, mult in point.members:
            if isinstance(ref, str):
                tags[ref] = mult
                continue
            curve = dy.by_id(dy.id_of(ref))
            if curve.kind != CurveKind.MINUS_ONE:
                raise InputError(
                    f"Annotated point '{point.point_id}' lies on the (-2)-curve {ref.pretty()}; "
                    "blown-up points avoid A(Y)")
            if mult != 1:
                raise InputError(f"Annotated point '{point.point_id}' is singular on the smooth curve {ref.pretty()}")
            if ref not in through:
                through.append(ref)
    return point, through, tags


def _residual_tangencies(point: IncidenceAnnotation, lift, exceptional: DivisorClass) -> List[IncidenceAnnotation]:
    """Members tangent at a blown-up point still meet each other on the exceptional curve."""
    groups: List[List[CurveRef]] = []
    for x, y, order in point.contact:
        joined = [g for g in groups if x in g or y in g]
        merged = [x, y]
        for g in joined:
            merged.extend(r for r in g if r not in merged)
            groups.remove(g)
        groups.append(merged)
    residual = []
    for k, group in enumerate(groups, 1):
        contact = tuple((lift(x), lift(y), order - 1) for x, y, order in point.contact
                        if x in group and order - 1 >= 2)
        residual.append(IncidenceAnnotation(
            point_id=f"{point.point_id}'{k}",
            members=tuple((lift(ref), 1) for ref in group) + ((exceptional, 1),),
            contact=contact,
        ))
    return residual


def blow_up(spec: SurfaceSpec, p: PointSpec) -> SurfaceSpec:
    """Blow up a point of Y lying on the given (-1)-curves and on no (-2)-curve.

    A pair of curves meeting at an annotated point (see annotated_point) means
    that point: every member through it is lifted and the annotation is consumed.
    """
    if not spec.is_blowup:
        raise InputError(f"Blow-ups are modelled on blow-ups of P2, not on '{spec.model.value}'")
    if spec.degree <= 1:
        raise InputError("Cannot blow up a surface of degree 1: the result is not del Pezzo")
    ids = tuple(p.on_curves)
    if len(ids) > 2 or len(set(ids)) != len(ids):
        raise InputError(f"A point is named by at most two distinct negative curves, got {list(ids)}")
    dy = negative_curve_set(spec)
    chosen = []
    for curve_id in ids:
        curve = dy.by_id(curve_id)
        if curve.kind != CurveKind.MINUS_ONE:
            raise InputError(f"Curve {curve_id} ({curve.label()}) is a (-2)-curve; blown-up points avoid A(Y)")
        chosen.append(curve.cls)
    if len(chosen) == 2 and pairing(spec.lattice, chosen[0], chosen[1]) < 1:
        raise InputError(f"Curves {ids[0]} and {ids[1]} are disjoint; no point lies on both")
    point, through, tags = _curves_through(spec, dy, chosen)

    new_index = spec.n + 1
    exceptional = PicardLattice(new_index).exceptional(new_index)

    def lift(ref: CurveRef) -> CurveRef:
        if isinstance(ref, str):
            return ref
        lifted = ref.extend()
        return lifted - exceptional if ref in through else lifted

    roots = tuple(r.extend() for r in spec.simple_roots) + tuple(c.extend() - exceptional for c in through)
    annotations = []
    for annotation in spec.annotations:
        if point is not None and annotation.point_id == point.point_id:
            annotations.extend(_residual_tangencies(annotation, lift, exceptional))
            continue
        annotations.append(IncidenceAnnotation(
            point_id=annotation.point_id,
            members=tuple((lift(ref), m) for ref, m in annotation.members),
            contact=tuple((lift(a), lift(b), o) for a, b, o in annotation.contact),
            parent=None if point is not None and annotation.parent == point.point_id else annotation.parent,
        ))
    blown = SurfaceSpec(
        degree=spec.degree - 1,
        simple_roots=roots,
        annotations=tuple(annotations),
        extra_classes=tuple((tag, cls.extend() - exceptional * tags[tag] if tag in tags else cls.extend())
                            for tag, cls in spec.extra_classes),
        name=None,
    )
    logger.debug("Blew up degree %d at %s: %d new roots", spec.degree,
                 [c.pretty() for c in through] or "a general point", len(through))
    return validate_spec(blown)


def _reflect(cls: DivisorClass, alpha: DivisorClass) -> DivisorClass:
    """Reflection in a root: v + (v.alpha) alpha."""
    return cls + alpha * cls.dot(alpha)


def _reflection_towards_last(e: DivisorClass) -> Optional[DivisorClass]:
    """The next root to reflect in so that e moves to E_n, or None when done."""
    n = e.n
    if e.degree == 0:
        index = e.coeffs.index(1)
        if index == n:
            return None
        coeffs = [0] * (n + 1)
        coeffs[index], coeffs[n] = 1, -1
        return DivisorClass(tuple(coeffs))
    order = sorted(range(1, n + 1), key=lambda i: (-e.multiplicities[i - 1], i))[:3]
    coeffs = [1] + [0] * n
    for i in order:
        coeffs[i] = -1
    return DivisorClass(tuple(coeffs))


def contract(spec: SurfaceSpec, curve_id: int) -> SurfaceSpec:
    """Contract an irreducible (-1)-curve; the result has degree d+1."""
    if not spec.is_blowup or spec.n == 0:
        raise InputError("Nothing to contract: the surface has no (-1)-curves in the blow-up model")
    curve = negative_curve_set(spec).by_id(curve_id)
    if curve.kind != CurveKind.MINUS_ONE:
        raise InputError(f"Curve {curve_id} ({curve.label()}) is not a (-1)-curve")
    e = curve.cls
    roots = list(spec.simple_roots)
    extras = list(spec.extra_classes)
    annotations = list(spec.annotations)
    if spec.n == 2 and e.degree != 0:
        lattice = spec.lattice
        vertex = lattice.exceptional(1) - lattice.exceptional(2)
        model = SurfaceModel.F2 if (vertex in roots or -vertex in roots) else SurfaceModel.P1XP1
        return validate_spec(SurfaceSpec(degree=8, model=model))

    steps = 0
    alpha = _reflection_towards_last(e)
    while alpha is not None:
        e = _reflect(e, alpha)
        roots = [_reflect(r, alpha) for r in roots]
        extras = [(tag, _reflect(cls, alpha)) for tag, cls in extras]
        annotations = [_map_annotation(a, lambda c, al=alpha: _reflect(c, al)) for a in annotations]
        alpha = _reflection_towards_last(e)
        steps += 1
        if steps > 64:
            raise InputError(f"Basis change for {curve.label()} did not terminate")

    def truncate(cls: DivisorClass) -> DivisorClass:
        return DivisorClass(cls.coeffs[:-1])

    kept = []
    for root in roots:
        last = root.coeffs[-1]
        if last == 0:
            kept.append(truncate(root))
        elif last != -1:
            raise InputError(f"Root {root.pretty()} meets the contracted curve {abs(last)} times")
    contracted_annotations = []
    for annotation in annotations:
        members = tuple((ref if isinstance(ref, str) else truncate(ref), m)
                        for ref, m in annotation.members if ref != e)
        if not members:
            continue
        contracted_annotations.append(IncidenceAnnotation(
            point_id=annotation.point_id,
            members=members,
            contact=tuple((a if isinstance(a, str) else truncate(a), b if isinstance(b, str) else truncate(b), o)
                          for a, b, o in annotation.contact if e not in (a, b)),
            parent=annotation.parent,
        ))
    contracted = SurfaceSpec(
        degree=spec.degree + 1,
        simple_roots=tuple(kept),
        annotations=tuple(contracted_annotations),
        extra_classes=tuple((tag, truncate(cls)) for tag, cls in extras),
    )
    return validate_spec(contracted)


def _map_annotation(annotation: IncidenceAnnotation, fn) -> IncidenceAnnotation:
    def apply(ref):
        return ref if isinstance(ref, str) else fn(ref)
    return IncidenceAnnotation(
        point_id=annotation.point_id,
        members=tuple((apply(ref), m) for ref, m in annotation.members),
        contact=tuple((apply(a), apply(b), o) for a, b, o in annotation.contact),
        parent=annotation.parent,
    )


# ---------------------------------------------------------------- file schema

class MemberModel(BaseModel):
    model_config = ConfigDict(extra='forbid')
    curve: Union[int, str]
    multiplicity: int = Field(1, ge=1)


class ContactModel(BaseModel):
    model_config = ConfigDict(extra='forbid')
    curves: Tuple[Union[int, str], Union[int, str]]
    order: int = Field(ge=2)


class AnnotationModel(BaseModel):
    model_config = ConfigDict(extra='forbid')
    point_id: str
    members: List[MemberModel]
    contact: List[ContactModel] = []
    parent: Optional[str] = None


class ExtraClassModel(BaseModel):
    model_config = ConfigDict(extra='forbid', populate_by_name=True)
    tag: str
    divisor_class: Union[List[int], str] = Field(alias="class")


class SpecFile(BaseModel):
    model_config = ConfigDict(extra='forbid')
    degree: int = Field(ge=1, le=9)
    model: Literal["blowup", "p1xp1", "f2"] = "blowup"
    roots: List[Union[List[int], str]] = []
    annotations: List[AnnotationModel] = []
    extra_classes: List[ExtraClassModel] = []
    name: Optional[str] = None


def pydantic_message(error: ValidationError, source: str) -> str:
    lines = [f"{source}: invalid document"]
    for item in error.errors():
        location = '.'.join(str(part) for part in item['loc']) or '<root>'
        lines.append(f"  {location}: {item['msg']}")
    return '\n'.join(lines)


def read_json(path: str):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None


def spec_from_dict(data, source: str = "<spec>") -> SurfaceSpec:
    try:
        document = SpecFile.model_validate(data)
    except ValidationError as e:
        raise InputError(pydantic_message(e, source)) from None
    n = 9 - document.degree
    model = SurfaceModel(document.model)
    if model != SurfaceModel.BLOWUP:
        return validate_spec(SurfaceSpec(degree=document.degree, model=model, name=document.name,
                                         simple_roots=tuple(parse_class(r, n) for r in document.roots)))
    roots = tuple(parse_class(r, n) for r in document.roots)
    extras = tuple((x.tag, parse_class(x.divisor_class, n)) for x in document.extra_classes)
    base = validate_spec(SurfaceSpec(degree=document.degree, simple_roots=roots, name=document.name))
    annotations = ()
    if document.annotations:
        dy = negative_curve_set(base)
        tags = {tag for tag, _ in extras}

        def resolve(ref):
            if isinstance(ref, int):
                return dy.by_id(ref).cls
            if ref in tags:
                return ref
            cls = parse_class(ref, n)
            if dy.id_of(cls) is None:
                raise InputError(f"{source}: {ref} is neither a curve of D(Y) nor a declared extra class")
            return cls

        annotations = tuple(IncidenceAnnotation(
            point_id=a.point_id,
            members=tuple((resolve(m.curve), m.multiplicity) for m in a.members),
            contact=tuple((resolve(c.curves[0]), resolve(c.curves[1]), c.order) for c in a.contact),
            parent=a.parent,
        ) for a in document.annotations)
    return validate_spec(replace(base, annotations=annotations, extra_classes=extras))


def load_spec(path: str) -> SurfaceSpec:
    """Read and validate a surface spec JSON file."""
    spec = spec_from_dict(read_json(path), source=path)
    logger.debug("Loaded %s: degree %d, type %s", path, spec.degree, spec.singularity)
    return spec


def spec_to_dict(spec: SurfaceSpec) -> dict:
    def ref_text(ref):
        return ref if isinstance(ref, str) else ref.pretty()

    data = {"degree": spec.degree, "model": spec.model.value,
            "roots": [list(r.coeffs) for r in spec.simple_roots]}
    if spec.name:
        data["name"] = spec.name
    if spec.extra_classes:
        data["extra_classes"] = [{"tag": tag, "class": list(cls.coeffs)} for tag, cls in spec.extra_classes]
    if spec.annotations:
        data["annotations"] = [{
            "point_id": a.point_id,
            "members": [{"curve": ref_text(ref), "multiplicity": m} for ref, m in a.members],
            "contact": [{"curves": [ref_text(x), ref_text(y)], "order": o} for x, y, o in a.contact],
            **({"parent": a.parent} if a.parent else {}),
        } for a in spec.annotations]
    return data


def dump_spec(spec: SurfaceSpec, path: Optional[str] = None) -> str:
    text = json.dumps(spec_to_dict(spec), indent=2, sort_keys=True)
    if path:
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text + '\n')
    return text
