from fractions import Fraction

import pytest

from curve_processing import negative_curve_set
from data_processing_common import InputError, InsufficientAnnotations
from lattice_utils import parse_class
from lc_processing import (
    Affine,
    BoundaryDivisor,
    BoundaryTerm,
    boundary_from_data,
    check_coefficients,
    lc_check,
    lc_interval,
    lc_verdict,
    lct_by_bisection,
    lct_pair,
    load_boundary,
    normalize_boundary,
    pullback_to_resolution,
    sigma_contribution,
    sums_to_anticanonical,
)
from surface_processing import spec_from_dict


def test_affine_arithmetic():
    f = Affine(Fraction(1, 2), Fraction(1))
    assert f.at(Fraction(1, 4)) == Fraction(3, 4)
    assert (f + 1).at(0) == Fraction(3, 2)
    assert (2 * f).b == 2
    assert Affine.of(3).is_constant


def test_tacnode_threshold(cubic, sample_path):
    support = load_boundary(cubic, sample_path('tacnode.json'))
    assert lct_pair(cubic, support) == Fraction(3, 4)
    assert lct_by_bisection(cubic, support) == Fraction(3, 4)


def test_triple_point_threshold(eckardt, sample_path):
    support = load_boundary(eckardt, sample_path('eckardt_lines.json'))
    assert lct_pair(eckardt, support) == Fraction(2, 3)
    assert not lc_check(eckardt, support)


def test_snc_hexagon_is_lc(smooth, sample_path):
    spec = smooth(6)
    hexagon = load_boundary(spec, sample_path('hexagon.json'))
    assert lc_check(spec, hexagon)
    assert lct_pair(spec, hexagon) == 1
    assert sums_to_anticanonical(spec, hexagon)
    assert sigma_contribution(spec, hexagon) == 6


def test_interval_of_a_scaled_tacnode(cubic, sample_path):
    support = load_boundary(cubic, sample_path('tacnode.json'))
    scaled = BoundaryDivisor(tuple(BoundaryTerm(t.key, Affine(Fraction(0), Fraction(1))) for t in support.terms))
    interval = lc_interval(cubic, scaled)
    assert (interval.lo, interval.hi) == (0, Fraction(3, 4))
    assert lc_check(cubic, scaled, t=Fraction(3, 4))
    assert not lc_check(cubic, scaled, t=Fraction(4, 5))


def test_not_lc_names_the_violation(smooth):
    spec = smooth(7)
    D = BoundaryDivisor.of([(parse_class("E1", 2), 2)])
    result = lc_verdict(spec, D)
    assert not result
    assert "coefficient" in result.witness


def test_normalize_maps_curves_to_ids(smooth):
    spec = smooth(7)
    dy = negative_curve_set(spec)
    D = normalize_boundary(spec, BoundaryDivisor.of([(parse_class("E1", 2), 1), (parse_class("H-E1", 2), 1)]), dy)
    assert D.terms[0].key == dy.id_of(parse_class("E1", 2))
    assert D.terms[1].is_general


def test_general_member_of_a_root_class_is_refused(smooth):
    spec = smooth(7)
    with pytest.raises(InsufficientAnnotations):
        normalize_boundary(spec, BoundaryDivisor.of([(parse_class("E1-E2", 2), 1)]))


def test_check_coefficients():
    with pytest.raises(InputError, match="outside"):
        check_coefficients(BoundaryDivisor.of([(0, 0)]))


def test_boundary_file_schema(smooth):
    spec = smooth(7)
    D = boundary_from_data(spec, [{"curve": "H-E1", "coeff": "1/2", "member": 1}, {"curve": 0, "coeff": 1}])
    assert D.terms[0].coeff.a == Fraction(1, 2)
    assert D.terms[0].copy == 1
    with pytest.raises(InputError, match="weight"):
        boundary_from_data(spec, [{"curve": 0, "coeff": "1", "weight": 2}])
    with pytest.raises(InputError):
        boundary_from_data(spec, [{"curve": 0, "coeff": "1/0"}])


def test_pullback_adds_root_coefficients(make_spec):
    # -K - (E2 + (H-E1-E2) + H + (H-E1)) = E1 - E2
    spec = make_spec(7, ["E1-E2"])
    dy = negative_curve_set(spec)
    e2 = dy.id_of(parse_class("E2", 2))
    line = dy.id_of(parse_class("H-E1-E2", 2))
    root = dy.id_of(parse_class("E1-E2", 2))
    D = BoundaryDivisor.of([(e2, 1), (line, 1), (parse_class("H-E1", 2), 1), (parse_class("H", 2), 1)])
    pulled = pullback_to_resolution(spec, D, dy)
    added = {t.key: t.coeff.a for t in pulled.terms if t.key == root}
    assert added == {root: Fraction(1)}
    assert sums_to_anticanonical(spec, pulled, dy)


def test_lc_check_refuses_coefficients_above_one(cubic):
    D = boundary_from_data(cubic, [{"curve": "E1", "coeff": "2"}])
    with pytest.raises(InputError, match="outside"):
        lc_check(cubic, D)
    assert not lc_verdict(cubic, D)


@pytest.fixture
def contact_three():
    # M is the tangent line at a flex of Q
    return spec_from_dict({
        "degree": 3,
        "extra_classes": [{"tag": "M", "class": "H"}, {"tag": "Q", "class": "3H-2E1-E2-E3-E4-E5-E6"}],
        "annotations": [{"point_id": "f", "members": [{"curve": "M"}, {"curve": "Q"}],
                         "contact": [{"curves": ["M", "Q"], "order": 3}]}],
    })


def _support(name, request, sample_path):
    if name == "contact_three":
        spec = request.getfixturevalue("contact_three")
        return spec, boundary_from_data(spec, [{"curve": "M", "coeff": "1"}, {"curve": "Q", "coeff": "1"}])
    spec_name, path, degree = {
        "tacnode": ("cubic", "tacnode.json", None),
        "triple_point": ("eckardt", "eckardt_lines.json", None),
        "hexagon": ("smooth", "hexagon.json", 6),
    }[name]
    spec = request.getfixturevalue(spec_name)
    if degree is not None:
        spec = spec(degree)
    return spec, load_boundary(spec, sample_path(path))


@pytest.mark.parametrize("name,threshold", [
    ("tacnode", Fraction(3, 4)),
    ("triple_point", Fraction(2, 3)),
    ("contact_three", Fraction(2, 3)),
    ("hexagon", Fraction(1)),
])
def test_threshold_agrees_with_bisection(request, sample_path, name, threshold):
    spec, support = _support(name, request, sample_path)
    assert lct_pair(spec, support) == threshold
    assert lct_by_bisection(spec, support) == threshold


@pytest.mark.parametrize("name", ["tacnode", "triple_point", "contact_three"])
def test_lc_is_monotone_in_the_coefficient(request, sample_path, name):
    spec, support = _support(name, request, sample_path)
    dy = negative_curve_set(spec)
    threshold = lct_pair(spec, support, dy)
    grid = [Fraction(1, 4), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4), Fraction(1)]
    verdicts = [bool(lc_check(spec, support.scaled(c), dy=dy)) for c in grid]
    assert verdicts == sorted(verdicts, reverse=True)
    assert verdicts == [c <= threshold for c in grid]
