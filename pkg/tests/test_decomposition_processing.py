from fractions import Fraction

import pytest

from curve_processing import negative_curve_set
from data_processing_common import CertificateInvalid, InputError
from decomposition_processing import (
    AUDIT_MAX_DEGREE,
    FiberType,
    SlaveDivisor,
    SlaveMode,
    classify_fiber_decomposition,
    decompositions_of,
    denominator,
    fiber_classes,
    is_nef,
    maximal_boundary,
    movable_classes,
    nef_classes,
    verify_slave_bound,
)
from graph_processing import build_dual_graph
from lattice_utils import parse_class


def test_anticanonical_decomposition_of_two_point_blowup(smooth):
    spec = smooth(7)
    dy = negative_curve_set(spec)
    (dec,) = decompositions_of(spec, spec.anticanonical, dy)
    e1, e2, line = (dy.id_of(parse_class(text, 2)) for text in ("E1", "E2", "H-E1-E2"))
    assert dec.coefficient(e1) == 2
    assert dec.coefficient(e2) == 2
    assert dec.coefficient(line) == 3


def test_decompositions_reject_non_effective_classes(smooth):
    spec = smooth(7)
    with pytest.raises(InputError, match="negative anticanonical degree"):
        decompositions_of(spec, -spec.lattice.exceptional(1))


def test_fiber_of_type_one(make_spec):
    spec = make_spec(7, ["E1-E2"])
    g = build_dual_graph(spec)
    (dec,) = decompositions_of(spec, parse_class("H-E1", 2))
    assert classify_fiber_decomposition(dec, g) == FiberType.TYPE1


def test_fiber_of_type_two(make_spec):
    # H - E1 = 2 E3 + (H - E1 - E2 - E3) + (E2 - E3)
    spec = make_spec(6, ["H-E1-E2-E3", "E2-E3"])
    g = build_dual_graph(spec)
    (dec,) = decompositions_of(spec, parse_class("H-E1", 3))
    assert classify_fiber_decomposition(dec, g) == FiberType.TYPE2


def test_fiber_of_type_three(make_spec):
    # H - E1 = 2 E4 + 2 (E3 - E4) + (H - E1 - E2 - E3) + (E2 - E3)
    spec = make_spec(5, ["H-E1-E2-E3", "E2-E3", "E3-E4"])
    dy = negative_curve_set(spec)
    g = build_dual_graph(spec)
    e4, chain = dy.id_of(parse_class("E4", 4)), dy.id_of(parse_class("E3-E4", 4))
    dec = next(d for d in decompositions_of(spec, parse_class("H-E1", 4), dy)
               if d.coefficient(e4) == 2 and d.coefficient(chain) == 2)
    assert classify_fiber_decomposition(dec, g) == FiberType.TYPE3


def test_classification_needs_a_fiber_class(smooth):
    spec = smooth(7)
    g = build_dual_graph(spec)
    (dec,) = decompositions_of(spec, spec.anticanonical)
    with pytest.raises(InputError, match="not a fiber class"):
        classify_fiber_decomposition(dec, g)


def test_nef_classes(smooth):
    spec = smooth(7)
    dy = negative_curve_set(spec)
    assert is_nef(dy, spec.lattice.hyperplane())
    assert not is_nef(dy, spec.lattice.exceptional(1))
    assert sorted(c.pretty() for c in fiber_classes(spec, dy)) == ["H-E1", "H-E2"]
    assert all(is_nef(dy, v) for v in nef_classes(spec, 1, AUDIT_MAX_DEGREE, dy))
    assert spec.anticanonical in movable_classes(spec, dy)


@pytest.mark.parametrize("degree, expected", [(7, 3), (6, 1)])
def test_denominator_of_smooth_surfaces(smooth, degree, expected):
    result = denominator(smooth(degree))
    assert result.value == expected
    assert max(c for _, c in result.coefficients) == expected


def test_empty_slave_divisor(smooth):
    spec = smooth(7)
    with pytest.raises(CertificateInvalid) as info:
        verify_slave_bound(spec, SlaveDivisor(()), SlaveMode.TOTAL)
    assert info.value.witness is not None
    bound = verify_slave_bound(spec, SlaveDivisor(()), SlaveMode.EXCEPTIONAL)
    # three (-1)-curves each contribute 1 to delta
    assert bound.delta == 3
    assert bound.sigma_bound == 5


def test_slave_coefficients_must_be_nonnegative():
    with pytest.raises(InputError):
        SlaveDivisor.from_mapping({0: Fraction(-1)})


def test_maximal_boundary_of_the_sextic_is_the_hexagon(smooth):
    spec = smooth(6)
    result = maximal_boundary(spec)
    assert result.value == 6
    assert all(term.curve_id is not None and term.coefficient == 1 for term in result.terms)
