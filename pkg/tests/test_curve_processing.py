import pytest

from curve_processing import (
    CurveKind,
    effective_positive_roots,
    enumerate_minus_one_candidates,
    enumerate_root_candidates,
    format_singularity_type,
    irreducible_minus_one_curves,
    negative_curve_set,
    pairing_table,
    validate_simple_roots,
)
from data_processing_common import InputError
from lattice_utils import PicardLattice, parse_class
from surface_processing import SurfaceModel, SurfaceSpec


def test_minus_one_classes_of_three_points():
    found = {c.pretty() for c in enumerate_minus_one_candidates(3)}
    assert found == {"E1", "E2", "E3", "H-E1-E2", "H-E1-E3", "H-E2-E3"}


def test_roots_of_two_points_come_in_both_signs():
    assert enumerate_root_candidates(2) == sorted([parse_class("E1-E2", 2), parse_class("-E1+E2", 2)])


@pytest.mark.parametrize("roots, n, expected", [
    (["E1-E2"], 2, "A1"),
    (["E1-E2", "E2-E3"], 3, "A2"),
    (["E1-E2", "E3-E4"], 4, "2A1"),
    (["E2-E3", "E3-E4", "E4-E5", "H-E1-E2-E3"], 5, "D4"),
    (["E1-E2", "E2-E3", "E4-E5"], 5, "A2+A1"),
])
def test_singularity_types(roots, n, expected):
    lattice = PicardLattice(n)
    components = validate_simple_roots(lattice, [parse_class(r, n) for r in roots])
    assert format_singularity_type(components) == expected


def test_type_string_orders_families_then_rank():
    assert format_singularity_type([('A', 1), ('E', 6), ('A', 1)]) == "E6+2A1"
    assert format_singularity_type([('A', 3), ('D', 4)]) == "D4+A3"
    assert format_singularity_type([]) == "smooth"


@pytest.mark.parametrize("roots", [["H"], ["E1-E2", "E1-E2"], ["E1-E2", "E2-E1"], ["E1-E2", "E1-E3"]])
def test_invalid_root_systems(roots):
    with pytest.raises(InputError):
        validate_simple_roots(PicardLattice(3), [parse_class(r, 3) for r in roots])


def test_positive_roots_of_a2():
    lattice = PicardLattice(3)
    simple = [parse_class("E1-E2", 3), parse_class("E2-E3", 3)]
    assert parse_class("E1-E3", 3) in effective_positive_roots(lattice, simple)
    assert len(effective_positive_roots(lattice, simple)) == 3


def test_root_breaks_the_curve_it_absorbs():
    # E1 = E2 + (E1 - E2) is reducible once E1 - E2 is effective
    lattice = PicardLattice(2)
    curves = irreducible_minus_one_curves(lattice, [parse_class("E1-E2", 2)])
    assert [c.cls.pretty() for c in curves] == ["E2", "H-E1-E2"]


def test_negative_curve_set_ids(make_spec):
    spec = make_spec(7, ["E1-E2"])
    dy = negative_curve_set(spec)
    assert [c.id for c in dy.curves] == [0, 1, 2]
    assert dy.by_id(2).kind == CurveKind.MINUS_TWO
    assert dy.id_of(parse_class("E1-E2", 2)) == 2
    assert dy.id_of(parse_class("E1", 2)) is None
    with pytest.raises(InputError):
        dy.by_id(3)


def test_smooth_sextic_has_six_lines(smooth):
    dy = negative_curve_set(smooth(6))
    assert len(dy.minus_one) == 6
    assert not dy.minus_two


def test_pairing_table_is_symmetric(make_spec):
    spec = make_spec(6, ["E1-E2"])
    dy = negative_curve_set(spec)
    table = pairing_table(spec.lattice, dy.curves)
    assert all(table[(a, b)] == table[(b, a)] for a, b in table)
    assert all(table[(c.id, c.id)] in (-1, -2) for c in dy.curves)


def test_quadric_has_no_blowup_curve_set():
    with pytest.raises(InputError):
        negative_curve_set(SurfaceSpec(degree=8, model=SurfaceModel.P1XP1))
