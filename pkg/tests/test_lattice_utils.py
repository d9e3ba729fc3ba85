import random
from fractions import Fraction

import pytest

from data_processing_common import InputError
from lattice_utils import (
    DivisorClass,
    PicardLattice,
    RationalDivisor,
    anticanonical_class,
    anticanonical_degree,
    canonical_class,
    is_minus_one_class,
    is_root_class,
    pairing,
    parse_class,
)


def test_parse_symbolic_class():
    assert parse_class("2H-E1-E2", 3) == DivisorClass((2, -1, -1, 0))
    assert parse_class("3H - 2E1 + E4", 4) == DivisorClass((3, -2, 0, 0, 1))


def test_parse_raw_coordinates():
    assert parse_class("3,-1,-1", 2) == DivisorClass((3, -1, -1))
    assert parse_class([1, 0, -1], 2) == DivisorClass((1, 0, -1))


@pytest.mark.parametrize("text, n", [("E4", 3), ("2X+H", 2), ("", 1), ("1,2", 3), ("H,E1", 1)])
def test_parse_rejects_malformed_classes(text, n):
    with pytest.raises(InputError):
        parse_class(text, n)


def test_pretty_rendering():
    assert parse_class("3H-2E1", 2).pretty() == "3H-2E1"
    assert PicardLattice(2).zero().pretty() == "0"
    assert PicardLattice(1).exceptional(1).pretty() == "E1"


def test_pairing_and_canonical_class():
    lattice = PicardLattice(3)
    H = lattice.hyperplane()
    E1 = lattice.exceptional(1)
    assert pairing(lattice, H, H) == 1
    assert pairing(lattice, E1, E1) == -1
    assert pairing(lattice, H, E1) == 0
    K = canonical_class(lattice)
    assert pairing(lattice, K, K) == 6
    assert anticanonical_class(lattice) == -K
    assert anticanonical_degree(lattice, E1) == 1
    assert anticanonical_degree(lattice, H) == 3


def test_gram_matrix_is_diagonal():
    assert PicardLattice(2).gram_matrix() == [[1, 0, 0], [0, -1, 0], [0, 0, -1]]


def test_minus_one_and_root_predicates():
    lattice = PicardLattice(2)
    assert is_minus_one_class(lattice, parse_class("H-E1-E2", 2))
    assert not is_minus_one_class(lattice, parse_class("H-E1", 2))
    assert is_root_class(lattice, parse_class("E1-E2", 2))
    assert not is_root_class(lattice, parse_class("E1", 2))


def test_multiplicities_are_the_b_coefficients():
    assert parse_class("2H-E1-3E2", 2).multiplicities == (1, 3)


def test_class_arithmetic():
    a = parse_class("H-E1", 2)
    b = parse_class("E1-E2", 2)
    assert a + b == parse_class("H-E2", 2)
    assert a - b == parse_class("H-2E1+E2", 2)
    assert 2 * a == parse_class("2H-2E1", 2)
    assert a.extend() == parse_class("H-E1", 3)


def test_rank_mismatch_is_an_input_error():
    with pytest.raises(InputError, match="Dimension mismatch"):
        parse_class("H", 1) + parse_class("H", 2)
    with pytest.raises(InputError):
        PicardLattice(2).check(parse_class("H", 3))


@pytest.mark.parametrize("n", [-1, 9, True])
def test_lattice_rejects_bad_point_counts(n):
    with pytest.raises(InputError):
        PicardLattice(n)


def test_exceptional_index_checked():
    with pytest.raises(InputError, match="E3"):
        PicardLattice(2).exceptional(3)


def test_divisor_entries_must_be_integers():
    with pytest.raises(InputError):
        DivisorClass((1, True))
    with pytest.raises(InputError):
        DivisorClass(())


def test_rational_divisor_merges_and_sums():
    n = 3
    half = Fraction(1, 2)
    D = RationalDivisor.of([
        (parse_class("E1", n), half),
        (parse_class("H-E1-E2", n), 1),
        (parse_class("E1", n), half),
        (parse_class("E3", n), 0),
    ])
    assert len(D.terms) == 2
    assert D.coefficient_sum() == 2
    assert D.total_class(4) == (1, 0, -1, 0)
    assert D.dot(parse_class("E2", n)) == 1
    with pytest.raises(InputError):
        D.total_class(3)


@pytest.mark.parametrize("n", [3, 6, 8])
def test_pairing_is_symmetric_and_bilinear(n):
    lattice = PicardLattice(n)
    rng = random.Random(n)

    def vector():
        return DivisorClass(tuple(rng.randint(-4, 4) for _ in range(n + 1)))

    for _ in range(50):
        a, b, c = vector(), vector(), vector()
        k = rng.randint(-3, 3)
        assert pairing(lattice, a, b) == pairing(lattice, b, a)
        assert pairing(lattice, a + b, c) == pairing(lattice, a, c) + pairing(lattice, b, c)
        assert pairing(lattice, a * k, c) == k * pairing(lattice, a, c)
        assert pairing(lattice, a - b, c) == pairing(lattice, a, c) - pairing(lattice, b, c)
