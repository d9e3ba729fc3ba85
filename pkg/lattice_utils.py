"""Exact integer arithmetic in the Picard lattice Z^{1,n} of a blow-up of P2.

A class aH - b1E1 - ... - bnEn is stored as the tuple (a, -b1, ..., -bn),
so the pairing is a0*b0 - sum(ai*bi) on raw coefficients.
"""
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from data_processing_common import InputError

MAX_POINTS = 8

_TERM_PATTERN = re.compile(r'([+-]?)\s*(\d*)\s*(H|E(\d+))', re.IGNORECASE)


@dataclass(frozen=True, order=True)
class DivisorClass:
    """Integer class in the basis (H, E1, ..., En)."""
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise InputError("A divisor class needs at least the H coefficient")
        if any(not isinstance(c, int) or isinstance(c, bool) for c in self.coeffs):
            raise InputError(f"Divisor class entries must be integers, got {self.coeffs!r}")

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        """Coefficient of H."""
        return self.coeffs[0]

    @property
    def multiplicities(self) -> Tuple[int, ...]:
        """The b_i of aH - sum b_i E_i."""
        return tuple(-c for c in self.coeffs[1:])

    def _check_rank(self, other: 'DivisorClass'):
        if len(self.coeffs) != len(other.coeffs):
            raise InputError(
                f"Dimension mismatch: {self.pretty()} has rank {len(self.coeffs)}, "
                f"{other.pretty()} has rank {len(other.coeffs)}")

    def __add__(self, other: 'DivisorClass') -> 'DivisorClass':
        self._check_rank(other)
        return DivisorClass(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: 'DivisorClass') -> 'DivisorClass':
        self._check_rank(other)
        return DivisorClass(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> 'DivisorClass':
        return DivisorClass(tuple(-a for a in self.coeffs))

    def __mul__(self, k: int) -> 'DivisorClass':
        return DivisorClass(tuple(k * a for a in self.coeffs))

    __rmul__ = __mul__

    def dot(self, other: 'DivisorClass') -> int:
        self._check_rank(other)
        return self.coeffs[0] * other.coeffs[0] - sum(
            a * b for a, b in zip(self.coeffs[1:], other.coeffs[1:]))

    def square(self) -> int:
        return self.dot(self)

    def extend(self, extra: int = 1) -> 'DivisorClass':
        """Embed into the lattice of a further blow-up (append zeros)."""
        return DivisorClass(self.coeffs + (0,) * extra)

    def pretty(self) -> str:
        """Render as e.g. '2H-E1-E2-E3' (or '0' for the zero class)."""
        parts = []
        a = self.coeffs[0]
        if a:
            parts.append(_term(a, 'H', first=True))
        for i, c in enumerate(self.coeffs[1:], start=1):
            if c:
                parts.append(_term(c, f'E{i}', first=not parts))
        return ''.join(parts) if parts else '0'

    def __str__(self) -> str:
        return self.pretty()


def _term(c: int, symbol: str, first: bool) -> str:
    sign = '-' if c < 0 else ('' if first else '+')
    size = abs(c)
    return f"{sign}{'' if size == 1 else size}{symbol}"


class PicardLattice:
    """Pic(Y) = ZH + ZE1 + ... + ZEn with form diag(1, -1, ..., -1)."""

    def __init__(self, n: int):
        self._validate_n(n)
        self.n = n

    @staticmethod
    def _validate_n(n):
        if not isinstance(n, int) or isinstance(n, bool) or not 0 <= n <= MAX_POINTS:
            raise InputError(f"Number of blown-up points must be in [0, {MAX_POINTS}], got {n!r}")

    @property
    def rank(self) -> int:
        return self.n + 1

    @property
    def degree(self) -> int:
        """K^2 = 9 - n."""
        return 9 - self.n

    def gram_matrix(self) -> List[List[int]]:
        return [[(1 if i == 0 else -1) if i == j else 0 for j in range(self.rank)]
                for i in range(self.rank)]

    def hyperplane(self) -> DivisorClass:
        return DivisorClass((1,) + (0,) * self.n)

    def exceptional(self, i: int) -> DivisorClass:
        if not 1 <= i <= self.n:
            raise InputError(f"E{i} does not exist on a blow-up of {self.n} points")
        coeffs = [0] * self.rank
        coeffs[i] = 1
        return DivisorClass(tuple(coeffs))

    def zero(self) -> DivisorClass:
        return DivisorClass((0,) * self.rank)

    def make(self, coeffs: Sequence[int]) -> DivisorClass:
        cls = DivisorClass(tuple(int(c) for c in coeffs))
        self.check(cls)
        return cls

    def check(self, cls: DivisorClass):
        if len(cls.coeffs) != self.rank:
            raise InputError(
                f"Class {cls.pretty()} has {len(cls.coeffs)} coefficients, lattice rank is {self.rank}")

    def __eq__(self, other):
        return isinstance(other, PicardLattice) and other.n == self.n

    def __hash__(self):
        return hash(('PicardLattice', self.n))

    def __repr__(self):
        return f"PicardLattice(n={self.n})"


@dataclass(frozen=True)
class RationalDivisor:
    """Sum of classes with Fraction coefficients; build with of() to merge and drop zeros."""
    terms: Tuple[Tuple[DivisorClass, Fraction], ...] = ()

    @classmethod
    def of(cls, terms: Iterable[Tuple[DivisorClass, Union[int, Fraction]]]) -> 'RationalDivisor':
        merged: Dict[DivisorClass, Fraction] = {}
        for divisor, coeff in terms:
            merged[divisor] = merged.get(divisor, Fraction(0)) + Fraction(coeff)
        return cls(tuple((divisor, coeff) for divisor, coeff in sorted(merged.items()) if coeff != 0))

    def total_class(self, rank: int) -> Tuple[Fraction, ...]:
        total = [Fraction(0)] * rank
        for divisor, coeff in self.terms:
            if len(divisor.coeffs) != rank:
                raise InputError(f"Class {divisor.pretty()} does not live in a lattice of rank {rank}")
            for i, c in enumerate(divisor.coeffs):
                total[i] += coeff * c
        return tuple(total)

    def coefficient_sum(self) -> Fraction:
        return sum((coeff for _, coeff in self.terms), Fraction(0))

    def dot(self, other: DivisorClass) -> Fraction:
        return sum((coeff * divisor.dot(other) for divisor, coeff in self.terms), Fraction(0))


def pairing(lattice: PicardLattice, a: DivisorClass, b: DivisorClass) -> int:
    """Intersection number a0*b0 - sum ai*bi."""
    lattice.check(a)
    lattice.check(b)
    return a.dot(b)


def canonical_class(lattice: PicardLattice) -> DivisorClass:
    return DivisorClass((-3,) + (1,) * lattice.n)


def anticanonical_class(lattice: PicardLattice) -> DivisorClass:
    return -canonical_class(lattice)


def anticanonical_degree(lattice: PicardLattice, v: DivisorClass) -> int:
    return pairing(lattice, anticanonical_class(lattice), v)


def is_minus_one_class(lattice: PicardLattice, v: DivisorClass) -> bool:
    return pairing(lattice, v, v) == -1 and anticanonical_degree(lattice, v) == 1


def is_root_class(lattice: PicardLattice, v: DivisorClass) -> bool:
    return pairing(lattice, v, v) == -2 and anticanonical_degree(lattice, v) == 0


def parse_class(text: Union[str, Sequence[int]], n: int) -> DivisorClass:
    """Parse "a,b1,...,bn" raw coefficients or symbolic text like "2H-E1-E2"."""
    lattice = PicardLattice(n)
    if not isinstance(text, str):
        return lattice.make(text)
    raw = text.strip()
    if not raw:
        raise InputError("Empty divisor class")
    if re.fullmatch(r'[\s\d,+-]+', raw):
        try:
            values = [int(part) for part in raw.split(',')]
        except ValueError:
            raise InputError(f"Malformed coefficient list '{text}'") from None
        return lattice.make(values)
    coeffs = [0] * lattice.rank
    compact = raw.replace(' ', '')
    position = 0
    for match in _TERM_PATTERN.finditer(compact):
        if match.start() != position:
            break
        sign = -1 if match.group(1) == '-' else 1
        size = int(match.group(2)) if match.group(2) else 1
        if match.group(4) is None:
            coeffs[0] += sign * size
        else:
            index = int(match.group(4))
            if not 1 <= index <= n:
                raise InputError(f"'{text}' mentions E{index}, but only E1..E{n} exist")
            coeffs[index] += sign * size
        position = match.end()
    if position != len(compact):
        raise InputError(f"Cannot parse divisor class '{text}' near position {position}")
    return DivisorClass(tuple(coeffs))
