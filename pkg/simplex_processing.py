"""Exact two-phase simplex over fractions.Fraction with Bland's rule.

Solves   minimize c.x   subject to   A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
Bland's rule (smallest eligible index enters and leaves) rules out cycling,
so the method terminates on degenerate problems as well.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

# Largest number of variables for which the optimum is refined lexicographically.
LEX_REFINE_LIMIT = 64

OPTIMAL = 'optimal'
INFEASIBLE = 'infeasible'
UNBOUNDED = 'unbounded'


@dataclass(frozen=True)
class LPResult:
    status: str
    x: Tuple[Fraction, ...] = ()
    value: Optional[Fraction] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


class RationalSimplex:
    """Dense simplex tableau with exact arithmetic."""

    def __init__(self, c: Sequence, A_eq: Sequence[Sequence] = (), b_eq: Sequence = (),
                 A_ub: Sequence[Sequence] = (), b_ub: Sequence = ()):
        self.n = len(c)
        self._validate_shapes(A_eq, b_eq, self.n, "equality")
        self._validate_shapes(A_ub, b_ub, self.n, "inequality")
        self.c = [Fraction(v) for v in c]
        rows = []
        rhs = []
        n_slack = len(A_ub)
        for row, value in zip(A_eq, b_eq):
            rows.append([Fraction(v) for v in row] + [Fraction(0)] * n_slack)
            rhs.append(Fraction(value))
        for k, (row, value) in enumerate(zip(A_ub, b_ub)):
            slack = [Fraction(0)] * n_slack
            slack[k] = Fraction(1)
            rows.append([Fraction(v) for v in row] + slack)
            rhs.append(Fraction(value))
        for i in range(len(rows)):
            if rhs[i] < 0:
                rows[i] = [-v for v in rows[i]]
                rhs[i] = -rhs[i]
        self.m = len(rows)
        self.n_structural = self.n + n_slack
        # artificial columns follow the structural ones
        self.A = [row + [Fraction(1) if k == i else Fraction(0) for k in range(self.m)]
                  for i, row in enumerate(rows)]
        self.b = rhs
        self.width = self.n_structural + self.m
        self.basis = [self.n_structural + i for i in range(self.m)]
        self.reduced = [Fraction(0)] * self.width
        self.value = Fraction(0)
        self.pivots = 0

    @staticmethod
    def _validate_shapes(A, b, n, label):
        if len(A) != len(b):
            raise ValueError(f"{label} constraints: {len(A)} rows but {len(b)} right-hand sides")
        for row in A:
            if len(row) != n:
                raise ValueError(f"{label} constraint row has {len(row)} entries, expected {n}")

    def pivot(self, i: int, j: int):
        piv = self.A[i][j]
        self.A[i] = [v / piv for v in self.A[i]]
        self.b[i] /= piv
        for k in range(self.m):
            if k != i and self.A[k][j] != 0:
                f = self.A[k][j]
                self.A[k] = [a - f * p for a, p in zip(self.A[k], self.A[i])]
                self.b[k] -= f * self.b[i]
        f = self.reduced[j]
        if f != 0:
            self.reduced = [r - f * p for r, p in zip(self.reduced, self.A[i])]
            self.value += f * self.b[i]
        self.basis[i] = j
        self.pivots += 1

    def bland_primal_step(self, allowed: int) -> str:
        try:
            j = min(j for j in range(allowed) if self.reduced[j] < 0)
        except ValueError:
            return OPTIMAL
        try:
            _, _, i = min((self.b[i] / self.A[i][j], self.basis[i], i)
                          for i in range(self.m) if self.A[i][j] > 0)
        except ValueError:
            return UNBOUNDED
        self.pivot(i, j)
        return 'go_on'

    def bland_primal(self, allowed: int) -> str:
        while True:
            status = self.bland_primal_step(allowed)
            if status != 'go_on':
                return status

    def first_phase_cost(self):
        """Cost = sum of artificials, expressed in the artificial basis."""
        self.reduced = [Fraction(0)] * self.width
        for j in range(self.n_structural):
            self.reduced[j] = -sum((self.A[i][j] for i in range(self.m)), Fraction(0))
        self.value = sum(self.b, Fraction(0))

    def pivot_out_artificials(self):
        """Drive artificial columns out of the basis; drop redundant rows."""
        i = 0
        while i < self.m:
            if self.basis[i] >= self.n_structural:
                column = next((j for j in range(self.n_structural) if self.A[i][j] != 0), None)
                if column is None:
                    del self.A[i]
                    del self.b[i]
                    del self.basis[i]
                    self.m -= 1
                    continue
                self.pivot(i, column)
            i += 1

    def second_phase_cost(self):
        cost = self.c + [Fraction(0)] * (self.width - self.n)
        self.reduced = list(cost)
        self.value = Fraction(0)
        for i, j in enumerate(self.basis):
            if cost[j] != 0:
                f = cost[j]
                self.reduced = [r - f * a for r, a in zip(self.reduced, self.A[i])]
                self.value += f * self.b[i]

    def solve(self) -> LPResult:
        self.first_phase_cost()
        self.bland_primal(self.n_structural)
        if self.value > 0:
            return LPResult(INFEASIBLE)
        self.pivot_out_artificials()
        self.second_phase_cost()
        status = self.bland_primal(self.n_structural)
        if status == UNBOUNDED:
            return LPResult(UNBOUNDED)
        x = [Fraction(0)] * self.n_structural
        for i, j in enumerate(self.basis):
            x[j] = self.b[i]
        values = tuple(x[:self.n])
        objective = sum((c * v for c, v in zip(self.c, values)), Fraction(0))
        logger.debug("LP %dx%d solved in %d pivots, value %s", self.m, self.n, self.pivots, objective)
        return LPResult(OPTIMAL, values, objective)


def solve_lp(c, A_eq=(), b_eq=(), A_ub=(), b_ub=(), lexicographic=False) -> LPResult:
    """Minimize c.x; optionally return the lexicographically smallest optimum."""
    result = RationalSimplex(c, A_eq, b_eq, A_ub, b_ub).solve()
    if not result.is_optimal or not lexicographic or len(c) > LEX_REFINE_LIMIT:
        return result
    A_eq = [list(row) for row in A_eq] + [list(c)]
    b_eq = list(b_eq) + [result.value]
    fixed: List[Tuple[int, Fraction]] = []
    x = result.x
    for k in range(len(c)):
        rows = A_eq + [[1 if j == index else 0 for j in range(len(c))] for index, _ in fixed]
        rhs = b_eq + [value for _, value in fixed]
        unit = [1 if j == k else 0 for j in range(len(c))]
        step = RationalSimplex(unit, rows, rhs, A_ub, b_ub).solve()
        if not step.is_optimal:
            break
        fixed.append((k, step.value))
        x = step.x
    return LPResult(OPTIMAL, tuple(x), result.value)
