"""Exact rational linear programs and the LP(T, L) relaxation.

The solver is a phase one simplex over Fractions with Bland's rule, which is
all the algorithms need: they only ask whether a polytope is empty and, if
not, for one of its vertices.
"""
import logging
import math
from enum import Enum
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Tuple

from .instance import BudgetExceeded, Instance, SchedulingException

_LOGGER = logging.getLogger(__name__)

DEFAULT_MAX_BITS = 4096


class NumericOverflow(BudgetExceeded):
    """Raised when tableau entries outgrow the configured bit bound."""


class Sense(Enum):
    """Row sense of a constraint."""

    LE = "<="
    EQ = "="
    GE = ">="


class LpStatus(Enum):
    Feasible = "feasible"
    Infeasible = "infeasible"


class LpRow:
    def __init__(self, coeffs: Dict[int, Fraction], sense: Sense, rhs: Fraction):
        self.coeffs = coeffs
        self.sense = sense
        self.rhs = rhs

    def value(self, x: List[Fraction]) -> Fraction:
        return sum((c * x[k] for k, c in self.coeffs.items()), Fraction(0))

    def holds(self, x: List[Fraction]) -> bool:
        lhs = self.value(x)
        if self.sense == Sense.LE:
            return lhs <= self.rhs
        if self.sense == Sense.GE:
            return lhs >= self.rhs
        return lhs == self.rhs


class LpProblem:
    """Linear constraints over nonnegative variables with hashable keys."""

    def __init__(self) -> None:
        self.variables = []  # type: List[Hashable]
        self._index = {}  # type: Dict[Hashable, int]
        self.rows = []  # type: List[LpRow]

    def add_variable(self, key: Hashable) -> int:
        if key in self._index:
            raise ValueError("duplicate variable %r" % (key,))
        self._index[key] = len(self.variables)
        self.variables.append(key)
        return self._index[key]

    def has_variable(self, key: Hashable) -> bool:
        return key in self._index

    def add_row(self, coeffs: Dict[Hashable, Fraction], sense: Sense, rhs) -> None:
        row = {}
        for key, c in coeffs.items():
            c = Fraction(c)
            if c:
                row[self._index[key]] = c
        self.rows.append(LpRow(row, sense, Fraction(rhs)))

    def is_satisfied(self, x: Dict[Hashable, Fraction]) -> bool:
        """Evaluate every row exactly at x (missing keys read as 0)."""
        values = [Fraction(x.get(key, 0)) for key in self.variables]
        if any(v < 0 for v in values):
            return False
        return all(row.holds(values) for row in self.rows)

    def __repr__(self):
        return "<LpProblem vars=%s rows=%s>" % (len(self.variables), len(self.rows))


class LpSolution:
    def __init__(self, status: LpStatus, x: Optional[Dict[Hashable, Fraction]] = None):
        self.status = status
        self.x = x if x is not None else {}

    @property
    def feasible(self) -> bool:
        return self.status == LpStatus.Feasible

    def __repr__(self):
        return "<LpSolution %s>" % self.status.value


class LpTLParams:
    """Makespan guess T and average load guess L of LP(T, L)."""

    def __init__(self, T: int, L: Fraction) -> None:
        self.T = T
        self.L = Fraction(L)

    def __eq__(self, other):
        if not isinstance(other, LpTLParams):
            return NotImplemented
        return (self.T, self.L) == (other.T, other.L)

    def __repr__(self):
        return "<LpTLParams T=%s L=%s>" % (self.T, self.L)


def _bits(value: Fraction) -> int:
    return max(value.numerator.bit_length(), value.denominator.bit_length())


def solve_feasibility(lp: LpProblem, max_bits: int = DEFAULT_MAX_BITS) -> LpSolution:
    """Decide feasibility of lp and return a vertex when it is feasible.

    :param lp: problem with nonnegative variables
    :param max_bits: bound on numerator/denominator size of tableau entries
    :raises NumericOverflow: when an entry exceeds max_bits
    :rtype: LpSolution
    """
    n = len(lp.variables)
    rows = []  # type: List[Tuple[Dict[int, Fraction], Sense, Fraction]]
    for row in lp.rows:
        coeffs, sense, rhs = dict(row.coeffs), row.sense, row.rhs
        if rhs < 0:
            coeffs = {k: -c for k, c in coeffs.items()}
            rhs = -rhs
            if sense == Sense.LE:
                sense = Sense.GE
            elif sense == Sense.GE:
                sense = Sense.LE
        rows.append((coeffs, sense, rhs))

    # column layout: originals, one slack/surplus per inequality, artificials
    n_slack = sum(1 for _, sense, _ in rows if sense != Sense.EQ)
    n_art = sum(1 for _, sense, _ in rows if sense != Sense.LE)
    width = n + n_slack + n_art
    tableau = []  # type: List[List[Fraction]]
    basis = []  # type: List[int]
    artificial = set()
    slack_col, art_col = n, n + n_slack
    for coeffs, sense, rhs in rows:
        line = [Fraction(0)] * (width + 1)
        for k, c in coeffs.items():
            line[k] = c
        line[width] = rhs
        if sense == Sense.LE:
            line[slack_col] = Fraction(1)
            basis.append(slack_col)
            slack_col += 1
        else:
            if sense == Sense.GE:
                line[slack_col] = Fraction(-1)
                slack_col += 1
            line[art_col] = Fraction(1)
            basis.append(art_col)
            artificial.add(art_col)
            art_col += 1
        tableau.append(line)

    # reduced costs of the phase one objective (sum of artificials)
    cost = [Fraction(0)] * (width + 1)
    for r, line in enumerate(tableau):
        if basis[r] in artificial:
            for k in range(width + 1):
                cost[k] -= line[k]
    for k in artificial:
        cost[k] = Fraction(0)

    pivots = 0
    while True:
        entering = next((k for k in range(width) if cost[k] < 0), None)
        if entering is None:
            break
        leaving = None
        best = None
        for r, line in enumerate(tableau):
            if line[entering] > 0:
                ratio = line[width] / line[entering]
                if (
                    best is None
                    or ratio < best
                    or (ratio == best and basis[r] < basis[leaving])
                ):
                    best, leaving = ratio, r
        if leaving is None:  # pragma: no cover
            # phase one objective is bounded below by zero
            break
        pivot_line = tableau[leaving]
        factor = pivot_line[entering]
        pivot_line[:] = [v / factor for v in pivot_line]
        for r, line in enumerate(tableau):
            if r != leaving and line[entering]:
                f = line[entering]
                line[:] = [a - f * b for a, b in zip(line, pivot_line)]
        f = cost[entering]
        cost[:] = [a - f * b for a, b in zip(cost, pivot_line)]
        basis[leaving] = entering
        pivots += 1
        largest = max((_bits(v) for line in tableau for v in line if v), default=0)
        if largest > max_bits:
            raise NumericOverflow(
                "tableau entry of %s bits exceeds bound %s after %s pivots"
                % (largest, max_bits, pivots)
            )

    residual = -cost[width]
    _LOGGER.debug("phase one finished after %s pivots, residual %s", pivots, residual)
    if residual > 0:
        return LpSolution(LpStatus.Infeasible)

    values = [Fraction(0)] * width
    for r, k in enumerate(basis):
        values[k] = tableau[r][width]
    x = {key: values[k] for k, key in enumerate(lp.variables) if values[k]}
    if not lp.is_satisfied(x):  # pragma: no cover
        raise SchedulingException("simplex returned a point violating %s" % lp)
    return LpSolution(LpStatus.Feasible, x)


def build_lp(inst: Instance, params: LpTLParams) -> LpProblem:
    """Build LP(T, L) for inst.

    Variables x[(i, j)] exist only for finite p_ij <= T; the rows are the
    average load bound, one assignment equation per job and one load bound per
    machine.
    """
    T, L = params.T, params.L
    lp = LpProblem()
    for i, j, value in inst.finite_entries():
        if value <= T:
            lp.add_variable((i, j))

    lp.add_row(
        {
            (i, j): Fraction(value) / inst.m
            for i, j, value in inst.finite_entries()
            if lp.has_variable((i, j))
        },
        Sense.LE,
        L,
    )
    for j in range(inst.n):
        lp.add_row(
            {(i, j): 1 for i in range(inst.m) if lp.has_variable((i, j))},
            Sense.EQ,
            1,
        )
    for i in range(inst.m):
        lp.add_row(
            {
                (i, j): inst.p[i][j]
                for j in range(inst.n)
                if lp.has_variable((i, j))
            },
            Sense.LE,
            T,
        )
    return lp


def lp_feasible(inst: Instance, T: int, L, max_bits: int = DEFAULT_MAX_BITS) -> bool:
    return solve_feasibility(build_lp(inst, LpTLParams(T, L)), max_bits).feasible


def t_search_range(inst: Instance) -> Tuple[int, int]:
    """Integer range [max_j min_i p_ij, sum of finite p_ij] searched for T."""
    if inst.n == 0:
        return 0, 0
    low = max(
        min(inst.p[i][j] for i in inst.machines_for(j)) for j in range(inst.n)
    )
    high = sum(value for _, _, value in inst.finite_entries())
    return math.ceil(low), math.ceil(high)


def minimal_L(inst: Instance, T: int, max_bits: int = DEFAULT_MAX_BITS) -> Fraction:
    """Smallest multiple of 1/m in [0, T] for which LP(T, L) is feasible.

    Assumes LP(T, T) is feasible.
    """
    low, high = 0, inst.m * T
    while low < high:
        mid = (low + high) // 2
        if lp_feasible(inst, T, Fraction(mid, inst.m), max_bits):
            high = mid
        else:
            low = mid + 1
    return Fraction(low, inst.m)


def minimal_TL(inst: Instance, max_bits: int = DEFAULT_MAX_BITS) -> LpTLParams:
    """Binary search the minimal T with LP(T, T) feasible, then the minimal L.

    :rtype: LpTLParams
    """
    if inst.n == 0:
        return LpTLParams(0, 0)
    low, high = t_search_range(inst)
    while low < high:
        mid = (low + high) // 2
        if lp_feasible(inst, mid, mid, max_bits):
            high = mid
        else:
            low = mid + 1
    T = low
    L = minimal_L(inst, T, max_bits)
    _LOGGER.debug("minimal LP parameters T=%s L=%s", T, L)
    return LpTLParams(T, L)
