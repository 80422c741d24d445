"""Reoptimization on identical machines.

Job sizes are scaled by a makespan target T so machines become unit bins.
Large items (alpha > eps0) are rounded down to multiples of eps0^2 and every
placement of the rounded large items into m bins is tried. For each placement
the old machines are matched to the new bins at least transition cost, and
the small items that no longer fit are packed by First-Fit into bins of
capacity 1 + eps0. The cheapest schedule wins.
"""
import logging
import math
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .instance import (
    Assignment,
    BudgetExceeded,
    Instance,
    InstanceKind,
    SchedulingException,
    load_profile,
    require_kind,
)
from .matching import min_cost_perfect_matching
from .reopt import ReoptInput, transition_cost

_LOGGER = logging.getLogger(__name__)

DEFAULT_CONFIG_CAP = 10 ** 6

Counts = Tuple[int, ...]


class ConfigurationBudgetExceeded(BudgetExceeded):
    """Raised when more configurations exist than the configured cap."""


class RelaxedPackingFailed(SchedulingException):
    """Raised when First-Fit cannot place a small item into any bin."""


def lpt_schedule(inst: Instance) -> Assignment:
    """Longest processing time first onto the least loaded machine."""
    loads = [0] * inst.m
    sigma = [0] * inst.n
    for j in sorted(range(inst.n), key=lambda j: (-inst.size(j), j)):
        i = min(range(inst.m), key=lambda i: (loads[i], i))
        sigma[j] = i
        loads[i] += inst.size(j)
    return Assignment(sigma)


def _bin_types(units: Sequence[int], counts: Counts, capacity) -> List[Counts]:
    """Every count vector <= counts whose weighted sum stays within capacity."""
    types = []

    def extend(prefix, used):
        s = len(prefix)
        if s == len(units):
            types.append(tuple(prefix))
            return
        for c in range(counts[s] + 1):
            if used + c * units[s] > capacity:
                break
            extend(prefix + [c], used + c * units[s])

    extend([], 0)
    types.sort(reverse=True)
    return types


def _dual_schedule(inst: Instance, T: int, delta: Fraction) -> Optional[List[int]]:
    """Schedule of makespan <= (1 + delta) T, or None when T < C*max."""
    grain = delta * delta * T
    large = [j for j in range(inst.n) if inst.size(j) > delta * T]
    if any(inst.size(j) > T for j in large):
        return None
    unit_of = {j: math.floor(inst.size(j) / grain) for j in large}
    units = sorted(set(unit_of.values()), reverse=True)
    counts = tuple(sum(1 for j in large if unit_of[j] == u) for u in units)
    capacity = math.floor(1 / (delta * delta))
    types = [t for t in _bin_types(units, counts, capacity) if any(t)]

    best = {}  # type: Dict[Counts, Tuple[int, Optional[Counts]]]

    def fewest_bins(state: Counts) -> int:
        if not any(state):
            return 0
        if state not in best:
            best[state] = (inst.n + 1, None)
            for t in types:
                if all(c <= s for c, s in zip(t, state)):
                    rest = tuple(s - c for s, c in zip(state, t))
                    value = 1 + fewest_bins(rest)
                    if value < best[state][0]:
                        best[state] = (value, t)
        return best[state][0]

    if fewest_bins(counts) > inst.m:
        return None

    sigma = [0] * inst.n
    loads = [0] * inst.m
    pending = {u: sorted(j for j in large if unit_of[j] == u) for u in units}
    state, i = counts, 0
    while any(state):
        chosen = best[state][1]
        for u, c in zip(units, chosen):
            for _ in range(c):
                j = pending[u].pop(0)
                sigma[j] = i
                loads[i] += inst.size(j)
        state = tuple(s - c for s, c in zip(state, chosen))
        i += 1

    small = sorted(
        (j for j in range(inst.n) if j not in unit_of),
        key=lambda j: (-inst.size(j), j),
    )
    for j in small:
        i = min(range(inst.m), key=lambda i: (loads[i], i))
        if loads[i] > T:
            return None
        sigma[j] = i
        loads[i] += inst.size(j)
    return sigma


def ptas_target(inst: Instance, eps0) -> int:
    """Makespan target T with C*max <= T <= (1 + eps0) C*max.

    Binary search over integer guesses between the trivial lower bound and
    the LPT makespan, each guess checked by the dual approximation.
    """
    require_kind(inst, InstanceKind.Identical)
    if inst.n == 0:
        return 0
    delta = Fraction(eps0)
    lpt_makespan = load_profile(inst, lpt_schedule(inst)).makespan
    low = max(math.ceil(Fraction(sum(inst.sizes), inst.m)), inst.p_max)
    high = lpt_makespan
    found = None
    while low <= high:
        mid = (low + high) // 2
        sigma = _dual_schedule(inst, mid, delta)
        if sigma is None:
            low = mid + 1
        else:
            found, high = sigma, mid - 1
    if found is None:
        return lpt_makespan
    makespan = load_profile(inst, Assignment(found)).makespan
    _LOGGER.debug("ptas target %s (lpt %s)", min(makespan, lpt_makespan), lpt_makespan)
    return min(makespan, lpt_makespan)


class ItemScale:
    """Job sizes scaled by T and the rounding of the large ones."""

    def __init__(self, inst: Instance, T, eps0) -> None:
        self.T = T
        self.eps0 = Fraction(eps0)
        grain = self.eps0 * self.eps0
        self.alpha = [Fraction(inst.size(j), T) for j in range(inst.n)]
        self.large = [j for j, a in enumerate(self.alpha) if a > self.eps0]
        self.rounded = {
            j: math.floor(self.alpha[j] / grain) * grain for j in self.large
        }  # type: Dict[int, Fraction]
        #: distinct rounded large sizes, largest first
        self.classes = sorted(set(self.rounded.values()), reverse=True)
        self._class_index = {size: s for s, size in enumerate(self.classes)}

    @classmethod
    def for_instance(cls, inst: Instance, eps0) -> "ItemScale":
        return cls(inst, ptas_target(inst, eps0), eps0)

    def is_large(self, j: int) -> bool:
        return j in self.rounded

    def class_of(self, j: int) -> int:
        return self._class_index[self.rounded[j]]

    def class_counts(self, jobs) -> Counts:
        counts = [0] * len(self.classes)
        for j in jobs:
            if self.is_large(j):
                counts[self.class_of(j)] += 1
        return tuple(counts)

    @property
    def totals(self) -> Counts:
        return self.class_counts(self.large)

    def __repr__(self):
        return "<ItemScale T=%s eps0=%s large=%s classes=%s>" % (
            self.T,
            self.eps0,
            len(self.large),
            [str(c) for c in self.classes],
        )


class Configuration:
    """Rounded large items per bin, as counts over the size classes.

    Bins are listed in nonincreasing lexicographic order of their counts;
    which machine receives which bin is left to the matching.
    """

    def __init__(self, classes: Sequence[Fraction], bins: Sequence[Counts]) -> None:
        self.classes = tuple(classes)
        self.bins = tuple(tuple(b) for b in bins)

    def load(self, k: int) -> Fraction:
        return sum(
            (c * size for c, size in zip(self.bins[k], self.classes)), Fraction(0)
        )

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.classes == other.classes and self.bins == other.bins

    def __hash__(self):
        return hash(self.bins)

    def __repr__(self):
        return "<Configuration %s>" % (list(self.bins),)


def enumerate_configurations(
    items: ItemScale, m: int, cap: int = DEFAULT_CONFIG_CAP
) -> Iterator[Configuration]:
    """Stream every placement of the rounded large items into m unit bins.

    :raises ConfigurationBudgetExceeded: once more than cap were produced
    """
    totals = items.totals
    types = _bin_types(items.classes, totals, 1)
    produced = [0]

    def extend(chosen: List[Counts], start: int, left: Counts):
        if len(chosen) == m:
            if any(left):
                return
            produced[0] += 1
            if produced[0] > cap:
                raise ConfigurationBudgetExceeded(
                    "more than %s configurations for %s bins" % (cap, m)
                )
            yield Configuration(items.classes, chosen)
            return
        remaining = sum(c * s for c, s in zip(left, items.classes))
        if remaining > m - len(chosen):
            return
        for k in range(start, len(types)):
            t = types[k]
            if all(c <= r for c, r in zip(t, left)):
                rest = tuple(r - c for r, c in zip(left, t))
                yield from extend(chosen + [t], k, rest)

    yield from extend([], 0, totals)


def _omitted_smalls(items: ItemScale, smalls: Sequence[int], base: Fraction):
    """Largest small items to drop so that base plus the rest stays <= 1.

    Equal sizes drop the higher job index first.
    """
    order = sorted(smalls, key=lambda j: (-items.alpha[j], -j))
    total = base + sum((items.alpha[j] for j in smalls), Fraction(0))
    omitted = []
    for j in order:
        if total <= 1:
            break
        omitted.append(j)
        total -= items.alpha[j]
    return omitted


def relaxed_first_fit(
    items: ItemScale, loads: List[Fraction], pool: Sequence[int]
) -> Dict[int, int]:
    """First-Fit of pool into bins of capacity 1 + eps0, updating loads.

    Items go largest first (ties by job index), bins are scanned in index
    order.

    :return: job -> bin
    :raises RelaxedPackingFailed: if an item fits nowhere
    """
    capacity = 1 + items.eps0
    placed = {}
    for j in sorted(pool, key=lambda j: (-items.alpha[j], j)):
        for i, load in enumerate(loads):
            if load + items.alpha[j] <= capacity:
                loads[i] += items.alpha[j]
                placed[j] = i
                break
        else:
            raise RelaxedPackingFailed(
                "job %s of size %s fits no bin, loads %s"
                % (j, items.alpha[j], [str(x) for x in loads])
            )
    return placed


class MatchResult:
    def __init__(self, assignment: Assignment, cost: int, makespan) -> None:
        self.assignment = assignment
        self.cost = cost
        self.makespan = makespan

    def key(self):
        return self.cost, self.makespan, self.assignment.sigma

    def __repr__(self):
        return "<MatchResult cost=%s makespan=%s>" % (self.cost, self.makespan)


def match_and_cost(
    reopt: ReoptInput, items: ItemScale, config: Configuration
) -> MatchResult:
    """Match old machines to the bins of config and pack the small items.

    :raises RelaxedPackingFailed: if the small items cannot be packed
    """
    inst = reopt.new
    m = reopt.m
    contents = reopt.old_contents()
    old_large = {}  # type: Dict[int, Counts]
    old_small = {}  # type: Dict[int, List[int]]
    for i in range(m):
        jobs = contents[i]
        old_large[i] = items.class_counts(jobs)
        old_small[i] = [j for j in jobs if not items.is_large(j)]

    costs = []
    omissions = {}  # type: Dict[Tuple[int, int], List[int]]
    for i in range(m):
        row = []
        for k in range(m):
            missing = sum(
                max(0, c - o) for c, o in zip(config.bins[k], old_large[i])
            )
            omitted = _omitted_smalls(items, old_small[i], config.load(k))
            omissions[(i, k)] = omitted
            row.append(missing + len(omitted))
        costs.append(row)
    matched = min_cost_perfect_matching(costs)

    sigma = [None] * inst.n  # type: List[Optional[int]]
    large_pool = {s: [] for s in range(len(items.classes))}  # type: Dict
    small_pool = []
    for j in range(inst.n):
        if reopt.is_unplaced(j):
            if items.is_large(j):
                large_pool[items.class_of(j)].append(j)
            else:
                small_pool.append(j)

    slots = {}  # type: Dict[int, List[int]]
    for i in range(m):
        k = matched[i]
        own = sorted(j for j in contents[i] if items.is_large(j))
        free = []
        for s, wanted in enumerate(config.bins[k]):
            mine = [j for j in own if items.class_of(j) == s]
            for j in mine[:wanted]:
                sigma[j] = i
            large_pool[s].extend(mine[wanted:])
            free.extend([s] * max(0, wanted - len(mine)))
        slots[i] = free
        omitted = set(omissions[(i, k)])
        for j in old_small[i]:
            if j in omitted:
                small_pool.append(j)
            else:
                sigma[j] = i
    for pool in large_pool.values():
        pool.sort()
    for i in range(m):
        for s in slots[i]:
            sigma[large_pool[s].pop(0)] = i
    if any(large_pool.values()):  # pragma: no cover
        raise SchedulingException("large items left over: %s" % large_pool)

    loads = [Fraction(0)] * m
    for j, i in enumerate(sigma):
        if i is not None:
            loads[i] += items.alpha[j]
    for j, i in relaxed_first_fit(items, loads, small_pool).items():
        sigma[j] = i

    assignment = Assignment(sigma)
    makespan = load_profile(inst, assignment).makespan
    return MatchResult(assignment, transition_cost(reopt, assignment), makespan)


def reoptimize_identical(
    reopt: ReoptInput, eps, config_cap: int = DEFAULT_CONFIG_CAP
) -> Tuple[Assignment, int]:
    """Cheapest schedule of makespan <= (1 + eps) C*max over all configurations.

    :param eps: accuracy, positive
    :param config_cap: largest number of configurations to evaluate
    :return: (assignment, transition cost)
    :raises ConfigurationBudgetExceeded: if the configurations exceed config_cap
    """
    require_kind(reopt.new, InstanceKind.Identical)
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive, got %s" % eps)
    inst = reopt.new
    if inst.n == 0:
        return Assignment([]), 0

    eps0 = eps / 4
    items = ItemScale.for_instance(inst, eps0)
    if sum(items.alpha) > inst.m:
        raise SchedulingException(
            "scaled sizes sum to %s on %s machines" % (sum(items.alpha), inst.m)
        )
    _LOGGER.debug("%s", items)

    best = None  # type: Optional[MatchResult]
    evaluated = 0
    for config in enumerate_configurations(items, inst.m, config_cap):
        evaluated += 1
        result = match_and_cost(reopt, items, config)
        if best is None or result.key() < best.key():
            best = result
    if best is None:  # pragma: no cover
        raise SchedulingException("no configuration for T=%s" % items.T)

    if best.makespan > (1 + eps0) * items.T:
        raise SchedulingException(
            "makespan %s above (1+%s)*%s" % (best.makespan, eps0, items.T)
        )
    if best.cost != transition_cost(reopt, best.assignment):  # pragma: no cover
        raise SchedulingException("reported cost does not match the recount")
    _LOGGER.debug("%s configurations evaluated, best %s", evaluated, best)
    return best.assignment, best.cost
